#include "errbar/plot.hpp"

#include "errbar/errors.hpp"
#include "errbar/util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace errbar {
namespace {

constexpr double kWidth = 760.0;
constexpr double kHeight = 500.0;
constexpr double kLeft = 72.0;
constexpr double kRight = 600.0;   // legend lives to the right of this
constexpr double kTop = 36.0;
constexpr double kBottom = 444.0;
constexpr double kGuide = 0.2;     // usefulness threshold for nrmse

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string px(double v) { return format_fixed(v, 2); }

}  // namespace

void emit_curve_plot(const std::vector<LearningCurvePoint>& points, const std::string& path) {
    if (points.empty()) throw ValidationError("emit_curve_plot: no points");

    std::vector<double> order;
    std::map<double, std::vector<const LearningCurvePoint*>> series;
    for (const auto& p : points) {
        auto& bucket = series[p.scale_factor];
        if (bucket.empty()) order.push_back(p.scale_factor);
        bucket.push_back(&p);
    }
    for (auto& [s, bucket] : series) {
        std::sort(bucket.begin(), bucket.end(),
                  [](const auto* a, const auto* b) { return a->n_points < b->n_points; });
    }

    double log_min = std::numeric_limits<double>::infinity();
    double log_max = -std::numeric_limits<double>::infinity();
    double y_peak = 0.0;
    for (const auto& p : points) {
        const double lx = std::log10(static_cast<double>(p.n_points));
        log_min = std::min(log_min, lx);
        log_max = std::max(log_max, lx);
        if (std::isfinite(p.metrics.nrmse)) y_peak = std::max(y_peak, p.metrics.nrmse);
    }
    if (log_max - log_min < 1e-9) {
        log_min -= 0.5;
        log_max += 0.5;
    }
    const double y_max = std::max(0.25, 1.05 * y_peak);

    const auto to_x = [&](Eigen::Index n) {
        const double t = (std::log10(static_cast<double>(n)) - log_min) / (log_max - log_min);
        return kLeft + t * (kRight - kLeft);
    };
    const auto to_y = [&](double v) { return kBottom - (v / y_max) * (kBottom - kTop); };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
        << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";

    // Axes.
    svg << "<line x1=\"" << px(kLeft) << "\" y1=\"" << px(kBottom) << "\" x2=\"" << px(kRight)
        << "\" y2=\"" << px(kBottom) << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << px(kLeft) << "\" y1=\"" << px(kTop) << "\" x2=\"" << px(kLeft)
        << "\" y2=\"" << px(kBottom) << "\" stroke=\"black\"/>\n";

    // Decade ticks on the log x axis.
    for (int k = static_cast<int>(std::ceil(log_min - 1e-9));
         k <= static_cast<int>(std::floor(log_max + 1e-9)); ++k) {
        const double x = kLeft + ((k - log_min) / (log_max - log_min)) * (kRight - kLeft);
        svg << "<line x1=\"" << px(x) << "\" y1=\"" << px(kBottom) << "\" x2=\"" << px(x)
            << "\" y2=\"" << px(kBottom + 6) << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << px(x) << "\" y=\"" << px(kBottom + 22)
            << "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\">"
            << format_fixed(std::pow(10.0, k), 0) << "</text>\n";
    }

    // y ticks at a readable step.
    double step = 0.05;
    for (const double candidate : {0.05, 0.1, 0.2, 0.25, 0.5, 1.0}) {
        step = candidate;
        if (y_max / candidate <= 8.0) break;
    }
    for (double v = 0.0; v <= y_max + 1e-12; v += step) {
        const double y = to_y(v);
        svg << "<line x1=\"" << px(kLeft - 6) << "\" y1=\"" << px(y) << "\" x2=\"" << px(kLeft)
            << "\" y2=\"" << px(y) << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << px(kLeft - 10) << "\" y=\"" << px(y + 4)
            << "\" font-size=\"12\" text-anchor=\"end\" font-family=\"sans-serif\">"
            << format_fixed(v, 2) << "</text>\n";
    }

    // Axis labels.
    svg << "<text x=\"" << px((kLeft + kRight) / 2) << "\" y=\"" << px(kBottom + 44)
        << "\" font-size=\"14\" text-anchor=\"middle\" font-family=\"sans-serif\">"
           "points in augmented dataset</text>\n"
        << "<text x=\"20\" y=\"" << px((kTop + kBottom) / 2)
        << "\" font-size=\"14\" text-anchor=\"middle\" font-family=\"sans-serif\""
           " transform=\"rotate(-90 20 " << px((kTop + kBottom) / 2) << ")\">"
           "normalized CV-RMSE</text>\n";

    // Usefulness guide line.
    if (kGuide <= y_max) {
        const double gy = to_y(kGuide);
        svg << "<line id=\"guide-0.2\" x1=\"" << px(kLeft) << "\" y1=\"" << px(gy) << "\" x2=\""
            << px(kRight) << "\" y2=\"" << px(gy)
            << "\" stroke=\"#888888\" stroke-dasharray=\"6,4\"/>\n"
            << "<text x=\"" << px(kRight - 4) << "\" y=\"" << px(gy - 5)
            << "\" font-size=\"11\" text-anchor=\"end\" fill=\"#888888\""
            << " font-family=\"sans-serif\">0.2</text>\n";
    }

    // One polyline + markers per scale factor, finite points only.
    std::size_t color = 0;
    for (const double s : order) {
        const char* stroke = kPalette[color % (sizeof(kPalette) / sizeof(kPalette[0]))];
        std::ostringstream poly;
        for (const auto* p : series[s]) {
            if (!std::isfinite(p->metrics.nrmse)) continue;
            poly << px(to_x(p->n_points)) << ',' << px(to_y(p->metrics.nrmse)) << ' ';
        }
        svg << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\""
            << poly.str() << "\"/>\n";
        for (const auto* p : series[s]) {
            if (!std::isfinite(p->metrics.nrmse)) continue;
            svg << "<circle cx=\"" << px(to_x(p->n_points)) << "\" cy=\""
                << px(to_y(p->metrics.nrmse)) << "\" r=\"3.5\" fill=\"" << stroke << "\"/>\n";
        }

        const double ly = kTop + 10 + 20.0 * static_cast<double>(color);
        svg << "<line x1=\"" << px(kRight + 14) << "\" y1=\"" << px(ly) << "\" x2=\""
            << px(kRight + 40) << "\" y2=\"" << px(ly) << "\" stroke=\"" << stroke
            << "\" stroke-width=\"1.5\"/>\n"
            << "<text x=\"" << px(kRight + 46) << "\" y=\"" << px(ly + 4)
            << "\" font-size=\"12\" font-family=\"sans-serif\">s = " << format_double(s)
            << "</text>\n";
        ++color;
    }

    svg << "</svg>\n";

    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << svg.str();
}

}  // namespace errbar
