#pragma once

#include "errbar/eval.hpp"

#include <string>
#include <vector>

namespace errbar {

// Learning-curve figure as a standalone SVG: log-scale point counts on x,
// normalized CV-RMSE on y, one marker series per scale factor, and a dashed
// guide line at the 0.2 usefulness threshold. Output bytes are a pure
// function of the points.
void emit_curve_plot(const std::vector<LearningCurvePoint>& points, const std::string& path);

}  // namespace errbar
