#include "errbar/bundle.hpp"

#include "errbar/errors.hpp"
#include "errbar/util.hpp"

#include <fstream>
#include <string>

namespace errbar {
namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
    json data = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
        throw ValidationError("matrix data length does not match its shape");
    }
    Eigen::MatrixXd m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j2 = 0; j2 < cols; ++j2) m(i, j2) = data[k++].get<double>();
    }
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    return v;
}

json config_to_json(const MLPConfig& c) {
    return json{{"hidden_widths", c.hidden_widths},
                {"epochs", c.epochs},
                {"learning_rate", c.learning_rate},
                {"batch_size", c.batch_size},
                {"adam_beta1", c.adam_beta1},
                {"adam_beta2", c.adam_beta2},
                {"adam_epsilon", c.adam_epsilon},
                {"init_seed", c.init_seed},
                {"shuffle_seed", c.shuffle_seed}};
}

MLPConfig config_from_json(const json& j) {
    MLPConfig c;
    c.hidden_widths = j.at("hidden_widths").get<std::vector<int>>();
    c.epochs = j.at("epochs").get<int>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.batch_size = j.at("batch_size").get<int>();
    c.adam_beta1 = j.at("adam_beta1").get<double>();
    c.adam_beta2 = j.at("adam_beta2").get<double>();
    c.adam_epsilon = j.at("adam_epsilon").get<double>();
    c.init_seed = j.at("init_seed").get<std::uint64_t>();
    c.shuffle_seed = j.at("shuffle_seed").get<std::uint64_t>();
    return c;
}

json calibration_to_json(const CalibrationParams& c) {
    return json{{"a", c.a},
                {"b", c.b},
                {"sigma_floor", c.sigma_floor},
                {"method_tag", c.method_tag},
                {"n_bins", c.n_bins}};
}

CalibrationParams calibration_from_json(const json& j) {
    CalibrationParams c;
    c.a = j.at("a").get<double>();
    c.b = j.at("b").get<double>();
    c.sigma_floor = j.at("sigma_floor").get<double>();
    c.method_tag = j.at("method_tag").get<std::string>();
    c.n_bins = j.at("n_bins").get<int>();
    return c;
}

// Layer shapes must chain from input_dim to a single output.
void check_mlp_dims(const MLPModel& m, const std::string& who) {
    if (m.weights.size() != m.biases.size() || m.weights.empty()) {
        throw ValidationError(who + ": malformed layer list");
    }
    Eigen::Index in = m.input_dim;
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        if (m.weights[l].rows() != in || m.biases[l].size() != m.weights[l].cols()) {
            throw ValidationError(who + ": layer " + std::to_string(l) +
                                  " dimensions do not chain");
        }
        in = m.weights[l].cols();
    }
    if (in != 1) throw ValidationError(who + ": output width must be 1");
}

}  // namespace

json scaler_to_json(const MinMaxScaler& s) {
    return json{{"mins", vector_to_json(s.mins)},
                {"maxs", vector_to_json(s.maxs)},
                {"degenerate_cols", s.degenerate_cols}};
}

MinMaxScaler scaler_from_json(const json& j) {
    MinMaxScaler s;
    s.mins = vector_from_json(j.at("mins"));
    s.maxs = vector_from_json(j.at("maxs"));
    s.degenerate_cols = j.at("degenerate_cols").get<std::vector<Eigen::Index>>();
    if (s.mins.size() != s.maxs.size()) {
        throw ValidationError("scaler min/max lengths differ");
    }
    return s;
}

json mlp_to_json(const MLPModel& m) {
    json weights = json::array();
    for (const auto& w : m.weights) weights.push_back(matrix_to_json(w));
    json biases = json::array();
    for (const auto& b : m.biases) biases.push_back(vector_to_json(b));
    return json{{"input_dim", m.input_dim},
                {"trained", m.trained},
                {"config", config_to_json(m.config)},
                {"weights", std::move(weights)},
                {"biases", std::move(biases)}};
}

MLPModel mlp_from_json(const json& j) {
    MLPModel m;
    m.input_dim = j.at("input_dim").get<Eigen::Index>();
    m.trained = j.at("trained").get<bool>();
    m.config = config_from_json(j.at("config"));
    for (const auto& w : j.at("weights")) m.weights.push_back(matrix_from_json(w));
    for (const auto& b : j.at("biases")) m.biases.push_back(vector_from_json(b));
    check_mlp_dims(m, "network");
    return m;
}

json ensemble_to_json(const EnsembleModel& e) {
    json members = json::array();
    for (const auto& m : e.members) members.push_back(mlp_to_json(m));
    return json{{"members", std::move(members)},
                {"member_seeds", e.member_seeds},
                {"calibration", calibration_to_json(e.calibration)}};
}

EnsembleModel ensemble_from_json(const json& j) {
    EnsembleModel e;
    for (const auto& m : j.at("members")) e.members.push_back(mlp_from_json(m));
    e.member_seeds = j.at("member_seeds").get<std::vector<std::uint64_t>>();
    e.calibration = calibration_from_json(j.at("calibration"));
    if (e.members.size() < 2) throw ValidationError("ensemble must have >= 2 members");
    for (const auto& m : e.members) {
        if (m.input_dim != e.members.front().input_dim) {
            throw ValidationError("ensemble members disagree on input width");
        }
    }
    return e;
}

json distilled_to_json(const DistilledModel& d) {
    return json{{"net", mlp_to_json(d.net)},
                {"input_scaler", scaler_to_json(d.input_scaler)},
                {"sigma_floor", d.sigma_floor}};
}

DistilledModel distilled_from_json(const json& j) {
    DistilledModel d;
    d.net = mlp_from_json(j.at("net"));
    d.input_scaler = scaler_from_json(j.at("input_scaler"));
    d.sigma_floor = j.at("sigma_floor").get<double>();
    return d;
}

void save_bundle(const ModelBundle& bundle, const std::string& path) {
    json payload;
    payload["feature_names"] = bundle.feature_names;
    payload["target_name"] = bundle.target_name;
    payload["alpha_scaler"] = scaler_to_json(bundle.alpha_scaler);
    payload["model_a"] = mlp_to_json(bundle.model_a);
    payload["ensemble"] = bundle.ensemble ? ensemble_to_json(*bundle.ensemble) : json();
    payload["model_b"] = bundle.model_b ? distilled_to_json(*bundle.model_b) : json();
    payload["provenance"] = bundle.provenance;

    Fnv1a64 h;
    h.update(payload.dump());

    json file;
    file["format_version"] = bundle.format_version;
    file["checksum"] = to_hex(h.digest());
    file["payload"] = std::move(payload);

    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << file.dump() << '\n';
}

ModelBundle load_bundle(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");

    json file;
    try {
        in >> file;
    } catch (const json::exception& e) {
        throw ValidationError(path + ": not a valid bundle: " + e.what());
    }

    try {
        const int version = file.at("format_version").get<int>();
        if (version > kBundleFormatVersion) {
            throw ValidationError(path + ": bundle format_version " + std::to_string(version) +
                                  " is newer than the supported " +
                                  std::to_string(kBundleFormatVersion));
        }
        const auto& payload = file.at("payload");
        Fnv1a64 h;
        h.update(payload.dump());
        if (to_hex(h.digest()) != file.at("checksum").get<std::string>()) {
            throw ValidationError(path + ": checksum mismatch (corrupted bundle)");
        }

        ModelBundle b;
        b.format_version = version;
        b.feature_names = payload.at("feature_names").get<std::vector<std::string>>();
        b.target_name = payload.at("target_name").get<std::string>();
        b.alpha_scaler = scaler_from_json(payload.at("alpha_scaler"));
        b.model_a = mlp_from_json(payload.at("model_a"));
        if (!payload.at("ensemble").is_null()) {
            b.ensemble = ensemble_from_json(payload.at("ensemble"));
        }
        if (!payload.at("model_b").is_null()) {
            b.model_b = distilled_from_json(payload.at("model_b"));
        }
        b.provenance = payload.at("provenance");

        const auto d = static_cast<Eigen::Index>(b.feature_names.size());
        if (b.alpha_scaler.n_features() != d || b.model_a.input_dim != d) {
            throw ValidationError(path + ": feature names, scaler and model widths disagree");
        }
        if (b.ensemble && b.ensemble->input_dim() != d) {
            throw ValidationError(path + ": ensemble input width disagrees with features");
        }
        if (b.model_b && (b.model_b->net.input_dim != d ||
                          b.model_b->input_scaler.n_features() != d)) {
            throw ValidationError(path + ": distilled model width disagrees with features");
        }
        return b;
    } catch (const json::exception& e) {
        throw ValidationError(path + ": malformed bundle: " + e.what());
    }
}

}  // namespace errbar
