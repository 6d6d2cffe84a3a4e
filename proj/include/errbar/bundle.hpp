#pragma once

#include "errbar/data.hpp"
#include "errbar/distill.hpp"
#include "errbar/ensemble.hpp"
#include "errbar/nn.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

// Persistence for a trained model family. A bundle is a single versioned
// JSON document carrying the scaler, the accuracy model, optionally the
// ensemble and the distilled model, plus provenance. Weights round-trip
// exactly (shortest-round-trip decimals), so save -> load -> predict is
// bit-identical to predicting before the save.

namespace errbar {

inline constexpr int kBundleFormatVersion = 1;

struct ModelBundle {
    int format_version = kBundleFormatVersion;
    MinMaxScaler alpha_scaler;
    MLPModel model_a;
    std::optional<EnsembleModel> ensemble;
    std::optional<DistilledModel> model_b;
    std::vector<std::string> feature_names;
    std::string target_name;
    nlohmann::json provenance;  // run-config snapshot, data hash, free-form

    bool distilled() const { return model_b.has_value(); }
};

// The payload is checksummed (FNV-1a over its canonical dump); load refuses
// corrupted files, unknown future versions, and dimension-inconsistent
// contents.
void save_bundle(const ModelBundle& bundle, const std::string& path);
ModelBundle load_bundle(const std::string& path);

// JSON (de)serialization of the pieces, shared with save/load and exposed
// for tooling.
nlohmann::json scaler_to_json(const MinMaxScaler& s);
MinMaxScaler scaler_from_json(const nlohmann::json& j);
nlohmann::json mlp_to_json(const MLPModel& m);
MLPModel mlp_from_json(const nlohmann::json& j);
nlohmann::json ensemble_to_json(const EnsembleModel& e);
EnsembleModel ensemble_from_json(const nlohmann::json& j);
nlohmann::json distilled_to_json(const DistilledModel& d);
DistilledModel distilled_from_json(const nlohmann::json& j);

}  // namespace errbar
