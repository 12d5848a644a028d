#pragma once

#include "sentinel/forecaster.hpp"
#include "sentinel/isolation_forest.hpp"
#include "sentinel/ocsvm.hpp"
#include "sentinel/preprocess.hpp"

#include <optional>

namespace sentinel {

/// Self-describing model container: detector kind and parameters, the fitted
/// preprocessing pipeline, the loss threshold, and config provenance.
/// Reloading reproduces scoring bit-for-bit (doubles round-trip exactly).
struct ModelFile {
    DetectorKind kind = DetectorKind::IsolationForest;
    std::string config_id;
    std::vector<std::string> streams;
    Condition condition = Condition::UC;
    std::optional<FittedScaler> scaler;
    std::optional<IsolationForestModel> forest;
    std::optional<OcsvmModel> ocsvm;
    std::optional<ForecasterModel> forecaster;
    std::optional<LossThreshold> threshold;
};

void save_model(const ModelFile& model, const std::string& path);
ModelFile load_model(const std::string& path);

}  // namespace sentinel
