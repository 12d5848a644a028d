#include "sentinel/model_io.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace sentinel {

namespace {

using nlohmann::json;

json vector_to_json(const Vector& v) {
    json arr = json::array();
    for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Vector vector_from_json(const json& arr) {
    Vector v(static_cast<Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Index>(i)) = arr[i].get<Scalar>();
    return v;
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& rows) {
    const Index r = static_cast<Index>(rows.size());
    const Index c = r > 0 ? static_cast<Index>(rows[0].size()) : 0;
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i) {
        for (Index j = 0; j < c; ++j) {
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<Scalar>();
        }
    }
    return m;
}

json scaler_to_json(const FittedScaler& s) {
    return {{"kind", to_string(s.kind)},
            {"columns", s.columns},
            {"mean", vector_to_json(s.mean)},
            {"sd", vector_to_json(s.sd)},
            {"min", vector_to_json(s.min)},
            {"max", vector_to_json(s.max)}};
}

FittedScaler scaler_from_json(const json& j) {
    FittedScaler s;
    s.kind = scaler_kind_from_string(j.at("kind").get<std::string>());
    s.columns = j.at("columns").get<std::vector<std::string>>();
    s.mean = vector_from_json(j.at("mean"));
    s.sd = vector_from_json(j.at("sd"));
    s.min = vector_from_json(j.at("min"));
    s.max = vector_from_json(j.at("max"));
    return s;
}

json forest_to_json(const IsolationForestModel& m) {
    json trees = json::array();
    for (const auto& tree : m.trees()) {
        json nodes = json::array();
        for (const auto& n : tree.nodes) {
            nodes.push_back({n.feature, n.split, n.left, n.right, n.size});
        }
        trees.push_back(std::move(nodes));
    }
    return {{"trees", std::move(trees)},
            {"dim", m.dim()},
            {"sample_size", m.sample_size()},
            {"tree_count", m.params().tree_count},
            {"subsample_size", m.params().subsample_size},
            {"seed", m.params().seed}};
}

IsolationForestModel forest_from_json(const json& j) {
    std::vector<IsolationTree> trees;
    for (const auto& jt : j.at("trees")) {
        IsolationTree tree;
        for (const auto& jn : jt) {
            IsolationNode n;
            n.feature = jn[0].get<int>();
            n.split = jn[1].get<Scalar>();
            n.left = jn[2].get<int>();
            n.right = jn[3].get<int>();
            n.size = jn[4].get<int>();
            tree.nodes.push_back(n);
        }
        trees.push_back(std::move(tree));
    }
    IsolationForestParams params;
    params.tree_count = j.at("tree_count").get<int>();
    params.subsample_size = j.at("subsample_size").get<int>();
    params.seed = j.at("seed").get<std::uint64_t>();
    return IsolationForestModel(std::move(trees), j.at("dim").get<Index>(),
                                j.at("sample_size").get<int>(), params);
}

json ocsvm_to_json(const OcsvmModel& m) {
    return {{"support_data", matrix_to_json(m.support_data())},
            {"alpha", vector_to_json(m.alpha())},
            {"rho", m.rho()},
            {"gamma", m.gamma()},
            {"upper_bound", m.upper_bound()},
            {"kkt_residual", m.kkt_residual()}};
}

OcsvmModel ocsvm_from_json(const json& j) {
    return OcsvmModel(matrix_from_json(j.at("support_data")), vector_from_json(j.at("alpha")),
                      j.at("rho").get<Scalar>(), j.at("gamma").get<Scalar>(),
                      j.at("upper_bound").get<Scalar>(), j.at("kkt_residual").get<Scalar>());
}

json forecaster_to_json(const ForecasterModel& m) {
    const auto& cfg = m.config();
    return {{"kind", to_string(cfg.kind)},
            {"time_steps", cfg.time_steps},
            {"conv_kernel", cfg.conv_kernel},
            {"conv_filters", cfg.conv_filters},
            {"lstm_units", cfg.lstm_units},
            {"max_epochs", cfg.max_epochs},
            {"batch_size", cfg.batch_size},
            {"learning_rate", cfg.learning_rate},
            {"beta1", cfg.beta1},
            {"beta2", cfg.beta2},
            {"epsilon", cfg.epsilon},
            {"min_delta", cfg.min_delta},
            {"patience", cfg.patience},
            {"seed", cfg.seed},
            {"streams", m.streams()},
            {"params", vector_to_json(m.params())}};
}

ForecasterModel forecaster_from_json(const json& j) {
    ForecasterConfig cfg;
    cfg.kind = detector_kind_from_string(j.at("kind").get<std::string>());
    cfg.time_steps = j.at("time_steps").get<Index>();
    cfg.conv_kernel = j.at("conv_kernel").get<int>();
    cfg.conv_filters = j.at("conv_filters").get<int>();
    cfg.lstm_units = j.at("lstm_units").get<int>();
    cfg.max_epochs = j.at("max_epochs").get<int>();
    cfg.batch_size = j.at("batch_size").get<int>();
    cfg.learning_rate = j.at("learning_rate").get<Scalar>();
    cfg.beta1 = j.at("beta1").get<Scalar>();
    cfg.beta2 = j.at("beta2").get<Scalar>();
    cfg.epsilon = j.at("epsilon").get<Scalar>();
    cfg.min_delta = j.at("min_delta").get<Scalar>();
    cfg.patience = j.at("patience").get<int>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    return ForecasterModel(cfg, j.at("streams").get<Index>(), vector_from_json(j.at("params")));
}

json threshold_to_json(const LossThreshold& t) {
    json losses = json::array();
    for (Scalar l : t.losses) losses.push_back(l);
    return {{"losses", std::move(losses)}, {"mae", t.mae}, {"sigma", t.sigma}, {"threshold", t.threshold}};
}

LossThreshold threshold_from_json(const json& j) {
    LossThreshold t;
    t.losses = j.at("losses").get<std::vector<Scalar>>();
    t.mae = j.at("mae").get<Scalar>();
    t.sigma = j.at("sigma").get<Scalar>();
    t.threshold = j.at("threshold").get<Scalar>();
    return t;
}

}  // namespace

void save_model(const ModelFile& model, const std::string& path) {
    json j;
    j["kind"] = to_string(model.kind);
    j["config_id"] = model.config_id;
    j["streams"] = model.streams;
    j["condition"] = to_string(model.condition);
    if (model.scaler) j["scaler"] = scaler_to_json(*model.scaler);
    if (model.forest) j["isolation_forest"] = forest_to_json(*model.forest);
    if (model.ocsvm) j["ocsvm"] = ocsvm_to_json(*model.ocsvm);
    if (model.forecaster) j["forecaster"] = forecaster_to_json(*model.forecaster);
    if (model.threshold) j["threshold"] = threshold_to_json(*model.threshold);
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << j.dump() << '\n';
}

ModelFile load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    ModelFile model;
    model.kind = detector_kind_from_string(j.at("kind").get<std::string>());
    model.config_id = j.value("config_id", std::string{});
    model.streams = j.value("streams", std::vector<std::string>{});
    model.condition = condition_from_string(j.value("condition", std::string{"UC"}));
    if (j.contains("scaler")) model.scaler = scaler_from_json(j["scaler"]);
    if (j.contains("isolation_forest")) model.forest = forest_from_json(j["isolation_forest"]);
    if (j.contains("ocsvm")) model.ocsvm = ocsvm_from_json(j["ocsvm"]);
    if (j.contains("forecaster")) model.forecaster = forecaster_from_json(j["forecaster"]);
    if (j.contains("threshold")) model.threshold = threshold_from_json(j["threshold"]);
    return model;
}

}  // namespace sentinel
