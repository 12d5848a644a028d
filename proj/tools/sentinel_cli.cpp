// Operator CLI: synth / ingest / train / detect / eval / sweep / combos.
#include "sentinel/evaluate.hpp"
#include "sentinel/forecaster.hpp"
#include "sentinel/ingest.hpp"
#include "sentinel/io.hpp"
#include "sentinel/isolation_forest.hpp"
#include "sentinel/model_io.hpp"
#include "sentinel/mqtt.hpp"
#include "sentinel/ocsvm.hpp"
#include "sentinel/preprocess.hpp"
#include "sentinel/synth.hpp"
#include "sentinel/util.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

namespace {

using namespace sentinel;
using nlohmann::json;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::uint64_t resolve_seed(std::uint64_t flag_seed, bool seed_set) {
    if (seed_set) return flag_seed;
    if (const char* env = std::getenv("SENTINEL_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return 0;
}

/// Effective per-run options: config file values overridden by flags.
struct PipelineOptions {
    std::uint64_t seed = 0;
    Condition condition = Condition::UC;
    std::string light_stream = "nir/natural";
    Scalar light_threshold = 0.5;
    std::string scaler = "standard";  // standard | minmax | none
    std::string reduction = "none";
    DetectorKind detector = DetectorKind::RecurrentForecaster;
    Index time_steps = 74;
    int conv_kernel = 32;
    int conv_filters = 5;
    int lstm_units = 32;
    int max_epochs = 100;
    int batch_size = 10;
    Scalar nu = 0.5;
    Scalar gamma = -1.0;  // auto
    int trees = 100;
    int subsample = 256;

    json canonical() const {
        return {{"seed", seed},
                {"condition", to_string(condition)},
                {"light_stream", light_stream},
                {"light_threshold", light_threshold},
                {"scaler", scaler},
                {"reduction", reduction},
                {"detector", to_string(detector)},
                {"time_steps", time_steps},
                {"conv_kernel", conv_kernel},
                {"conv_filters", conv_filters},
                {"lstm_units", lstm_units},
                {"max_epochs", max_epochs},
                {"batch_size", batch_size},
                {"nu", nu},
                {"gamma", gamma},
                {"trees", trees},
                {"subsample", subsample}};
    }

    std::string config_id() const { return config_hash(canonical().dump()); }
};

PipelineOptions options_from_json(const json& j) {
    PipelineOptions o;
    o.seed = j.value("seed", o.seed);
    if (j.contains("condition")) o.condition = condition_from_string(j["condition"].get<std::string>());
    o.light_stream = j.value("light_stream", o.light_stream);
    o.light_threshold = j.value("light_threshold", o.light_threshold);
    if (j.contains("preprocess")) {
        const auto& p = j["preprocess"];
        o.scaler = p.value("scaler", o.scaler);
        o.reduction = p.value("reduction", o.reduction);
    }
    if (j.contains("detect")) {
        const auto& d = j["detect"];
        if (d.contains("kind")) o.detector = detector_kind_from_string(d["kind"].get<std::string>());
        o.time_steps = d.value("time_steps", o.time_steps);
        o.conv_kernel = d.value("conv_kernel", o.conv_kernel);
        o.conv_filters = d.value("conv_filters", o.conv_filters);
        o.lstm_units = d.value("lstm_units", o.lstm_units);
        o.max_epochs = d.value("max_epochs", o.max_epochs);
        o.batch_size = d.value("batch_size", o.batch_size);
        o.nu = d.value("nu", o.nu);
        o.gamma = d.value("gamma", o.gamma);
        o.trees = d.value("trees", o.trees);
        o.subsample = d.value("subsample", o.subsample);
    }
    return o;
}

AlignedFrame condition_view(const AlignedFrame& frame, const PipelineOptions& opt) {
    if (opt.condition == Condition::UC) return frame;
    auto [mask, dt, nt] = split_condition(frame, opt.light_stream, opt.light_threshold);
    return opt.condition == Condition::DT ? dt : nt;
}

AlignedFrame preprocess_view(const AlignedFrame& frame, const PipelineOptions& opt,
                             std::optional<FittedScaler>& scaler_out, bool fit) {
    AlignedFrame work = frame;
    if (opt.reduction != "none") {
        work = reduce_frame(work, reduction_kind_from_string(opt.reduction));
    }
    if (opt.scaler != "none") {
        if (fit) scaler_out = fit_scaler(work, scaler_kind_from_string(opt.scaler));
        if (scaler_out) work = apply_scaler(work, *scaler_out);
    }
    return work;
}

Matrix complete_rows(const AlignedFrame& frame, std::vector<Timestamp>& grid_out) {
    std::vector<Index> keep;
    for (Index i = 0; i < frame.rows(); ++i) {
        if (frame.mask.row(i).all()) keep.push_back(i);
    }
    Matrix m(static_cast<Index>(keep.size()), frame.cols());
    grid_out.clear();
    for (std::size_t r = 0; r < keep.size(); ++r) {
        m.row(static_cast<Index>(r)) = frame.values.row(keep[r]);
        grid_out.push_back(frame.grid[static_cast<std::size_t>(keep[r])]);
    }
    return m;
}

struct TrainedModel {
    ModelFile file;
    int epochs = 0;
};

TrainedModel train_pipeline(const AlignedFrame& input, const PipelineOptions& opt) {
    TrainedModel out;
    out.file.kind = opt.detector;
    out.file.condition = opt.condition;
    out.file.config_id = opt.config_id();

    AlignedFrame conditioned = condition_view(input, opt);
    std::optional<FittedScaler> scaler;
    AlignedFrame work = preprocess_view(conditioned, opt, scaler, true);
    out.file.scaler = scaler;
    out.file.streams = work.columns;

    switch (opt.detector) {
        case DetectorKind::IsolationForest: {
            std::vector<Timestamp> grid;
            Matrix data = complete_rows(work, grid);
            IsolationForestParams params;
            params.tree_count = opt.trees;
            params.subsample_size = opt.subsample;
            params.seed = derive_seed(opt.seed, "isolation-forest");
            out.file.forest = IsolationForestModel::fit(data, params);
            break;
        }
        case DetectorKind::Ocsvm: {
            std::vector<Timestamp> grid;
            Matrix data = complete_rows(work, grid);
            OcsvmParams params;
            params.nu = opt.nu;
            params.gamma = opt.gamma;
            out.file.ocsvm = OcsvmModel::fit(data, params);
            break;
        }
        case DetectorKind::ConvForecaster:
        case DetectorKind::RecurrentForecaster: {
            ForecasterConfig cfg;
            cfg.kind = opt.detector;
            cfg.time_steps = opt.time_steps;
            cfg.conv_kernel = opt.conv_kernel;
            cfg.conv_filters = opt.conv_filters;
            cfg.lstm_units = opt.lstm_units;
            cfg.max_epochs = opt.max_epochs;
            cfg.batch_size = opt.batch_size;
            cfg.seed = derive_seed(opt.seed, "forecaster");
            WindowTensor windows = to_windows(work, cfg.time_steps);
            ForecasterModel model = ForecasterModel::create(cfg, work.cols());
            TrainResult result = train_forecaster(model, windows);
            out.file.forecaster = std::move(model);
            out.file.threshold = result.threshold;
            out.epochs = result.epochs_run;
            break;
        }
    }
    return out;
}

std::vector<AnomalyVerdict> detect_pipeline(const ModelFile& model, const AlignedFrame& input) {
    PipelineOptions opt;
    opt.condition = model.condition;
    AlignedFrame conditioned = condition_view(input, opt);
    if (model.streams.size() == 1 && conditioned.columns != model.streams) {
        // Univariate pipeline: the trained column is named after its reduction.
        conditioned = reduce_frame(conditioned,
                                   reduction_kind_from_string(model.streams.front()));
    }
    AlignedFrame work = model.scaler ? apply_scaler(conditioned, *model.scaler) : conditioned;
    if (work.columns != model.streams) {
        throw ValidationError("frame columns do not match the model's trained streams");
    }

    std::vector<AnomalyVerdict> verdicts;
    if (model.forecaster) {
        if (!model.threshold) throw ValidationError("forecaster model has no threshold");
        WindowTensor windows = to_windows(work, model.forecaster->config().time_steps);
        return forecaster_detect(*model.forecaster, *model.threshold, windows, model.streams,
                                 model.config_id);
    }

    std::vector<Timestamp> grid;
    Matrix data = complete_rows(work, grid);
    const Taxonomy taxonomy = work.cols() >= 2 ? Taxonomy::Combined : Taxonomy::Point;
    for (Index i = 0; i < data.rows(); ++i) {
        AnomalyVerdict v;
        v.timestamp = grid[static_cast<std::size_t>(i)];
        v.streams = model.streams;
        v.taxonomy = taxonomy;
        v.detector = model.kind;
        v.config_id = model.config_id;
        const Vector row = data.row(i).transpose();
        if (model.forest) {
            v.score = model.forest->score(row);
            v.threshold = IsolationForestModel::kAnomalyCutoff;
            v.is_anomaly = v.score > v.threshold;
        } else if (model.ocsvm) {
            v.score = model.ocsvm->decision(row);
            v.threshold = 0.0;
            v.is_anomaly = model.ocsvm->predict(row) < 0;
        } else {
            throw ValidationError("model file holds no detector parameters");
        }
        verdicts.push_back(std::move(v));
    }
    return verdicts;
}

int cmd_combos(const std::string& inventory_path) {
    StreamInventory inv = load_inventory(inventory_path);
    CombinationCounts counts = enumerate_combinations(inv);
    std::cout << "intra=" << counts.intra << '\n' << "inter=" << counts.inter << '\n';
    return 0;
}

int cmd_synth(const std::string& scenario_path, const std::string& inject_path,
              const std::string& out_path, const std::string& truth_out,
              std::uint64_t seed, bool seed_set) {
    ScenarioConfig cfg = scenario_path.empty() ? default_scenario() : load_scenario(scenario_path);
    if (seed_set || std::getenv("SENTINEL_SEED")) cfg.seed = resolve_seed(seed, seed_set);

    json canonical;
    canonical["scenario"] = {{"seed", cfg.seed},
                             {"duration", cfg.duration_seconds},
                             {"grid", cfg.grid_period},
                             {"streams", cfg.streams.size()}};
    AlignedFrame frame = generate(cfg);

    InjectionLog log;
    if (!inject_path.empty()) {
        log = load_injections(inject_path);
        canonical["injections"] = log.entries.size();
        frame = inject(frame, log, cfg);
    }
    const std::string id = config_hash(canonical.dump());
    save_frame(frame, out_path, id);
    if (!truth_out.empty()) save_injections(log, truth_out, id);
    std::cout << "rows=" << frame.rows() << " streams=" << frame.cols() << " config_id=" << id
              << '\n';
    return 0;
}

int cmd_ingest_replay(const std::string& replay_path, const std::string& inventory_path,
                      Timestamp grid, int max_gap_fill, bool keep_incomplete,
                      const std::string& out_path) {
    std::vector<SensorReading> raw = load_readings(replay_path);
    CleanResult cleaned = clean(raw);

    StreamInventory inventory;
    if (!inventory_path.empty()) {
        inventory = load_inventory(inventory_path);
    } else {
        // Derive the inventory from the replay itself.
        std::vector<InventoryEntry> entries;
        for (const auto& r : cleaned.readings) {
            bool known = std::any_of(entries.begin(), entries.end(), [&](const InventoryEntry& e) {
                return e.topic == r.topic && e.stream == r.stream;
            });
            if (!known) entries.push_back({r.device_id, r.topic, r.stream, false, EdgeProcess::None});
        }
        inventory = StreamInventory(std::move(entries));
    }

    IngestConfig cfg;
    cfg.mode = IngestMode::Replay;
    cfg.grid_period = grid;
    cfg.max_gap_fill = max_gap_fill;
    cfg.drop_incomplete_rows = !keep_incomplete;

    AlignedFrame frame = align(cleaned.readings, cfg, inventory);
    const json canonical = {{"replay", replay_path}, {"grid", grid}, {"max_gap_fill", max_gap_fill}};
    save_frame(frame, out_path, config_hash(canonical.dump()));
    std::cout << "rows=" << frame.rows() << " streams=" << frame.cols() << " dropped="
              << cleaned.dropped << '\n';
    return 0;
}

int cmd_ingest_live(const std::string& broker, const std::vector<std::string>& topics,
                    int duration_seconds, const std::string& out_path) {
    std::mutex mu;
    std::vector<SensorReading> captured;
    MqttSubscription sub(broker, topics, [&](const SensorReading& r) {
        std::lock_guard<std::mutex> lock(mu);
        captured.push_back(r);
    });
    std::this_thread::sleep_for(std::chrono::seconds(duration_seconds));
    sub.stop();
    const auto stats = sub.stats();
    save_readings(captured, out_path);
    std::cout << "captured=" << captured.size() << " malformed=" << stats.malformed
              << " reconnects=" << stats.reconnects << '\n';
    return 0;
}

int cmd_train(const std::string& frame_path, const std::string& config_path,
              const PipelineOptions& flag_overrides, const std::vector<std::string>& set_flags,
              const std::string& out_path) {
    PipelineOptions opt;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw ValidationError("cannot open config: " + config_path);
        json j;
        in >> j;
        opt = options_from_json(j);
    }
    // Flags win over the config file.
    auto set = [&](const std::string& name) {
        return std::find(set_flags.begin(), set_flags.end(), name) != set_flags.end();
    };
    if (set("seed")) opt.seed = flag_overrides.seed;
    if (set("condition")) opt.condition = flag_overrides.condition;
    if (set("light-stream")) opt.light_stream = flag_overrides.light_stream;
    if (set("light-threshold")) opt.light_threshold = flag_overrides.light_threshold;
    if (set("scaler")) opt.scaler = flag_overrides.scaler;
    if (set("reduction")) opt.reduction = flag_overrides.reduction;
    if (set("detector")) opt.detector = flag_overrides.detector;
    if (set("time-steps")) opt.time_steps = flag_overrides.time_steps;
    if (set("kernel")) opt.conv_kernel = flag_overrides.conv_kernel;
    if (set("filters")) opt.conv_filters = flag_overrides.conv_filters;
    if (set("lstm-units")) opt.lstm_units = flag_overrides.lstm_units;
    if (set("epochs")) opt.max_epochs = flag_overrides.max_epochs;
    if (set("batch")) opt.batch_size = flag_overrides.batch_size;
    if (set("nu")) opt.nu = flag_overrides.nu;
    if (set("gamma")) opt.gamma = flag_overrides.gamma;
    if (set("trees")) opt.trees = flag_overrides.trees;
    if (set("subsample")) opt.subsample = flag_overrides.subsample;

    AlignedFrame frame = load_frame(frame_path);
    TrainedModel trained = train_pipeline(frame, opt);
    save_model(trained.file, out_path);
    std::cout << "model=" << out_path << " config_id=" << trained.file.config_id;
    if (trained.epochs > 0) std::cout << " epochs=" << trained.epochs;
    std::cout << '\n';
    return 0;
}

int cmd_detect(const std::string& model_path, const std::string& frame_path,
               const std::string& out_path) {
    ModelFile model = load_model(model_path);
    AlignedFrame frame = load_frame(frame_path);
    std::vector<AnomalyVerdict> verdicts = detect_pipeline(model, frame);
    save_verdicts(verdicts, out_path);
    std::uint64_t flagged = 0;
    for (const auto& v : verdicts) flagged += v.is_anomaly ? 1 : 0;
    std::cout << "verdicts=" << verdicts.size() << " anomalies=" << flagged << '\n';
    return 0;
}

int cmd_eval(const std::string& verdict_path, const std::string& truth_path, Timestamp grid,
             int tolerance, bool force, const std::string& out_path) {
    std::vector<AnomalyVerdict> verdicts = load_verdicts(verdict_path);
    InjectionLog truth = load_injections(truth_path);
    if (!force) {
        for (const auto& v : verdicts) {
            if (v.config_id != verdicts.front().config_id) {
                throw ValidationError(
                    "verdicts mix config ids; score one pipeline at a time or pass --force");
            }
        }
    }
    ConfusionCounts c = score(verdicts, truth, grid, tolerance);
    std::ofstream out(out_path);
    if (!out) throw ValidationError("cannot write file: " + out_path);
    out << "tp,fp,tn,fn,precision,recall,events_total,events_matched\n";
    out << c.tp << ',' << c.fp << ',' << c.tn << ',' << c.fn << ',' << c.precision << ','
        << c.recall << ',' << c.events_total << ',' << c.events_matched << '\n';
    std::cout << "tp=" << c.tp << " fp=" << c.fp << " tn=" << c.tn << " fn=" << c.fn
              << " precision=" << c.precision << " recall=" << c.recall << '\n';
    return 0;
}

int cmd_sweep(const std::string& plan_path, const std::string& out_path,
              const std::string& plot_path, int workers) {
    std::ifstream in(plan_path);
    if (!in) throw ValidationError("cannot open plan: " + plan_path);
    json plan_json;
    in >> plan_json;

    AlignedFrame train_frame = load_frame(plan_json.at("train_frame").get<std::string>());
    AlignedFrame detect_frame = plan_json.contains("detect_frame")
                                    ? load_frame(plan_json["detect_frame"].get<std::string>())
                                    : train_frame;
    InjectionLog truth;
    bool have_truth = plan_json.contains("truth");
    if (have_truth) truth = load_injections(plan_json["truth"].get<std::string>());
    const Timestamp grid = train_frame.period > 0 ? train_frame.period : 60;
    const int tolerance = plan_json.value("tolerance_ticks", 2);

    std::vector<PipelineOptions> run_options;
    std::vector<RunSpec> plan;
    for (const auto& jr : plan_json.at("runs")) {
        run_options.push_back(options_from_json(jr));
    }
    for (const auto& opt : run_options) {
        RunSpec spec;
        spec.config_id = opt.config_id();
        spec.condition = opt.condition;
        spec.pipeline = opt.reduction != "none" ? opt.reduction : opt.scaler;
        spec.detector = opt.detector;
        spec.run = [&, opt]() {
            TrainedModel trained = train_pipeline(train_frame, opt);
            RunOutcome outcome;
            outcome.epochs = trained.epochs;
            std::vector<AnomalyVerdict> verdicts = detect_pipeline(trained.file, detect_frame);
            for (const auto& v : verdicts) outcome.anomaly_count += v.is_anomaly ? 1 : 0;
            if (have_truth) outcome.confusion = score(verdicts, truth, grid, tolerance);
            return outcome;
        };
        plan.push_back(std::move(spec));
    }

    std::vector<RunRecord> records = benchmark(plan, workers);
    save_run_records(records, out_path, /*append=*/true);
    if (!plot_path.empty()) save_timing_plot_data(records, plot_path);
    for (const auto& r : records) {
        std::cout << r.config_id << ' ' << to_string(r.condition) << ' ' << to_string(r.detector)
                  << ' ' << (r.failed ? "FAILED" : "ok") << " wall=" << r.wall_seconds
                  << "s anomalies=" << r.anomaly_count << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Building-sensor anomaly detection pipeline"};
    app.require_subcommand(1);

    // combos
    auto* combos = app.add_subcommand("combos", "Count intra-/inter-device stream combinations");
    std::string inventory_path;
    combos->add_option("--inventory", inventory_path, "Inventory CSV")->required();

    // synth
    auto* synth = app.add_subcommand("synth", "Generate synthetic telemetry with optional injected anomalies");
    std::string scenario_path, inject_path, synth_out, truth_out;
    std::uint64_t seed = 0;
    synth->add_option("--scenario", scenario_path, "Scenario JSON (defaults to the built-in 14-stream scenario)");
    synth->add_option("--inject", inject_path, "Injection log JSON to apply");
    synth->add_option("--out", synth_out, "Output frame CSV")->required();
    synth->add_option("--truth-out", truth_out, "Write the applied injection log with provenance");
    auto* seed_opt = synth->add_option("--seed", seed, "RNG seed (falls back to SENTINEL_SEED)");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Build an aligned frame from replay CSV or live MQTT capture");
    std::string replay_path, ingest_inventory, ingest_out, broker;
    std::vector<std::string> topics;
    Timestamp grid = 60;
    int max_gap_fill = 5;
    bool keep_incomplete = false;
    bool live = false;
    int duration = 60;
    ingest->add_option("--replay", replay_path, "Replay readings CSV");
    ingest->add_flag("--live", live, "Capture from a live broker instead of replaying");
    ingest->add_option("--broker", broker, "MQTT broker URI (mqtt://host:port)");
    ingest->add_option("--topic", topics, "Topic to subscribe (repeatable)");
    ingest->add_option("--duration", duration, "Live capture duration, seconds");
    ingest->add_option("--inventory", ingest_inventory, "Inventory CSV (derived from replay when omitted)");
    ingest->add_option("--grid", grid, "Master grid period, seconds");
    ingest->add_option("--max-gap-fill", max_gap_fill, "Forward-fill bound in grid steps");
    ingest->add_flag("--keep-incomplete", keep_incomplete, "Keep rows with missing cells");
    ingest->add_option("--out", ingest_out, "Output path")->required();

    // train
    auto* train = app.add_subcommand("train", "Fit a detector on a frame");
    std::string train_frame, train_config, train_out;
    PipelineOptions flags;
    std::string condition_str = "UC", detector_str = "recurrent_forecaster";
    train->add_option("--frame", train_frame, "Training frame CSV")->required();
    train->add_option("--config", train_config, "Pipeline config JSON");
    train->add_option("--out", train_out, "Output model file")->required();
    train->add_option("--seed", flags.seed, "RNG seed");
    train->add_option("--condition", condition_str, "UC, DT or NT");
    train->add_option("--light-stream", flags.light_stream, "Daylight source stream");
    train->add_option("--light-threshold", flags.light_threshold, "Daylight threshold");
    train->add_option("--scaler", flags.scaler, "standard, minmax or none");
    train->add_option("--reduction", flags.reduction, "none, average, sd, mad, kurtosis, skewness");
    train->add_option("--detector", detector_str,
                      "isolation_forest, ocsvm, conv_forecaster or recurrent_forecaster");
    train->add_option("--time-steps", flags.time_steps, "Window length T");
    train->add_option("--kernel", flags.conv_kernel, "Conv kernel length");
    train->add_option("--filters", flags.conv_filters, "Conv filter count");
    train->add_option("--lstm-units", flags.lstm_units, "LSTM unit count");
    train->add_option("--epochs", flags.max_epochs, "Max training epochs");
    train->add_option("--batch", flags.batch_size, "Batch size");
    train->add_option("--nu", flags.nu, "OCSVM nu");
    train->add_option("--gamma", flags.gamma, "OCSVM gamma (<=0 means auto)");
    train->add_option("--trees", flags.trees, "Isolation forest tree count");
    train->add_option("--subsample", flags.subsample, "Isolation forest subsample size");

    // detect
    auto* detect = app.add_subcommand("detect", "Score a frame with a trained model");
    std::string model_path, detect_frame_path, detect_out;
    detect->add_option("--model", model_path, "Model file")->required();
    detect->add_option("--frame", detect_frame_path, "Frame CSV")->required();
    detect->add_option("--out", detect_out, "Output verdicts CSV")->required();

    // eval
    auto* eval = app.add_subcommand("eval", "Score verdicts against injected ground truth");
    std::string verdict_path, truth_path, eval_out;
    Timestamp eval_grid = 60;
    int tolerance = 2;
    bool force = false;
    eval->add_option("--verdicts", verdict_path, "Verdicts CSV")->required();
    eval->add_option("--truth", truth_path, "Injection log JSON")->required();
    eval->add_option("--grid", eval_grid, "Grid period, seconds");
    eval->add_option("--tolerance", tolerance, "Event tolerance in grid ticks");
    eval->add_flag("--force", force, "Skip provenance checks");
    eval->add_option("--out", eval_out, "Report CSV")->required();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Run a plan of train/detect/eval configurations");
    std::string plan_path, sweep_out, plot_path;
    int workers = 1;
    sweep->add_option("--plan", plan_path, "Plan JSON")->required();
    sweep->add_option("--out", sweep_out, "Results store CSV (appended)")->required();
    sweep->add_option("--plot-data", plot_path, "Timing plot-data file");
    sweep->add_option("--workers", workers, "Parallel run count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (*combos) return cmd_combos(inventory_path);
        if (*synth) {
            return cmd_synth(scenario_path, inject_path, synth_out, truth_out, seed,
                             seed_opt->count() > 0);
        }
        if (*ingest) {
            if (live) {
                if (broker.empty()) throw ValidationError("--live requires --broker");
                if (topics.empty()) topics = {"#"};
                return cmd_ingest_live(broker, topics, duration, ingest_out);
            }
            if (replay_path.empty()) throw ValidationError("ingest needs --replay or --live");
            return cmd_ingest_replay(replay_path, ingest_inventory, grid, max_gap_fill,
                                     keep_incomplete, ingest_out);
        }
        if (*train) {
            flags.condition = condition_from_string(condition_str);
            flags.detector = detector_kind_from_string(detector_str);
            std::vector<std::string> set_flags;
            for (const auto* opt : train->get_options()) {
                if (opt->count() > 0) {
                    std::string name = opt->get_name();
                    if (name.rfind("--", 0) == 0) name = name.substr(2);
                    set_flags.push_back(name);
                }
            }
            return cmd_train(train_frame, train_config, flags, set_flags, train_out);
        }
        if (*detect) return cmd_detect(model_path, detect_frame_path, detect_out);
        if (*eval) return cmd_eval(verdict_path, truth_path, eval_grid, tolerance, force, eval_out);
        if (*sweep) return cmd_sweep(plan_path, sweep_out, plot_path, workers);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
