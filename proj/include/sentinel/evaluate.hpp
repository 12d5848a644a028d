#pragma once

#include "sentinel/synth.hpp"
#include "sentinel/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>

namespace sentinel {

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;
    Scalar precision = 0.0;  // tp / (tp + fp), 0 when undefined
    Scalar recall = 0.0;     // event-level: matched truth entries / total entries
    std::uint64_t events_total = 0;
    std::uint64_t events_matched = 0;
};

/// Event-level matching with a tick tolerance: a flagged verdict is TP when
/// its timestamp falls within tolerance_ticks of a truth interval on an
/// overlapping stream set, FP otherwise. Unflagged verdicts near an unmatched
/// truth interval count FN; the rest are TN.
ConfusionCounts score(const std::vector<AnomalyVerdict>& verdicts, const InjectionLog& truth,
                      Timestamp grid_period, int tolerance_ticks);

/// Lazily walks the non-empty stream subsets of a filtered inventory view.
class CombinationIterator {
public:
    explicit CombinationIterator(std::vector<std::size_t> pool) : pool_(std::move(pool)) {}

    /// Next subset as indices into the original entry list; nullopt when done.
    std::optional<std::vector<std::size_t>> next();

private:
    std::vector<std::size_t> pool_;
    std::uint64_t cursor_ = 1;  // bitmask over pool_, skipping the empty set
};

struct CombinationCounts {
    std::uint64_t intra = 0;  // sum over devices of 2^k - 1
    std::uint64_t inter = 0;  // 2^U - 1 over unique-sensor streams
};

CombinationCounts enumerate_combinations(const StreamInventory& inventory);

/// Listing iterators for exhaustive checks (intra: per-device; inter: unique
/// streams only). Only valid for pools of at most 63 streams.
std::vector<CombinationIterator> intra_device_listings(const StreamInventory& inventory);
CombinationIterator inter_device_listing(const StreamInventory& inventory);

struct RunOutcome {
    int epochs = 0;
    std::uint64_t anomaly_count = 0;
    ConfusionCounts confusion;
};

struct RunSpec {
    std::string config_id;
    Condition condition = Condition::UC;
    std::string pipeline;  // preprocessing chain description
    DetectorKind detector = DetectorKind::RecurrentForecaster;
    std::function<RunOutcome()> run;
};

struct RunRecord {
    std::string config_id;
    Condition condition = Condition::UC;
    std::string pipeline;
    DetectorKind detector = DetectorKind::RecurrentForecaster;
    Scalar wall_seconds = 0.0;
    int epochs = 0;
    std::uint64_t anomaly_count = 0;
    ConfusionCounts confusion;
    bool failed = false;
    std::string error;
};

/// Runs each spec, timing the run callable only. A failing run yields a
/// failure record and never aborts the sweep. workers > 1 executes runs
/// concurrently; records keep plan order either way.
std::vector<RunRecord> benchmark(const std::vector<RunSpec>& plan, int workers = 1);

/// Append-only results store CSV.
void save_run_records(const std::vector<RunRecord>& records, const std::string& path,
                      bool append = false);

/// Plot-data file: one whitespace-separated series per line group, keyed by
/// detector and pipeline, consumable by any plotting tool.
void save_timing_plot_data(const std::vector<RunRecord>& records, const std::string& path);

}  // namespace sentinel
