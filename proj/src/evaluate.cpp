#include "sentinel/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <future>
#include <set>

namespace sentinel {

namespace {

bool streams_overlap(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() || b.empty()) return true;  // detector covering all streams
    return std::any_of(a.begin(), a.end(), [&](const std::string& s) {
        return std::find(b.begin(), b.end(), s) != b.end();
    });
}

}  // namespace

ConfusionCounts score(const std::vector<AnomalyVerdict>& verdicts, const InjectionLog& truth,
                      Timestamp grid_period, int tolerance_ticks) {
    if (grid_period <= 0) throw ValidationError("score: grid period must be positive");
    const Timestamp slack = static_cast<Timestamp>(tolerance_ticks) * grid_period;

    auto near_entry = [&](const AnomalyVerdict& v, const Injection& e) {
        return v.timestamp >= e.start - slack && v.timestamp <= e.end + slack &&
               streams_overlap(v.streams, e.streams);
    };

    ConfusionCounts c;
    std::vector<bool> matched(truth.entries.size(), false);
    for (const auto& v : verdicts) {
        if (!v.is_anomaly) continue;
        bool hit = false;
        for (std::size_t k = 0; k < truth.entries.size(); ++k) {
            if (near_entry(v, truth.entries[k])) {
                matched[k] = true;
                hit = true;
            }
        }
        hit ? ++c.tp : ++c.fp;
    }
    for (const auto& v : verdicts) {
        if (v.is_anomaly) continue;
        bool near_unmatched = false;
        for (std::size_t k = 0; k < truth.entries.size(); ++k) {
            if (!matched[k] && near_entry(v, truth.entries[k])) {
                near_unmatched = true;
                break;
            }
        }
        near_unmatched ? ++c.fn : ++c.tn;
    }

    c.events_total = truth.entries.size();
    c.events_matched = static_cast<std::uint64_t>(std::count(matched.begin(), matched.end(), true));
    if (c.tp + c.fp > 0) c.precision = static_cast<Scalar>(c.tp) / static_cast<Scalar>(c.tp + c.fp);
    if (c.events_total > 0) {
        c.recall = static_cast<Scalar>(c.events_matched) / static_cast<Scalar>(c.events_total);
    }
    return c;
}

std::optional<std::vector<std::size_t>> CombinationIterator::next() {
    if (pool_.size() >= 64 || cursor_ >= (1ULL << pool_.size())) return std::nullopt;
    std::vector<std::size_t> subset;
    for (std::size_t b = 0; b < pool_.size(); ++b) {
        if (cursor_ & (1ULL << b)) subset.push_back(pool_[b]);
    }
    ++cursor_;
    return subset;
}

CombinationCounts enumerate_combinations(const StreamInventory& inventory) {
    CombinationCounts counts;
    for (const auto& [device, k] : inventory.per_device_counts()) {
        counts.intra += (1ULL << k) - 1;
    }
    counts.inter = (1ULL << inventory.unique_sensor_count()) - 1;
    return counts;
}

std::vector<CombinationIterator> intra_device_listings(const StreamInventory& inventory) {
    std::vector<std::string> devices;
    std::vector<std::vector<std::size_t>> pools;
    for (std::size_t i = 0; i < inventory.entries().size(); ++i) {
        const auto& device = inventory.entries()[i].device_id;
        auto it = std::find(devices.begin(), devices.end(), device);
        if (it == devices.end()) {
            devices.push_back(device);
            pools.emplace_back();
            it = devices.end() - 1;
        }
        pools[static_cast<std::size_t>(it - devices.begin())].push_back(i);
    }
    std::vector<CombinationIterator> listings;
    for (auto& p : pools) listings.emplace_back(std::move(p));
    return listings;
}

CombinationIterator inter_device_listing(const StreamInventory& inventory) {
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < inventory.entries().size(); ++i) {
        if (inventory.entries()[i].unique_sensor) pool.push_back(i);
    }
    return CombinationIterator(std::move(pool));
}

namespace {

RunRecord execute_run(const RunSpec& spec) {
    RunRecord rec;
    rec.config_id = spec.config_id;
    rec.condition = spec.condition;
    rec.pipeline = spec.pipeline;
    rec.detector = spec.detector;
    const auto begin = std::chrono::steady_clock::now();
    try {
        RunOutcome out = spec.run();
        rec.epochs = out.epochs;
        rec.anomaly_count = out.anomaly_count;
        rec.confusion = out.confusion;
    } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
    }
    rec.wall_seconds = std::chrono::duration<Scalar>(std::chrono::steady_clock::now() - begin).count();
    return rec;
}

}  // namespace

std::vector<RunRecord> benchmark(const std::vector<RunSpec>& plan, int workers) {
    std::vector<RunRecord> records(plan.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < plan.size(); ++i) records[i] = execute_run(plan[i]);
        return records;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> pool;
    const int count = std::min<int>(workers, static_cast<int>(plan.size()));
    for (int w = 0; w < count; ++w) {
        pool.push_back(std::async(std::launch::async, [&] {
            for (std::size_t i = next.fetch_add(1); i < plan.size(); i = next.fetch_add(1)) {
                records[i] = execute_run(plan[i]);
            }
        }));
    }
    for (auto& f : pool) f.get();
    return records;
}

void save_run_records(const std::vector<RunRecord>& records, const std::string& path, bool append) {
    const bool write_header = !append || !std::ifstream(path).good();
    std::ofstream out(path, append ? std::ios::app : std::ios::out);
    if (!out) throw ValidationError("cannot write file: " + path);
    if (write_header) {
        out << "config_id,condition,pipeline,detector,wall_seconds,epochs,anomaly_count,tp,fp,tn,fn,status\n";
    }
    for (const auto& r : records) {
        out << r.config_id << ',' << to_string(r.condition) << ',' << r.pipeline << ','
            << to_string(r.detector) << ',' << r.wall_seconds << ',' << r.epochs << ','
            << r.anomaly_count << ',' << r.confusion.tp << ',' << r.confusion.fp << ','
            << r.confusion.tn << ',' << r.confusion.fn << ','
            << (r.failed ? "failed: " + r.error : std::string("ok")) << '\n';
    }
}

void save_timing_plot_data(const std::vector<RunRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path);
    std::set<std::pair<std::string, std::string>> groups;
    for (const auto& r : records) {
        if (!r.failed) groups.insert({to_string(r.detector), r.pipeline});
    }
    for (const auto& [detector, pipeline] : groups) {
        out << "# series detector=" << detector << " pipeline=" << pipeline << '\n';
        for (const auto& r : records) {
            if (r.failed || to_string(r.detector) != detector || r.pipeline != pipeline) continue;
            out << r.config_id << ' ' << to_string(r.condition) << ' ' << r.wall_seconds << ' '
                << r.epochs << '\n';
        }
        out << '\n';
    }
}

}  // namespace sentinel
