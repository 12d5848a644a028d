#include "sentinel/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace sentinel {

void IngestConfig::validate() const {
    if (grid_period <= 0) throw ValidationError("grid_period must be positive");
    if (max_gap_fill < 0) throw ValidationError("max_gap_fill must be non-negative");
    if (mode == IngestMode::Live && !broker_uri) {
        throw ValidationError("live mode requires a broker URI");
    }
}

CleanResult clean(const std::vector<SensorReading>& readings) {
    CleanResult result;
    result.readings.reserve(readings.size());
    for (const auto& r : readings) {
        if (r.missing || !std::isfinite(r.value)) {
            ++result.dropped;
            continue;
        }
        result.readings.push_back(r);
    }
    return result;
}

AlignedFrame align(const std::vector<SensorReading>& readings, const IngestConfig& cfg,
                   const StreamInventory& inventory) {
    cfg.validate();
    if (readings.empty()) throw ValidationError("align: empty reading sequence");

    std::set<std::string> known;
    for (const auto& e : inventory.entries()) known.insert(column_id(e.topic, e.stream));

    Timestamp lo = readings.front().timestamp;
    Timestamp hi = lo;
    std::set<std::string> present;
    for (const auto& r : readings) {
        const std::string col = column_id(r.topic, r.stream);
        if (!known.count(col)) {
            throw ValidationError("reading for stream not in inventory: " + col);
        }
        present.insert(col);
        lo = std::min(lo, r.timestamp);
        hi = std::max(hi, r.timestamp);
    }

    const Timestamp p = cfg.grid_period;
    const Timestamp first_tick = (lo / p) * p - (lo < 0 && lo % p != 0 ? p : 0);
    const Index rows = static_cast<Index>((hi - first_tick) / p) + 1;
    const std::vector<std::string> columns(present.begin(), present.end());
    const Index cols = static_cast<Index>(columns.size());

    AlignedFrame frame;
    frame.period = p;
    frame.columns = columns;
    frame.grid.reserve(static_cast<std::size_t>(rows));
    for (Index i = 0; i < rows; ++i) frame.grid.push_back(first_tick + i * p);
    frame.values = Matrix::Zero(rows, cols);
    frame.mask = MaskMatrix::Constant(rows, cols, false);

    std::map<std::string, Index> col_index;
    for (Index j = 0; j < cols; ++j) col_index[columns[static_cast<std::size_t>(j)]] = j;

    // Last-write-wins within a tick; input order breaks same-timestamp ties.
    std::vector<Timestamp> latest(static_cast<std::size_t>(rows * cols),
                                  std::numeric_limits<Timestamp>::min());
    for (const auto& r : readings) {
        const Index i = static_cast<Index>((r.timestamp - first_tick) / p);
        const Index j = col_index.at(column_id(r.topic, r.stream));
        auto& seen = latest[static_cast<std::size_t>(i * cols + j)];
        if (r.timestamp >= seen) {
            seen = r.timestamp;
            frame.values(i, j) = r.value;
            frame.mask(i, j) = true;
        }
    }

    // Bounded forward fill.
    for (Index j = 0; j < cols; ++j) {
        Index last_obs = -1;
        for (Index i = 0; i < rows; ++i) {
            if (frame.mask(i, j)) {
                last_obs = i;
            } else if (last_obs >= 0 && i - last_obs <= cfg.max_gap_fill) {
                frame.values(i, j) = frame.values(last_obs, j);
                frame.mask(i, j) = true;
            }
        }
    }

    if (cfg.drop_incomplete_rows) {
        std::vector<Index> keep;
        for (Index i = 0; i < rows; ++i) {
            if (frame.mask.row(i).all()) keep.push_back(i);
        }
        frame = frame.select_rows(keep);
        frame.period = p;
    }
    return frame;
}

}  // namespace sentinel
