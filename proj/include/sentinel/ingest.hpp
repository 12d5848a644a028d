#pragma once

#include "sentinel/types.hpp"

#include <optional>

namespace sentinel {

enum class IngestMode { Replay, Live };

struct IngestConfig {
    IngestMode mode = IngestMode::Replay;
    std::optional<std::string> broker_uri;
    std::vector<std::string> topics;
    Timestamp grid_period = 60;
    int max_gap_fill = 5;           // grid steps forward-filled before hard-missing
    bool drop_incomplete_rows = true;

    void validate() const;
};

struct CleanResult {
    std::vector<SensorReading> readings;
    std::size_t dropped = 0;
};

/// Removes readings with null or non-finite values; order preserved.
CleanResult clean(const std::vector<SensorReading>& readings);

/// Builds the master table: one row per grid tick spanning [min ts, max ts],
/// last-write-wins within a tick, bounded forward fill, then (optionally)
/// drops rows that still have missing cells.
AlignedFrame align(const std::vector<SensorReading>& readings, const IngestConfig& cfg,
                   const StreamInventory& inventory);

}  // namespace sentinel
