#pragma once

#include "sentinel/types.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sentinel {

/// "2020-07-24T13:05:00Z" (or without Z) -> seconds since epoch, UTC.
Timestamp parse_timestamp(const std::string& iso);
std::string format_timestamp(Timestamp ts);

/// Inventory CSV: header `device_id,topic,stream,unique_sensor,edge_process`.
StreamInventory load_inventory(const std::string& path);
void save_inventory(const StreamInventory& inv, const std::string& path);

/// Frame CSV: first column `timestamp` (ISO-8601 UTC), one column per stream,
/// empty cell = missing. Lines starting with '#' carry metadata
/// (`# config_id=<hex>`) and are skipped by the parser.
AlignedFrame load_frame(const std::string& path);
void save_frame(const AlignedFrame& frame, const std::string& path,
                const std::string& config_id = "");
std::optional<std::string> frame_config_id(const std::string& path);

/// Replay readings CSV: `timestamp,device_id,topic,stream,value`.
std::vector<SensorReading> load_readings(const std::string& path);
void save_readings(const std::vector<SensorReading>& readings, const std::string& path);

/// Verdict CSV: `timestamp,streams,score,threshold,is_anomaly,taxonomy,detector,config_id`
/// with streams ';'-joined.
std::vector<AnomalyVerdict> load_verdicts(const std::string& path);
void save_verdicts(const std::vector<AnomalyVerdict>& verdicts, const std::string& path);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace sentinel
