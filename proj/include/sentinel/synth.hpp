#pragma once

#include "sentinel/types.hpp"

#include <cstdint>

namespace sentinel {

/// Shape of one generated stream. Occupancy streams follow the weekday
/// schedule with smooth ramps; the rest follow a diurnal sine cycle. A
/// daylight stream follows sunrise/sunset instead of the occupancy hours.
struct StreamShape {
    std::string column;        // "topic/stream"
    Scalar baseline = 0.0;
    Scalar amplitude = 1.0;
    Scalar phase_hours = 0.0;  // diurnal phase shift
    Scalar noise_sd = 0.0;
    bool occupancy = false;
    bool daylight = false;
};

struct ScenarioConfig {
    Timestamp start = 1592784000;      // 2020-06-22T00:00:00Z, a Monday
    Timestamp duration_seconds = 7 * 86400;
    Timestamp grid_period = 60;
    std::vector<StreamShape> streams;
    Scalar occupancy_start_hour = 8.0;
    Scalar occupancy_end_hour = 18.0;
    Scalar ramp_minutes = 30.0;
    Scalar daylight_start_hour = 6.0;
    Scalar daylight_end_hour = 20.0;
    bool weekdays_only = true;
    std::uint64_t seed = 0;
};

/// The 14 unique-sensor streams of the reference inventory, with plausible
/// building-telemetry shapes.
ScenarioConfig default_scenario();

AlignedFrame generate(const ScenarioConfig& cfg);

enum class InjectionKind { Point, Contextual, Collective };

std::string to_string(InjectionKind k);
InjectionKind injection_kind_from_string(const std::string& s);

struct Injection {
    InjectionKind kind = InjectionKind::Point;
    std::vector<std::string> streams;
    Timestamp start = 0;
    Timestamp end = 0;      // inclusive interval [start, end]
    Scalar magnitude = 1.0; // point/collective: added value; contextual: fraction of amplitude
};

struct InjectionLog {
    std::vector<Injection> entries;
};

/// Applies the logged anomalies. Point: single-cell spike of the stated
/// magnitude. Contextual: in-range (schedule-violating) values placed over
/// the interval. Collective: coordinated multi-step offset across the listed
/// streams. Cells outside logged intervals are bit-identical to the input.
AlignedFrame inject(const AlignedFrame& frame, const InjectionLog& log,
                    const ScenarioConfig& cfg);

/// Occupancy envelope in [0, 1] at a given instant (ramps included).
Scalar occupancy_level(const ScenarioConfig& cfg, Timestamp ts);
Scalar daylight_level(const ScenarioConfig& cfg, Timestamp ts);

void save_scenario(const ScenarioConfig& cfg, const std::string& path);
ScenarioConfig load_scenario(const std::string& path);
void save_injections(const InjectionLog& log, const std::string& path,
                     const std::string& config_id = "");
InjectionLog load_injections(const std::string& path);
std::string injections_config_id(const std::string& path);

}  // namespace sentinel
