#include "sentinel/synth.hpp"

#include "sentinel/io.hpp"
#include "sentinel/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

namespace sentinel {

namespace {

using nlohmann::json;

constexpr Timestamp kDay = 86400;

Scalar smoothstep(Scalar u) {
    u = std::clamp(u, 0.0, 1.0);
    return (1.0 - std::cos(std::numbers::pi * u)) / 2.0;
}

bool is_weekday(Timestamp ts) {
    const Timestamp day = ts / kDay;
    const int dow = static_cast<int>((day + 3) % 7);  // 0 = Monday
    return dow < 5;
}

Scalar schedule_level(Timestamp ts, Scalar start_hour, Scalar end_hour, Scalar ramp_minutes) {
    const Scalar hour = static_cast<Scalar>(ts % kDay) / 3600.0;
    const Scalar ramp_h = ramp_minutes / 60.0;
    if (hour < start_hour || hour >= end_hour + ramp_h) return 0.0;
    if (hour < start_hour + ramp_h) return smoothstep((hour - start_hour) / ramp_h);
    if (hour < end_hour) return 1.0;
    return smoothstep(1.0 - (hour - end_hour) / ramp_h);
}

}  // namespace

Scalar occupancy_level(const ScenarioConfig& cfg, Timestamp ts) {
    if (cfg.weekdays_only && !is_weekday(ts)) return 0.0;
    return schedule_level(ts, cfg.occupancy_start_hour, cfg.occupancy_end_hour, cfg.ramp_minutes);
}

Scalar daylight_level(const ScenarioConfig& cfg, Timestamp ts) {
    return schedule_level(ts, cfg.daylight_start_hour, cfg.daylight_end_hour, cfg.ramp_minutes);
}

ScenarioConfig default_scenario() {
    ScenarioConfig cfg;
    auto diurnal = [](std::string col, Scalar base, Scalar amp, Scalar phase, Scalar noise) {
        StreamShape s;
        s.column = std::move(col);
        s.baseline = base;
        s.amplitude = amp;
        s.phase_hours = phase;
        s.noise_sd = noise;
        return s;
    };
    auto occupied = [&](std::string col, Scalar base, Scalar amp, Scalar noise) {
        StreamShape s = diurnal(std::move(col), base, amp, 0.0, noise);
        s.occupancy = true;
        return s;
    };

    cfg.streams.push_back(diurnal("sense-hat/temp", 21.0, 2.0, 0.0, 0.05));
    cfg.streams.push_back(diurnal("sense-hat/humidity", 38.0, 3.0, 6.0, 0.08));
    cfg.streams.push_back(diurnal("sense-hat/P", 0.84, 0.05, 3.0, 0.002));
    cfg.streams.push_back(occupied("infra/max", 0.05, 0.6, 0.01));
    cfg.streams.push_back(occupied("co2/C", 0.25, 0.4, 0.01));
    StreamShape natural = diurnal("nir/natural", 0.0, 0.9, 0.0, 0.005);
    natural.daylight = true;
    cfg.streams.push_back(natural);
    cfg.streams.push_back(occupied("nir/artificial", 0.0, 0.9, 0.005));
    cfg.streams.push_back(occupied("sound3/p", 0.02, 0.7, 0.01));
    cfg.streams.push_back(occupied("sound4/score", 0.5, 0.1, 0.005));
    cfg.streams.push_back(occupied("pir/Q", 0.03, 0.4, 0.005));
    StreamShape light = occupied("all-in-1/L", 0.0, 0.95, 0.005);
    cfg.streams.push_back(light);
    cfg.streams.push_back(diurnal("all-in-1/A", 0.74, 0.02, 12.0, 0.002));
    cfg.streams.push_back(occupied("all-in-1/M", 0.02, 0.1, 0.002));
    cfg.streams.push_back(occupied("ble_devices/p", 0.15, 0.6, 0.01));
    return cfg;
}

AlignedFrame generate(const ScenarioConfig& cfg) {
    if (cfg.streams.empty()) throw ValidationError("scenario has no streams");
    if (cfg.duration_seconds <= 0 || cfg.grid_period <= 0) {
        throw ValidationError("scenario duration and grid period must be positive");
    }
    for (const auto& s : cfg.streams) {
        if (s.noise_sd < 0) throw ValidationError("negative noise SD for " + s.column);
    }

    const Index rows = cfg.duration_seconds / cfg.grid_period;
    const Index cols = static_cast<Index>(cfg.streams.size());

    // Column order is lexicographic by (topic, stream) id, like aligned frames.
    std::vector<std::size_t> order(cfg.streams.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return cfg.streams[a].column < cfg.streams[b].column;
    });

    AlignedFrame frame;
    frame.period = cfg.grid_period;
    frame.grid.reserve(static_cast<std::size_t>(rows));
    for (Index i = 0; i < rows; ++i) frame.grid.push_back(cfg.start + i * cfg.grid_period);
    frame.values.resize(rows, cols);
    frame.mask = MaskMatrix::Constant(rows, cols, true);

    for (Index j = 0; j < cols; ++j) {
        const StreamShape& s = cfg.streams[order[static_cast<std::size_t>(j)]];
        frame.columns.push_back(s.column);
        std::mt19937_64 rng(derive_seed(cfg.seed, "synth-stream/" + s.column));
        std::normal_distribution<Scalar> noise(0.0, 1.0);
        for (Index i = 0; i < rows; ++i) {
            const Timestamp ts = frame.grid[static_cast<std::size_t>(i)];
            Scalar level;
            if (s.occupancy) {
                level = occupancy_level(cfg, ts);
            } else if (s.daylight) {
                level = daylight_level(cfg, ts);
            } else {
                const Scalar hour = static_cast<Scalar>(ts % kDay) / 3600.0;
                level = 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * (hour - 6.0 + s.phase_hours) / 24.0);
            }
            Scalar v = s.baseline + s.amplitude * level;
            if (s.noise_sd > 0) v += s.noise_sd * noise(rng);
            frame.values(i, j) = v;
        }
    }
    return frame;
}

std::string to_string(InjectionKind k) {
    switch (k) {
        case InjectionKind::Point: return "point";
        case InjectionKind::Contextual: return "contextual";
        case InjectionKind::Collective: return "collective";
    }
    return "point";
}

InjectionKind injection_kind_from_string(const std::string& s) {
    if (s == "point") return InjectionKind::Point;
    if (s == "contextual") return InjectionKind::Contextual;
    if (s == "collective") return InjectionKind::Collective;
    throw ParseError("unknown injection kind: " + s);
}

namespace {

Index tick_of(const AlignedFrame& frame, Timestamp ts) {
    auto it = std::lower_bound(frame.grid.begin(), frame.grid.end(), ts);
    if (it == frame.grid.end()) throw ValidationError("injection interval outside frame");
    return static_cast<Index>(it - frame.grid.begin());
}

const StreamShape& shape_of(const ScenarioConfig& cfg, const std::string& column) {
    for (const auto& s : cfg.streams) {
        if (s.column == column) return s;
    }
    throw ValidationError("injection references unknown stream: " + column);
}

}  // namespace

AlignedFrame inject(const AlignedFrame& frame, const InjectionLog& log,
                    const ScenarioConfig& cfg) {
    // Per-stream overlap check.
    for (std::size_t a = 0; a < log.entries.size(); ++a) {
        const auto& ea = log.entries[a];
        if (ea.end < ea.start) throw ValidationError("injection interval reversed");
        for (std::size_t b = a + 1; b < log.entries.size(); ++b) {
            const auto& eb = log.entries[b];
            const bool shares = std::any_of(ea.streams.begin(), ea.streams.end(), [&](const auto& s) {
                return std::find(eb.streams.begin(), eb.streams.end(), s) != eb.streams.end();
            });
            if (shares && ea.start <= eb.end && eb.start <= ea.end) {
                throw ValidationError("overlapping injections on one stream");
            }
        }
    }

    AlignedFrame out = frame;
    for (const auto& e : log.entries) {
        if (frame.grid.empty() || e.start < frame.grid.front() || e.end > frame.grid.back()) {
            throw ValidationError("injection interval outside frame");
        }
        const Index first = tick_of(frame, e.start);
        const Index last = tick_of(frame, e.end);
        for (const auto& stream : e.streams) {
            const Index j = out.column_index(stream);
            switch (e.kind) {
                case InjectionKind::Point:
                    out.values(first, j) += e.magnitude;
                    break;
                case InjectionKind::Contextual: {
                    // In-range values at a schedule-violating time: the level an
                    // active period would produce, held over the interval.
                    const StreamShape& s = shape_of(cfg, stream);
                    const Scalar v = s.baseline + s.amplitude * std::clamp(e.magnitude, 0.0, 1.0);
                    for (Index i = first; i <= last; ++i) out.values(i, j) = v;
                    break;
                }
                case InjectionKind::Collective:
                    for (Index i = first; i <= last; ++i) out.values(i, j) += e.magnitude;
                    break;
            }
        }
    }
    return out;
}

void save_scenario(const ScenarioConfig& cfg, const std::string& path) {
    json j;
    j["start"] = format_timestamp(cfg.start);
    j["duration_seconds"] = cfg.duration_seconds;
    j["grid_period"] = cfg.grid_period;
    j["occupancy_start_hour"] = cfg.occupancy_start_hour;
    j["occupancy_end_hour"] = cfg.occupancy_end_hour;
    j["ramp_minutes"] = cfg.ramp_minutes;
    j["daylight_start_hour"] = cfg.daylight_start_hour;
    j["daylight_end_hour"] = cfg.daylight_end_hour;
    j["weekdays_only"] = cfg.weekdays_only;
    j["seed"] = cfg.seed;
    j["streams"] = json::array();
    for (const auto& s : cfg.streams) {
        j["streams"].push_back({{"column", s.column},
                                {"baseline", s.baseline},
                                {"amplitude", s.amplitude},
                                {"phase_hours", s.phase_hours},
                                {"noise_sd", s.noise_sd},
                                {"occupancy", s.occupancy},
                                {"daylight", s.daylight}});
    }
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << j.dump(2) << '\n';
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    ScenarioConfig cfg;
    cfg.start = parse_timestamp(j.at("start").get<std::string>());
    cfg.duration_seconds = j.at("duration_seconds").get<Timestamp>();
    cfg.grid_period = j.at("grid_period").get<Timestamp>();
    cfg.occupancy_start_hour = j.value("occupancy_start_hour", cfg.occupancy_start_hour);
    cfg.occupancy_end_hour = j.value("occupancy_end_hour", cfg.occupancy_end_hour);
    cfg.ramp_minutes = j.value("ramp_minutes", cfg.ramp_minutes);
    cfg.daylight_start_hour = j.value("daylight_start_hour", cfg.daylight_start_hour);
    cfg.daylight_end_hour = j.value("daylight_end_hour", cfg.daylight_end_hour);
    cfg.weekdays_only = j.value("weekdays_only", cfg.weekdays_only);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.streams.clear();
    for (const auto& js : j.at("streams")) {
        StreamShape s;
        s.column = js.at("column").get<std::string>();
        s.baseline = js.value("baseline", 0.0);
        s.amplitude = js.value("amplitude", 1.0);
        s.phase_hours = js.value("phase_hours", 0.0);
        s.noise_sd = js.value("noise_sd", 0.0);
        s.occupancy = js.value("occupancy", false);
        s.daylight = js.value("daylight", false);
        cfg.streams.push_back(std::move(s));
    }
    return cfg;
}

void save_injections(const InjectionLog& log, const std::string& path,
                     const std::string& config_id) {
    json j;
    if (!config_id.empty()) j["config_id"] = config_id;
    j["entries"] = json::array();
    for (const auto& e : log.entries) {
        j["entries"].push_back({{"kind", to_string(e.kind)},
                                {"streams", e.streams},
                                {"start", format_timestamp(e.start)},
                                {"end", format_timestamp(e.end)},
                                {"magnitude", e.magnitude}});
    }
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << j.dump(2) << '\n';
}

InjectionLog load_injections(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    InjectionLog log;
    for (const auto& je : j.at("entries")) {
        Injection e;
        e.kind = injection_kind_from_string(je.at("kind").get<std::string>());
        e.streams = je.at("streams").get<std::vector<std::string>>();
        auto as_time = [](const json& v) {
            return v.is_number() ? v.get<Timestamp>() : parse_timestamp(v.get<std::string>());
        };
        e.start = as_time(je.at("start"));
        e.end = as_time(je.at("end"));
        e.magnitude = je.value("magnitude", 1.0);
        log.entries.push_back(std::move(e));
    }
    return log;
}

std::string injections_config_id(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    json j;
    in >> j;
    return j.value("config_id", std::string{});
}

}  // namespace sentinel
