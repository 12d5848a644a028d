#include "sentinel/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

namespace sentinel {

namespace {

std::string format_double(Scalar v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    return in;
}

std::ofstream create_or_throw(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path);
    return out;
}

Scalar parse_double(const std::string& cell, const std::string& path, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        Scalar v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": bad numeric value '" + cell + "'");
    }
}

}  // namespace

Timestamp parse_timestamp(const std::string& iso) {
    std::tm tm = {};
    int y, mo, d, h, mi, s;
    char sep;
    if (std::sscanf(iso.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &h, &mi, &s) != 7 ||
        (sep != 'T' && sep != ' ')) {
        throw ParseError("bad timestamp: " + iso);
    }
    tm.tm_year = y - 1900;
    tm.tm_mon = mo - 1;
    tm.tm_mday = d;
    tm.tm_hour = h;
    tm.tm_min = mi;
    tm.tm_sec = s;
    return static_cast<Timestamp>(timegm(&tm));
}

std::string format_timestamp(Timestamp ts) {
    std::time_t t = static_cast<std::time_t>(ts);
    std::tm tm = {};
    gmtime_r(&t, &tm);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ",
                  tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                  tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

StreamInventory load_inventory(const std::string& path) {
    auto in = open_or_throw(path);
    std::string line;
    std::size_t line_no = 0;
    std::vector<InventoryEntry> entries;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto cells = split_csv_line(line);
        if (!header_seen) {
            if (cells.size() != 5 || cells[0] != "device_id") {
                throw ParseError(path + ":" + std::to_string(line_no) + ": bad inventory header");
            }
            header_seen = true;
            continue;
        }
        if (cells.size() != 5) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected 5 fields");
        }
        InventoryEntry e;
        e.device_id = cells[0];
        e.topic = cells[1];
        e.stream = cells[2];
        if (cells[3] == "true" || cells[3] == "1") {
            e.unique_sensor = true;
        } else if (cells[3] == "false" || cells[3] == "0") {
            e.unique_sensor = false;
        } else {
            throw ParseError(path + ":" + std::to_string(line_no) + ": bad unique_sensor flag '" + cells[3] + "'");
        }
        try {
            e.edge_process = edge_process_from_string(cells[4]);
        } catch (const ParseError&) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": bad edge_process '" + cells[4] + "'");
        }
        entries.push_back(std::move(e));
    }
    return StreamInventory(std::move(entries));
}

void save_inventory(const StreamInventory& inv, const std::string& path) {
    auto out = create_or_throw(path);
    out << "device_id,topic,stream,unique_sensor,edge_process\n";
    for (const auto& e : inv.entries()) {
        out << e.device_id << ',' << e.topic << ',' << e.stream << ','
            << (e.unique_sensor ? "true" : "false") << ',' << to_string(e.edge_process) << '\n';
    }
}

AlignedFrame load_frame(const std::string& path) {
    auto in = open_or_throw(path);
    std::string line;
    std::size_t line_no = 0;
    AlignedFrame frame;
    std::vector<std::vector<Scalar>> rows;
    std::vector<std::vector<bool>> masks;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto cells = split_csv_line(line);
        if (!header_seen) {
            if (cells.empty() || cells[0] != "timestamp") {
                throw ParseError(path + ":" + std::to_string(line_no) + ": bad frame header");
            }
            frame.columns.assign(cells.begin() + 1, cells.end());
            header_seen = true;
            continue;
        }
        if (cells.size() != frame.columns.size() + 1) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": column count mismatch");
        }
        frame.grid.push_back(parse_timestamp(cells[0]));
        std::vector<Scalar> row(frame.columns.size());
        std::vector<bool> mrow(frame.columns.size());
        for (std::size_t j = 0; j < frame.columns.size(); ++j) {
            if (cells[j + 1].empty()) {
                row[j] = std::numeric_limits<Scalar>::quiet_NaN();
                mrow[j] = false;
            } else {
                row[j] = parse_double(cells[j + 1], path, line_no);
                mrow[j] = true;
            }
        }
        rows.push_back(std::move(row));
        masks.push_back(std::move(mrow));
    }
    const Index r = static_cast<Index>(rows.size());
    const Index d = static_cast<Index>(frame.columns.size());
    frame.values.resize(r, d);
    frame.mask.resize(r, d);
    for (Index i = 0; i < r; ++i) {
        for (Index j = 0; j < d; ++j) {
            frame.values(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            frame.mask(i, j) = masks[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    }
    if (frame.grid.size() >= 2) {
        frame.period = frame.grid[1] - frame.grid[0];
    }
    return frame;
}

void save_frame(const AlignedFrame& frame, const std::string& path, const std::string& config_id) {
    auto out = create_or_throw(path);
    if (!config_id.empty()) out << "# config_id=" << config_id << '\n';
    out << "timestamp";
    for (const auto& c : frame.columns) out << ',' << c;
    out << '\n';
    for (Index i = 0; i < frame.rows(); ++i) {
        out << format_timestamp(frame.grid[static_cast<std::size_t>(i)]);
        for (Index j = 0; j < frame.cols(); ++j) {
            out << ',';
            if (frame.mask(i, j)) out << format_double(frame.values(i, j));
        }
        out << '\n';
    }
}

std::optional<std::string> frame_config_id(const std::string& path) {
    auto in = open_or_throw(path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("# config_id=", 0) == 0) return line.substr(12);
        if (!line.empty() && line[0] != '#') break;
    }
    return std::nullopt;
}

std::vector<SensorReading> load_readings(const std::string& path) {
    auto in = open_or_throw(path);
    std::string line;
    std::size_t line_no = 0;
    std::vector<SensorReading> readings;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto cells = split_csv_line(line);
        if (!header_seen && cells[0] == "timestamp") {
            header_seen = true;
            continue;
        }
        header_seen = true;
        if (cells.size() != 5) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected 5 fields");
        }
        SensorReading r;
        r.timestamp = parse_timestamp(cells[0]);
        r.device_id = cells[1];
        r.topic = cells[2];
        r.stream = cells[3];
        if (cells[4].empty()) {
            r.missing = true;
            r.value = std::numeric_limits<Scalar>::quiet_NaN();
        } else {
            try {
                std::size_t pos = 0;
                r.value = std::stod(cells[4], &pos);
                if (pos != cells[4].size()) throw std::invalid_argument(cells[4]);
            } catch (const std::exception&) {
                // Non-numeric payload values survive loading and are dropped by clean().
                r.missing = true;
                r.value = std::numeric_limits<Scalar>::quiet_NaN();
            }
        }
        readings.push_back(std::move(r));
    }
    return readings;
}

void save_readings(const std::vector<SensorReading>& readings, const std::string& path) {
    auto out = create_or_throw(path);
    out << "timestamp,device_id,topic,stream,value\n";
    for (const auto& r : readings) {
        out << format_timestamp(r.timestamp) << ',' << r.device_id << ',' << r.topic << ','
            << r.stream << ',';
        if (!r.missing) out << format_double(r.value);
        out << '\n';
    }
}

std::vector<AnomalyVerdict> load_verdicts(const std::string& path) {
    auto in = open_or_throw(path);
    std::string line;
    std::size_t line_no = 0;
    std::vector<AnomalyVerdict> verdicts;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        auto cells = split_csv_line(line);
        if (cells.size() != 8) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected 8 fields");
        }
        AnomalyVerdict v;
        v.timestamp = parse_timestamp(cells[0]);
        std::stringstream ss(cells[1]);
        std::string item;
        while (std::getline(ss, item, ';')) {
            if (!item.empty()) v.streams.push_back(item);
        }
        v.score = parse_double(cells[2], path, line_no);
        v.threshold = parse_double(cells[3], path, line_no);
        v.is_anomaly = cells[4] == "true" || cells[4] == "1";
        v.taxonomy = taxonomy_from_string(cells[5]);
        v.detector = detector_kind_from_string(cells[6]);
        v.config_id = cells[7];
        verdicts.push_back(std::move(v));
    }
    return verdicts;
}

void save_verdicts(const std::vector<AnomalyVerdict>& verdicts, const std::string& path) {
    auto out = create_or_throw(path);
    out << "timestamp,streams,score,threshold,is_anomaly,taxonomy,detector,config_id\n";
    for (const auto& v : verdicts) {
        out << format_timestamp(v.timestamp) << ',';
        for (std::size_t i = 0; i < v.streams.size(); ++i) {
            if (i) out << ';';
            out << v.streams[i];
        }
        out << ',' << format_double(v.score) << ',' << format_double(v.threshold) << ','
            << (v.is_anomaly ? "true" : "false") << ',' << to_string(v.taxonomy) << ','
            << to_string(v.detector) << ',' << v.config_id << '\n';
    }
}

}  // namespace sentinel
