#include "sentinel/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace sentinel {

std::string to_string(EdgeProcess p) {
    switch (p) {
        case EdgeProcess::None: return "none";
        case EdgeProcess::Atan: return "atan";
        case EdgeProcess::Scale: return "scale";
        case EdgeProcess::Gaussian: return "gaussian";
    }
    return "none";
}

EdgeProcess edge_process_from_string(const std::string& s) {
    if (s == "none") return EdgeProcess::None;
    if (s == "atan") return EdgeProcess::Atan;
    if (s == "scale") return EdgeProcess::Scale;
    if (s == "gaussian") return EdgeProcess::Gaussian;
    throw ParseError("unknown edge process: " + s);
}

StreamInventory::StreamInventory(std::vector<InventoryEntry> entries)
    : entries_(std::move(entries)) {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& e : entries_) {
        if (!seen.insert({e.topic, e.stream}).second) {
            throw ValidationError("duplicate inventory entry: " + column_id(e.topic, e.stream));
        }
    }
}

std::size_t StreamInventory::unique_sensor_count() const {
    return static_cast<std::size_t>(std::count_if(
        entries_.begin(), entries_.end(),
        [](const InventoryEntry& e) { return e.unique_sensor; }));
}

bool StreamInventory::contains(const std::string& topic, const std::string& stream) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const InventoryEntry& e) {
        return e.topic == topic && e.stream == stream;
    });
}

std::vector<std::pair<std::string, std::size_t>> StreamInventory::per_device_counts() const {
    std::vector<std::pair<std::string, std::size_t>> counts;
    for (const auto& e : entries_) {
        auto it = std::find_if(counts.begin(), counts.end(),
                               [&](const auto& c) { return c.first == e.device_id; });
        if (it == counts.end()) {
            counts.emplace_back(e.device_id, 1);
        } else {
            ++it->second;
        }
    }
    return counts;
}

std::string column_id(const std::string& topic, const std::string& stream) {
    return topic + "/" + stream;
}

Index AlignedFrame::column_index(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) {
        throw ValidationError("no such column: " + name);
    }
    return static_cast<Index>(it - columns.begin());
}

void AlignedFrame::validate() const {
    if (static_cast<Index>(grid.size()) != values.rows() ||
        static_cast<Index>(columns.size()) != values.cols() ||
        mask.rows() != values.rows() || mask.cols() != values.cols()) {
        throw ValidationError("frame shape mismatch");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (grid[i] <= grid[i - 1]) {
            throw ValidationError("frame grid is not strictly increasing");
        }
    }
    for (Index i = 0; i < values.rows(); ++i) {
        for (Index j = 0; j < values.cols(); ++j) {
            if (mask(i, j) && !std::isfinite(values(i, j))) {
                throw ValidationError("observed cell is not finite");
            }
        }
    }
}

AlignedFrame AlignedFrame::select_rows(const std::vector<Index>& idx) const {
    AlignedFrame out;
    out.period = period;
    out.columns = columns;
    out.grid.reserve(idx.size());
    out.values.resize(static_cast<Index>(idx.size()), values.cols());
    out.mask.resize(static_cast<Index>(idx.size()), values.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        out.grid.push_back(grid[static_cast<std::size_t>(idx[r])]);
        out.values.row(static_cast<Index>(r)) = values.row(idx[r]);
        out.mask.row(static_cast<Index>(r)) = mask.row(idx[r]);
    }
    return out;
}

std::string to_string(Condition c) {
    switch (c) {
        case Condition::UC: return "UC";
        case Condition::DT: return "DT";
        case Condition::NT: return "NT";
    }
    return "UC";
}

Condition condition_from_string(const std::string& s) {
    if (s == "UC") return Condition::UC;
    if (s == "DT") return Condition::DT;
    if (s == "NT") return Condition::NT;
    throw ParseError("unknown condition: " + s);
}

std::string to_string(Taxonomy t) {
    switch (t) {
        case Taxonomy::Point: return "point";
        case Taxonomy::Contextual: return "contextual";
        case Taxonomy::Combined: return "combined";
    }
    return "point";
}

Taxonomy taxonomy_from_string(const std::string& s) {
    if (s == "point") return Taxonomy::Point;
    if (s == "contextual") return Taxonomy::Contextual;
    if (s == "combined") return Taxonomy::Combined;
    throw ParseError("unknown taxonomy: " + s);
}

std::string to_string(DetectorKind k) {
    switch (k) {
        case DetectorKind::IsolationForest: return "isolation_forest";
        case DetectorKind::Ocsvm: return "ocsvm";
        case DetectorKind::ConvForecaster: return "conv_forecaster";
        case DetectorKind::RecurrentForecaster: return "recurrent_forecaster";
    }
    return "isolation_forest";
}

DetectorKind detector_kind_from_string(const std::string& s) {
    if (s == "isolation_forest") return DetectorKind::IsolationForest;
    if (s == "ocsvm") return DetectorKind::Ocsvm;
    if (s == "conv_forecaster") return DetectorKind::ConvForecaster;
    if (s == "recurrent_forecaster") return DetectorKind::RecurrentForecaster;
    throw ParseError("unknown detector kind: " + s);
}

}  // namespace sentinel
