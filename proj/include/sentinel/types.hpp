#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace sentinel {

using Scalar = double;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using MaskMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
using Index = Eigen::Index;

// Seconds since the Unix epoch, UTC. Sub-second jitter is resolved at ingestion.
using Timestamp = std::int64_t;

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class EdgeProcess { None, Atan, Scale, Gaussian };

std::string to_string(EdgeProcess p);
EdgeProcess edge_process_from_string(const std::string& s);

struct SensorReading {
    Timestamp timestamp = 0;
    std::string device_id;
    std::string topic;
    std::string stream;
    Scalar value = 0.0;
    bool missing = false;
};

struct InventoryEntry {
    std::string device_id;
    std::string topic;
    std::string stream;
    bool unique_sensor = false;
    EdgeProcess edge_process = EdgeProcess::None;
};

/// Table of configured (device, topic, stream) triples. Duplicate
/// (topic, stream) pairs are rejected at construction.
class StreamInventory {
public:
    StreamInventory() = default;
    explicit StreamInventory(std::vector<InventoryEntry> entries);

    const std::vector<InventoryEntry>& entries() const { return entries_; }
    std::size_t stream_count() const { return entries_.size(); }
    std::size_t unique_sensor_count() const;
    bool contains(const std::string& topic, const std::string& stream) const;

    /// Stream counts grouped by device, in first-seen device order.
    std::vector<std::pair<std::string, std::size_t>> per_device_counts() const;

private:
    std::vector<InventoryEntry> entries_;
};

/// Stream identifier used as a frame column: "topic/stream".
std::string column_id(const std::string& topic, const std::string& stream);

/// The master table: one row per grid tick, one column per stream.
/// mask(i, j) is true where a value was observed (or forward-filled).
struct AlignedFrame {
    std::vector<Timestamp> grid;
    Timestamp period = 0;
    std::vector<std::string> columns;
    Matrix values;
    MaskMatrix mask;

    Index rows() const { return values.rows(); }
    Index cols() const { return values.cols(); }

    Index column_index(const std::string& name) const;

    /// Throws ValidationError on shape mismatch, non-increasing grid, or a
    /// non-finite observed cell.
    void validate() const;

    /// Frame restricted to the given row indices (grid spacing not preserved).
    AlignedFrame select_rows(const std::vector<Index>& idx) const;
};

/// Sliding-window view over a frame: window i covers source rows [i, i+T).
/// Holds a shared reference to the source matrix; no cells are copied.
struct WindowTensor {
    std::shared_ptr<const Matrix> source;
    std::vector<Timestamp> origin_timestamps;   // grid[i]
    std::vector<Timestamp> target_timestamps;   // grid[i + T]
    Index samples = 0;
    Index time_steps = 0;
    Index streams = 0;

    Scalar operator()(Index i, Index k, Index j) const {
        return (*source)(i + k, j);
    }

    /// T x D block for window i.
    auto window(Index i) const { return source->middleRows(i, time_steps); }

    /// The row the forecaster is asked to predict for window i.
    auto target_row(Index i) const { return source->row(i + time_steps); }
};

enum class Condition { UC, DT, NT };

std::string to_string(Condition c);
Condition condition_from_string(const std::string& s);

struct ConditionMask {
    std::vector<bool> flags;   // true = daytime
    Condition condition = Condition::UC;
    std::string source_stream;
    Scalar threshold = 0.0;
};

enum class Taxonomy { Point, Contextual, Combined };

std::string to_string(Taxonomy t);
Taxonomy taxonomy_from_string(const std::string& s);

enum class DetectorKind { IsolationForest, Ocsvm, ConvForecaster, RecurrentForecaster };

std::string to_string(DetectorKind k);
DetectorKind detector_kind_from_string(const std::string& s);

struct AnomalyVerdict {
    Timestamp timestamp = 0;
    std::vector<std::string> streams;
    Scalar score = 0.0;
    Scalar threshold = 0.0;
    bool is_anomaly = false;
    Taxonomy taxonomy = Taxonomy::Point;
    DetectorKind detector = DetectorKind::IsolationForest;
    std::string config_id;
};

}  // namespace sentinel
