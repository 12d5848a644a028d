#pragma once

#include "sentinel/types.hpp"

#include <cstdint>

namespace sentinel {

struct IsolationForestParams {
    int tree_count = 100;
    int subsample_size = 256;
    std::uint64_t seed = 0;
};

/// Flat-array isolation tree node. Leaves have feature == -1 and carry the
/// number of training points that reached them.
struct IsolationNode {
    int feature = -1;
    Scalar split = 0.0;
    int left = -1;
    int right = -1;
    int size = 0;
};

struct IsolationTree {
    std::vector<IsolationNode> nodes;

    Scalar path_length(const Vector& row) const;
};

/// Average unsuccessful-search path length c(n); normalizes path lengths in
/// the anomaly score.
Scalar average_path_length(Scalar n);

class IsolationForestModel {
public:
    static IsolationForestModel fit(const Matrix& data, const IsolationForestParams& params);

    /// Anomaly score in (0, 1]: 2^(-E[h(x)] / c(psi)). Scores above 0.5 are
    /// anomalous under the fixed original-algorithm cutoff.
    Scalar score(const Vector& row) const;

    Scalar mean_path_length(const Vector& row) const;

    const std::vector<IsolationTree>& trees() const { return trees_; }
    Index dim() const { return dim_; }
    int sample_size() const { return sample_size_; }
    const IsolationForestParams& params() const { return params_; }

    static constexpr Scalar kAnomalyCutoff = 0.5;

    // Used by model (de)serialization.
    IsolationForestModel(std::vector<IsolationTree> trees, Index dim, int sample_size,
                         IsolationForestParams params)
        : trees_(std::move(trees)), dim_(dim), sample_size_(sample_size), params_(params) {}

private:
    std::vector<IsolationTree> trees_;
    Index dim_ = 0;
    int sample_size_ = 0;
    IsolationForestParams params_;
};

}  // namespace sentinel
