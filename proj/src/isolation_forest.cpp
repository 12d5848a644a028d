#include "sentinel/isolation_forest.hpp"

#include "sentinel/util.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace sentinel {

Scalar average_path_length(Scalar n) {
    if (n <= 1.0) return 0.0;
    const Scalar harmonic = std::log(n - 1.0) + std::numbers::egamma;
    return 2.0 * harmonic - 2.0 * (n - 1.0) / n;
}

Scalar IsolationTree::path_length(const Vector& row) const {
    int node = 0;
    Scalar depth = 0.0;
    while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const auto& nd = nodes[static_cast<std::size_t>(node)];
        node = row(nd.feature) < nd.split ? nd.left : nd.right;
        depth += 1.0;
    }
    return depth + average_path_length(static_cast<Scalar>(nodes[static_cast<std::size_t>(node)].size));
}

namespace {

struct TreeBuilder {
    const Matrix& data;
    std::mt19937_64 rng;
    int height_limit;
    std::vector<IsolationNode> nodes;

    // Returns node id. `idx[lo, hi)` is the point set for this node.
    int build(std::vector<int>& idx, int lo, int hi, int depth) {
        const int id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        const int count = hi - lo;
        if (count <= 1 || depth >= height_limit) {
            nodes[static_cast<std::size_t>(id)].size = count;
            return id;
        }

        // Pick a random column with nonzero range; give up after trying all.
        const Index d = data.cols();
        std::vector<Index> cols(static_cast<std::size_t>(d));
        std::iota(cols.begin(), cols.end(), Index{0});
        std::shuffle(cols.begin(), cols.end(), rng);
        Index feature = -1;
        Scalar lo_v = 0, hi_v = 0;
        for (Index j : cols) {
            lo_v = hi_v = data(idx[static_cast<std::size_t>(lo)], j);
            for (int k = lo + 1; k < hi; ++k) {
                Scalar v = data(idx[static_cast<std::size_t>(k)], j);
                lo_v = std::min(lo_v, v);
                hi_v = std::max(hi_v, v);
            }
            if (hi_v > lo_v) {
                feature = j;
                break;
            }
        }
        if (feature < 0) {
            // All remaining points identical; degenerate leaf.
            nodes[static_cast<std::size_t>(id)].size = count;
            return id;
        }

        std::uniform_real_distribution<Scalar> dist(lo_v, hi_v);
        const Scalar split = dist(rng);
        auto mid_it = std::partition(idx.begin() + lo, idx.begin() + hi, [&](int r) {
            return data(r, feature) < split;
        });
        const int mid = static_cast<int>(mid_it - idx.begin());
        // A split drawn strictly inside (lo_v, hi_v) always separates at
        // least one point on each side.
        const int left = build(idx, lo, mid, depth + 1);
        const int right = build(idx, mid, hi, depth + 1);
        auto& nd = nodes[static_cast<std::size_t>(id)];
        nd.feature = static_cast<int>(feature);
        nd.split = split;
        nd.left = left;
        nd.right = right;
        nd.size = count;
        return id;
    }
};

}  // namespace

IsolationForestModel IsolationForestModel::fit(const Matrix& data,
                                               const IsolationForestParams& params) {
    if (data.rows() < 2) throw ValidationError("isolation forest requires at least 2 rows");
    if (params.tree_count < 1 || params.subsample_size < 2) {
        throw ValidationError("isolation forest params out of range");
    }
    const int n = static_cast<int>(data.rows());
    const int psi = std::min(params.subsample_size, n);
    const int height_limit = static_cast<int>(std::ceil(std::log2(static_cast<Scalar>(psi))));

    std::vector<IsolationTree> trees;
    trees.reserve(static_cast<std::size_t>(params.tree_count));
    for (int t = 0; t < params.tree_count; ++t) {
        std::mt19937_64 rng(derive_seed(params.seed, "isolation-tree", static_cast<std::uint64_t>(t)));

        // Uniform subsample without replacement.
        std::vector<int> all(static_cast<std::size_t>(n));
        std::iota(all.begin(), all.end(), 0);
        std::shuffle(all.begin(), all.end(), rng);
        std::vector<int> idx(all.begin(), all.begin() + psi);

        TreeBuilder builder{data, std::move(rng), height_limit, {}};
        builder.build(idx, 0, psi, 0);
        trees.push_back(IsolationTree{std::move(builder.nodes)});
    }
    return IsolationForestModel(std::move(trees), data.cols(), psi, params);
}

Scalar IsolationForestModel::mean_path_length(const Vector& row) const {
    if (row.size() != dim_) throw ValidationError("row width does not match training width");
    Scalar total = 0.0;
    for (const auto& tree : trees_) total += tree.path_length(row);
    return total / static_cast<Scalar>(trees_.size());
}

Scalar IsolationForestModel::score(const Vector& row) const {
    const Scalar e_h = mean_path_length(row);
    const Scalar c = average_path_length(static_cast<Scalar>(sample_size_));
    if (c <= 0) return 1.0;
    return std::pow(2.0, -e_h / c);
}

}  // namespace sentinel
