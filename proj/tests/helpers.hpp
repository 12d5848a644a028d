#pragma once

#include "sentinel/types.hpp"

#include <random>
#include <string>

namespace sentinel::testing {

/// Fully observed frame on a regular grid with the given values.
inline AlignedFrame make_frame(const Matrix& values, Timestamp start = 0, Timestamp period = 60) {
    AlignedFrame f;
    f.period = period;
    f.values = values;
    f.mask = MaskMatrix::Constant(values.rows(), values.cols(), true);
    for (Index j = 0; j < values.cols(); ++j) f.columns.push_back("t/s" + std::to_string(j));
    for (Index i = 0; i < values.rows(); ++i) f.grid.push_back(start + i * period);
    return f;
}

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng, Scalar lo = -10.0,
                            Scalar hi = 10.0) {
    std::uniform_real_distribution<Scalar> dist(lo, hi);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
    }
    return m;
}

inline std::string temp_path(const std::string& name) {
    return "/tmp/sentinel-test-" + name;
}

}  // namespace sentinel::testing
