#pragma once

#include "sentinel/types.hpp"

#include <span>
#include <tuple>

namespace sentinel {

enum class ScalerKind { Standard, MinMax };

std::string to_string(ScalerKind k);
ScalerKind scaler_kind_from_string(const std::string& s);

/// Per-column scaling parameters, fit on training data and frozen afterwards.
/// Standard: (d - mean) / sd with population sd. MinMax: (d - min) / (max - min).
struct FittedScaler {
    ScalerKind kind = ScalerKind::Standard;
    std::vector<std::string> columns;
    Vector mean;   // standard
    Vector sd;     // standard (population)
    Vector min;    // minmax
    Vector max;    // minmax
};

FittedScaler fit_scaler(const AlignedFrame& frame, ScalerKind kind);
AlignedFrame apply_scaler(const AlignedFrame& frame, const FittedScaler& scaler);
AlignedFrame invert_scaler(const AlignedFrame& frame, const FittedScaler& scaler);

enum class ReductionKind { Average, Sd, Mad, Kurtosis, Skewness };

std::string to_string(ReductionKind k);
ReductionKind reduction_kind_from_string(const std::string& s);

/// Data-pass counter, filled in by reduce() so tests can check that average
/// runs in one pass while the moment-based reductions need the mean first.
struct ReduceStats {
    int passes = 0;
};

/// Collapse one multivariate sample to a single value. Kurtosis is non-excess
/// unless excess_kurtosis is set. MAD is median(|x - median(x)|).
Scalar reduce(std::span<const Scalar> sample, ReductionKind kind,
              ReduceStats* stats = nullptr, bool excess_kurtosis = false);

/// Row-wise reduction of a frame into a univariate frame (one column named
/// after the reduction). Rows with any missing cell are skipped.
AlignedFrame reduce_frame(const AlignedFrame& frame, ReductionKind kind);

enum class TransformKind { AtanNorm, GaussianScore };

/// atan_norm(x) = arctan(x / scale) * 2/pi, optionally remapped from [-1,1]
/// to [0,1] for signed streams. gaussian_score(x) = exp(-(x-mu)^2 / (2 sigma^2)).
struct TransformSpec {
    TransformKind kind = TransformKind::AtanNorm;
    Scalar atan_scale = 1.0;
    bool map_signed = false;
    Scalar mu = 0.0;
    Scalar sigma = 1.0;
};

Scalar transform_value(Scalar x, const TransformSpec& spec);
AlignedFrame transform(const AlignedFrame& frame, const TransformSpec& spec);

/// Fit gaussian_score params (mu, sigma) from a frame column.
TransformSpec fit_gaussian(const AlignedFrame& frame, const std::string& column);

/// Day/night split: a row is daytime iff source value > threshold.
std::tuple<ConditionMask, AlignedFrame, AlignedFrame>
split_condition(const AlignedFrame& frame, const std::string& source_stream, Scalar threshold);

/// Sliding windows over a frame: N = R - T, window i = rows [i, i+T).
WindowTensor to_windows(const AlignedFrame& frame, Index time_steps);

}  // namespace sentinel
