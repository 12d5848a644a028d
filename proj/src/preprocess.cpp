#include "sentinel/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace sentinel {

std::string to_string(ScalerKind k) {
    return k == ScalerKind::Standard ? "standard" : "minmax";
}

ScalerKind scaler_kind_from_string(const std::string& s) {
    if (s == "standard") return ScalerKind::Standard;
    if (s == "minmax") return ScalerKind::MinMax;
    throw ParseError("unknown scaler kind: " + s);
}

FittedScaler fit_scaler(const AlignedFrame& frame, ScalerKind kind) {
    if (frame.rows() < 2) throw ValidationError("fit_scaler requires at least 2 rows");
    FittedScaler sc;
    sc.kind = kind;
    sc.columns = frame.columns;
    const Index d = frame.cols();
    sc.mean.resize(d);
    sc.sd.resize(d);
    sc.min.resize(d);
    sc.max.resize(d);
    for (Index j = 0; j < d; ++j) {
        Scalar sum = 0, lo = 0, hi = 0;
        Index n = 0;
        for (Index i = 0; i < frame.rows(); ++i) {
            if (!frame.mask(i, j)) continue;
            Scalar v = frame.values(i, j);
            if (n == 0) {
                lo = hi = v;
            } else {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            sum += v;
            ++n;
        }
        if (n < 2) throw ValidationError("column has fewer than 2 observed cells: " + frame.columns[static_cast<std::size_t>(j)]);
        Scalar mean = sum / static_cast<Scalar>(n);
        Scalar ss = 0;
        for (Index i = 0; i < frame.rows(); ++i) {
            if (!frame.mask(i, j)) continue;
            Scalar dmu = frame.values(i, j) - mean;
            ss += dmu * dmu;
        }
        Scalar sd = std::sqrt(ss / static_cast<Scalar>(n));
        if (kind == ScalerKind::Standard && sd <= 0) {
            throw ValidationError("degenerate column (zero variance): " + frame.columns[static_cast<std::size_t>(j)]);
        }
        if (kind == ScalerKind::MinMax && hi <= lo) {
            throw ValidationError("degenerate column (zero range): " + frame.columns[static_cast<std::size_t>(j)]);
        }
        sc.mean(j) = mean;
        sc.sd(j) = sd;
        sc.min(j) = lo;
        sc.max(j) = hi;
    }
    return sc;
}

namespace {

void check_columns(const AlignedFrame& frame, const FittedScaler& scaler) {
    if (frame.columns != scaler.columns) {
        throw ValidationError("frame columns do not match fitted scaler columns");
    }
}

}  // namespace

AlignedFrame apply_scaler(const AlignedFrame& frame, const FittedScaler& scaler) {
    check_columns(frame, scaler);
    AlignedFrame out = frame;
    for (Index j = 0; j < out.cols(); ++j) {
        for (Index i = 0; i < out.rows(); ++i) {
            if (!out.mask(i, j)) continue;
            if (scaler.kind == ScalerKind::Standard) {
                out.values(i, j) = (out.values(i, j) - scaler.mean(j)) / scaler.sd(j);
            } else {
                out.values(i, j) = (out.values(i, j) - scaler.min(j)) / (scaler.max(j) - scaler.min(j));
            }
        }
    }
    return out;
}

AlignedFrame invert_scaler(const AlignedFrame& frame, const FittedScaler& scaler) {
    check_columns(frame, scaler);
    AlignedFrame out = frame;
    for (Index j = 0; j < out.cols(); ++j) {
        for (Index i = 0; i < out.rows(); ++i) {
            if (!out.mask(i, j)) continue;
            if (scaler.kind == ScalerKind::Standard) {
                out.values(i, j) = out.values(i, j) * scaler.sd(j) + scaler.mean(j);
            } else {
                out.values(i, j) = out.values(i, j) * (scaler.max(j) - scaler.min(j)) + scaler.min(j);
            }
        }
    }
    return out;
}

std::string to_string(ReductionKind k) {
    switch (k) {
        case ReductionKind::Average: return "average";
        case ReductionKind::Sd: return "sd";
        case ReductionKind::Mad: return "mad";
        case ReductionKind::Kurtosis: return "kurtosis";
        case ReductionKind::Skewness: return "skewness";
    }
    return "average";
}

ReductionKind reduction_kind_from_string(const std::string& s) {
    if (s == "average") return ReductionKind::Average;
    if (s == "sd") return ReductionKind::Sd;
    if (s == "mad") return ReductionKind::Mad;
    if (s == "kurtosis") return ReductionKind::Kurtosis;
    if (s == "skewness") return ReductionKind::Skewness;
    throw ParseError("unknown reduction kind: " + s);
}

namespace {

Scalar median_of(std::vector<Scalar> v) {
    const std::size_t n = v.size();
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) return *mid;
    Scalar hi = *mid;
    Scalar lo = *std::max_element(v.begin(), mid);
    return (lo + hi) / 2;
}

}  // namespace

Scalar reduce(std::span<const Scalar> sample, ReductionKind kind,
              ReduceStats* stats, bool excess_kurtosis) {
    if (sample.empty()) throw ValidationError("reduce: empty sample");
    const Scalar n = static_cast<Scalar>(sample.size());
    auto count_pass = [&] { if (stats) ++stats->passes; };

    if (kind == ReductionKind::Average) {
        count_pass();
        Scalar sum = 0;
        for (Scalar x : sample) sum += x;
        return sum / n;
    }

    if (kind == ReductionKind::Mad) {
        count_pass();
        std::vector<Scalar> v(sample.begin(), sample.end());
        Scalar med = median_of(v);
        count_pass();
        for (Scalar& x : v) x = std::abs(x - med);
        return median_of(std::move(v));
    }

    // Moment reductions: mean first, then centred moments.
    count_pass();
    Scalar sum = 0;
    for (Scalar x : sample) sum += x;
    const Scalar mean = sum / n;

    count_pass();
    Scalar m2 = 0, m3 = 0, m4 = 0;
    for (Scalar x : sample) {
        Scalar d = x - mean;
        Scalar d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    const Scalar sigma = std::sqrt(m2);

    if (kind == ReductionKind::Sd) return sigma;
    if (sigma <= 0) throw ValidationError("degenerate sample (zero variance)");
    if (kind == ReductionKind::Kurtosis) {
        Scalar k = m4 / (m2 * m2);
        return excess_kurtosis ? k - 3.0 : k;
    }
    return m3 / (sigma * sigma * sigma);  // Skewness
}

AlignedFrame reduce_frame(const AlignedFrame& frame, ReductionKind kind) {
    AlignedFrame out;
    out.period = frame.period;
    out.columns = {to_string(kind)};
    std::vector<Timestamp> grid;
    std::vector<Scalar> vals;
    std::vector<Scalar> row(static_cast<std::size_t>(frame.cols()));
    for (Index i = 0; i < frame.rows(); ++i) {
        if (!frame.mask.row(i).all()) continue;
        for (Index j = 0; j < frame.cols(); ++j) row[static_cast<std::size_t>(j)] = frame.values(i, j);
        grid.push_back(frame.grid[static_cast<std::size_t>(i)]);
        vals.push_back(reduce(row, kind));
    }
    out.grid = std::move(grid);
    out.values.resize(static_cast<Index>(vals.size()), 1);
    out.mask.resize(static_cast<Index>(vals.size()), 1);
    for (Index i = 0; i < out.values.rows(); ++i) {
        out.values(i, 0) = vals[static_cast<std::size_t>(i)];
        out.mask(i, 0) = true;
    }
    return out;
}

Scalar transform_value(Scalar x, const TransformSpec& spec) {
    if (spec.kind == TransformKind::AtanNorm) {
        if (spec.atan_scale <= 0) throw ValidationError("atan scale must be positive");
        Scalar v = std::atan(x / spec.atan_scale) * (2.0 / std::numbers::pi);
        v = std::clamp(v, -1.0, 1.0);
        return spec.map_signed ? (v + 1.0) / 2.0 : v;
    }
    if (spec.sigma <= 0) throw ValidationError("gaussian sigma must be positive");
    Scalar d = x - spec.mu;
    return std::exp(-(d * d) / (2.0 * spec.sigma * spec.sigma));
}

AlignedFrame transform(const AlignedFrame& frame, const TransformSpec& spec) {
    AlignedFrame out = frame;
    for (Index i = 0; i < out.rows(); ++i) {
        for (Index j = 0; j < out.cols(); ++j) {
            if (out.mask(i, j)) out.values(i, j) = transform_value(out.values(i, j), spec);
        }
    }
    return out;
}

TransformSpec fit_gaussian(const AlignedFrame& frame, const std::string& column) {
    const Index j = frame.column_index(column);
    Scalar sum = 0;
    Index n = 0;
    for (Index i = 0; i < frame.rows(); ++i) {
        if (!frame.mask(i, j)) continue;
        sum += frame.values(i, j);
        ++n;
    }
    if (n < 2) throw ValidationError("fit_gaussian needs at least 2 observed cells");
    Scalar mu = sum / static_cast<Scalar>(n);
    Scalar ss = 0;
    for (Index i = 0; i < frame.rows(); ++i) {
        if (!frame.mask(i, j)) continue;
        Scalar d = frame.values(i, j) - mu;
        ss += d * d;
    }
    Scalar sigma = std::sqrt(ss / static_cast<Scalar>(n));
    if (sigma <= 0) throw ValidationError("degenerate column for gaussian fit: " + column);
    TransformSpec spec;
    spec.kind = TransformKind::GaussianScore;
    spec.mu = mu;
    spec.sigma = sigma;
    return spec;
}

std::tuple<ConditionMask, AlignedFrame, AlignedFrame>
split_condition(const AlignedFrame& frame, const std::string& source_stream, Scalar threshold) {
    const Index j = frame.column_index(source_stream);
    ConditionMask mask;
    mask.source_stream = source_stream;
    mask.threshold = threshold;
    mask.flags.resize(static_cast<std::size_t>(frame.rows()));
    std::vector<Index> dt, nt;
    for (Index i = 0; i < frame.rows(); ++i) {
        bool day = frame.mask(i, j) && frame.values(i, j) > threshold;
        mask.flags[static_cast<std::size_t>(i)] = day;
        (day ? dt : nt).push_back(i);
    }
    AlignedFrame dt_frame = frame.select_rows(dt);
    AlignedFrame nt_frame = frame.select_rows(nt);
    ConditionMask dt_mask = mask;
    dt_mask.condition = Condition::DT;
    return {dt_mask, std::move(dt_frame), std::move(nt_frame)};
}

WindowTensor to_windows(const AlignedFrame& frame, Index time_steps) {
    if (time_steps < 1) throw ValidationError("time_steps must be >= 1");
    if (frame.rows() <= time_steps) {
        throw ValidationError("insufficient rows: need R > T, have R=" +
                              std::to_string(frame.rows()) + " T=" + std::to_string(time_steps));
    }
    WindowTensor wt;
    wt.source = std::make_shared<Matrix>(frame.values);
    wt.samples = frame.rows() - time_steps;
    wt.time_steps = time_steps;
    wt.streams = frame.cols();
    wt.origin_timestamps.reserve(static_cast<std::size_t>(wt.samples));
    wt.target_timestamps.reserve(static_cast<std::size_t>(wt.samples));
    for (Index i = 0; i < wt.samples; ++i) {
        wt.origin_timestamps.push_back(frame.grid[static_cast<std::size_t>(i)]);
        wt.target_timestamps.push_back(frame.grid[static_cast<std::size_t>(i + time_steps)]);
    }
    return wt;
}

}  // namespace sentinel
