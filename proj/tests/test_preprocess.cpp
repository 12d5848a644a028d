#include "sentinel/preprocess.hpp"

#include <doctest.h>

#include "helpers.hpp"

#include <array>
#include <cmath>
#include <random>

using namespace sentinel;
using sentinel::testing::make_frame;
using sentinel::testing::random_matrix;

TEST_CASE("standard scaler uses population statistics") {
    Matrix m(3, 1);
    m << 1, 2, 3;
    AlignedFrame f = make_frame(m);
    FittedScaler s = fit_scaler(f, ScalerKind::Standard);
    CHECK(s.mean(0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(s.sd(0) == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-15));
    AlignedFrame scaled = apply_scaler(f, s);
    CHECK(scaled.values(0, 0) == doctest::Approx(-1.0 / std::sqrt(2.0 / 3.0)).epsilon(1e-12));
    CHECK(scaled.values(1, 0) == doctest::Approx(0.0));
}

TEST_CASE("minmax scaler maps the fitted range to [0, 1]") {
    Matrix m(3, 2);
    m << -2, 10, 0, 20, 2, 40;
    AlignedFrame f = make_frame(m);
    FittedScaler s = fit_scaler(f, ScalerKind::MinMax);
    AlignedFrame scaled = apply_scaler(f, s);
    CHECK(scaled.values(0, 0) == doctest::Approx(0.0));
    CHECK(scaled.values(2, 0) == doctest::Approx(1.0));
    CHECK(scaled.values(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("scaler fits on observed cells only") {
    Matrix m(4, 1);
    m << 1, 2, 3, 1000;
    AlignedFrame f = make_frame(m);
    f.mask(3, 0) = false;  // the outlier is missing, it must not shift the fit
    FittedScaler s = fit_scaler(f, ScalerKind::Standard);
    CHECK(s.mean(0) == doctest::Approx(2.0));
}

TEST_CASE("scaler round-trips on random frames") {
    std::mt19937_64 rng(42);
    for (int rep = 0; rep < 20; ++rep) {
        AlignedFrame f = make_frame(random_matrix(30, 4, rng));
        for (ScalerKind kind : {ScalerKind::Standard, ScalerKind::MinMax}) {
            FittedScaler s = fit_scaler(f, kind);
            AlignedFrame back = invert_scaler(apply_scaler(f, s), s);
            CHECK((back.values - f.values).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("scaler is frozen: applying to new data reuses training parameters") {
    Matrix train(2, 1), test(2, 1);
    train << 0, 10;
    test << 20, -20;
    FittedScaler s = fit_scaler(make_frame(train), ScalerKind::MinMax);
    AlignedFrame out = apply_scaler(make_frame(test), s);
    CHECK(out.values(0, 0) == doctest::Approx(2.0));   // outside [0,1]: frozen fit
    CHECK(out.values(1, 0) == doctest::Approx(-2.0));
}

TEST_CASE("degenerate columns are rejected by name") {
    Matrix m(3, 2);
    m << 1, 5, 2, 5, 3, 5;
    AlignedFrame f = make_frame(m);
    for (ScalerKind kind : {ScalerKind::Standard, ScalerKind::MinMax}) {
        try {
            fit_scaler(f, kind);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("t/s1") != std::string::npos);
        }
    }
}

TEST_CASE("scaler column mismatch is rejected") {
    FittedScaler s = fit_scaler(make_frame(Matrix::Random(3, 2)), ScalerKind::Standard);
    AlignedFrame other = make_frame(Matrix::Random(3, 3));
    CHECK_THROWS_AS(apply_scaler(other, s), ValidationError);
}

TEST_CASE("reductions match hand-computed oracles") {
    // sample [1,2,3,4]: mean 2.5, m2 = 1.25, m3 = 0, m4 = 2.5625
    const std::array<Scalar, 4> x = {1, 2, 3, 4};
    CHECK(reduce(x, ReductionKind::Average) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(reduce(x, ReductionKind::Sd) == doctest::Approx(std::sqrt(1.25)).epsilon(1e-15));
    // abs deviations from median 2.5: [1.5, 0.5, 0.5, 1.5] -> median 1.0
    CHECK(reduce(x, ReductionKind::Mad) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(reduce(x, ReductionKind::Skewness) == doctest::Approx(0.0));
    CHECK(reduce(x, ReductionKind::Kurtosis) == doctest::Approx(2.5625 / 1.5625).epsilon(1e-12));
    CHECK(reduce(x, ReductionKind::Kurtosis, nullptr, true) ==
          doctest::Approx(2.5625 / 1.5625 - 3.0).epsilon(1e-12));

    // asymmetric sample [1,1,4]: m2 = 2, m3 = 2 -> skew = 2 / 2^1.5
    const std::array<Scalar, 3> y = {1, 1, 4};
    CHECK(reduce(y, ReductionKind::Skewness) ==
          doctest::Approx(2.0 / std::pow(2.0, 1.5)).epsilon(1e-12));
}

TEST_CASE("odd-length MAD uses the exact middle element") {
    const std::array<Scalar, 5> x = {1, 3, 5, 9, 20};
    // median 5; abs devs [4,2,0,4,15] -> median 4
    CHECK(reduce(x, ReductionKind::Mad) == doctest::Approx(4.0));
}

TEST_CASE("average is one pass, the rest need a second") {
    const std::array<Scalar, 4> x = {1, 2, 3, 4};
    ReduceStats st;
    reduce(x, ReductionKind::Average, &st);
    CHECK(st.passes == 1);
    for (auto k : {ReductionKind::Sd, ReductionKind::Mad, ReductionKind::Kurtosis,
                   ReductionKind::Skewness}) {
        ReduceStats s2;
        reduce(x, k, &s2);
        CHECK(s2.passes == 2);
    }
}

TEST_CASE("moment reductions reject constant samples") {
    const std::array<Scalar, 3> x = {2, 2, 2};
    CHECK_THROWS_AS(reduce(x, ReductionKind::Kurtosis), ValidationError);
    CHECK_THROWS_AS(reduce(x, ReductionKind::Skewness), ValidationError);
    CHECK(reduce(x, ReductionKind::Sd) == doctest::Approx(0.0));
}

TEST_CASE("reduce_frame collapses rows and skips incomplete ones") {
    Matrix m(3, 4);
    m << 1, 2, 3, 4, 5, 5, 5, 5, 0, 0, 10, 10;
    AlignedFrame f = make_frame(m);
    f.mask(1, 2) = false;
    AlignedFrame out = reduce_frame(f, ReductionKind::Average);
    REQUIRE(out.cols() == 1);
    CHECK(out.columns[0] == "average");
    REQUIRE(out.rows() == 2);
    CHECK(out.values(0, 0) == doctest::Approx(2.5));
    CHECK(out.values(1, 0) == doctest::Approx(5.0));
    CHECK(out.grid == std::vector<Timestamp>{0, 120});
}

TEST_CASE("atan normalization") {
    TransformSpec spec;
    spec.kind = TransformKind::AtanNorm;
    spec.atan_scale = 4.0;
    CHECK(transform_value(4.0, spec) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(transform_value(0.0, spec) == doctest::Approx(0.0));
    CHECK(transform_value(-4.0, spec) == doctest::Approx(-0.5).epsilon(1e-15));
    spec.map_signed = true;
    CHECK(transform_value(-4.0, spec) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(transform_value(1e12, spec) < 1.0);
    CHECK(transform_value(1e12, spec) > 0.99);
}

TEST_CASE("gaussian score peaks at the mean") {
    TransformSpec spec;
    spec.kind = TransformKind::GaussianScore;
    spec.mu = 3.0;
    spec.sigma = 2.0;
    CHECK(transform_value(3.0, spec) == doctest::Approx(1.0));
    CHECK(transform_value(5.0, spec) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
    CHECK(transform_value(1.0, spec) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
}

TEST_CASE("fit_gaussian picks up column mean and sd") {
    Matrix m(3, 1);
    m << 1, 2, 3;
    TransformSpec spec = fit_gaussian(make_frame(m), "t/s0");
    CHECK(spec.mu == doctest::Approx(2.0));
    CHECK(spec.sigma == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("day/night split partitions rows on a strict threshold") {
    Matrix m(4, 2);
    m << 0.2, 1, 0.6, 2, 0.5, 3, 0.9, 4;
    AlignedFrame f = make_frame(m);
    auto [mask, dt, nt] = split_condition(f, "t/s0", 0.5);
    CHECK(mask.flags == std::vector<bool>{false, true, false, true});  // strict >
    CHECK(dt.rows() + nt.rows() == f.rows());
    CHECK(dt.rows() == 2);
    CHECK(dt.values(0, 1) == 2);
    CHECK(nt.values(1, 1) == 3);
    CHECK(mask.source_stream == "t/s0");
}

TEST_CASE("windowing produces R - T samples that alias the frame") {
    std::mt19937_64 rng(7);
    AlignedFrame f = make_frame(random_matrix(20, 3, rng));
    WindowTensor w = to_windows(f, 6);
    CHECK(w.samples == 14);
    CHECK(w.time_steps == 6);
    CHECK(w.streams == 3);
    for (Index i : {Index{0}, Index{5}, Index{13}}) {
        CHECK(w.origin_timestamps[static_cast<std::size_t>(i)] == f.grid[static_cast<std::size_t>(i)]);
        CHECK(w.target_timestamps[static_cast<std::size_t>(i)] ==
              f.grid[static_cast<std::size_t>(i) + 6]);
        for (Index k = 0; k < 6; ++k) {
            for (Index j = 0; j < 3; ++j) CHECK(w(i, k, j) == f.values(i + k, j));
        }
        CHECK((w.target_row(i).transpose() - f.values.row(i + 6).transpose()).norm() == 0.0);
    }
}

TEST_CASE("windowing rejects frames shorter than T + 1 rows") {
    AlignedFrame f = make_frame(Matrix::Random(5, 2));
    CHECK_THROWS_AS(to_windows(f, 5), ValidationError);
    CHECK(to_windows(f, 4).samples == 1);
}
