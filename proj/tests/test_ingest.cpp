#include "sentinel/ingest.hpp"

#include <doctest.h>

#include "helpers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

using namespace sentinel;

namespace {

SensorReading reading(Timestamp ts, const std::string& topic, const std::string& stream,
                      Scalar value) {
    SensorReading r;
    r.timestamp = ts;
    r.device_id = "dev";
    r.topic = topic;
    r.stream = stream;
    r.value = value;
    return r;
}

StreamInventory two_stream_inventory() {
    return StreamInventory({
        {"dev", "a", "x", true, EdgeProcess::None},
        {"dev", "b", "y", true, EdgeProcess::None},
    });
}

// Independent re-alignment: stable-sort by timestamp, last write wins per
// tick, then bounded forward fill.
AlignedFrame oracle_align(std::vector<SensorReading> readings, const IngestConfig& cfg,
                          const std::vector<std::string>& columns) {
    std::stable_sort(readings.begin(), readings.end(),
                     [](const SensorReading& a, const SensorReading& b) {
                         return a.timestamp < b.timestamp;
                     });
    const Timestamp p = cfg.grid_period;
    Timestamp lo = readings.front().timestamp, hi = readings.front().timestamp;
    for (const auto& r : readings) {
        lo = std::min(lo, r.timestamp);
        hi = std::max(hi, r.timestamp);
    }
    const Timestamp start = (lo >= 0 ? lo / p : (lo - p + 1) / p) * p;
    const Index rows = static_cast<Index>((hi - start) / p) + 1;
    AlignedFrame f;
    f.period = p;
    f.columns = columns;
    f.values = Matrix::Constant(rows, static_cast<Index>(columns.size()),
                                std::numeric_limits<Scalar>::quiet_NaN());
    f.mask = MaskMatrix::Constant(rows, static_cast<Index>(columns.size()), false);
    for (Index i = 0; i < rows; ++i) f.grid.push_back(start + i * p);
    for (const auto& r : readings) {
        const Index row = static_cast<Index>((r.timestamp - start) / p);
        const auto it = std::find(columns.begin(), columns.end(), column_id(r.topic, r.stream));
        const Index col = static_cast<Index>(it - columns.begin());
        f.values(row, col) = r.value;
        f.mask(row, col) = true;
    }
    for (Index j = 0; j < f.cols(); ++j) {
        int age = 0;
        Scalar last = 0.0;
        bool have = false;
        for (Index i = 0; i < rows; ++i) {
            if (f.mask(i, j)) {
                last = f.values(i, j);
                have = true;
                age = 0;
            } else if (have && ++age <= cfg.max_gap_fill) {
                f.values(i, j) = last;
                f.mask(i, j) = true;
            }
        }
    }
    if (cfg.drop_incomplete_rows) {
        std::vector<Index> keep;
        for (Index i = 0; i < rows; ++i) {
            if (f.mask.row(i).all()) keep.push_back(i);
        }
        f = f.select_rows(keep);
        f.period = p;
    }
    return f;
}

}  // namespace

TEST_CASE("clean drops null and non-finite readings in order") {
    std::vector<SensorReading> rs = {
        reading(1, "a", "x", 1.0),
        reading(2, "a", "x", std::numeric_limits<Scalar>::infinity()),
        reading(3, "a", "x", std::nan("")),
        reading(4, "a", "x", 2.0),
    };
    rs.push_back(reading(5, "a", "x", 0.0));
    rs.back().missing = true;
    CleanResult out = clean(rs);
    CHECK(out.dropped == 3);
    REQUIRE(out.readings.size() == 2);
    CHECK(out.readings[0].timestamp == 1);
    CHECK(out.readings[1].timestamp == 4);
}

TEST_CASE("alignment snaps to the grid with last-write-wins ticks") {
    IngestConfig cfg;
    cfg.grid_period = 60;
    cfg.max_gap_fill = 0;
    cfg.drop_incomplete_rows = false;
    std::vector<SensorReading> rs = {
        reading(125, "a", "x", 1.0),
        reading(130, "b", "y", 5.0),
        reading(131, "a", "x", 2.0),  // same tick, later timestamp wins
        reading(185, "a", "x", 3.0),
    };
    AlignedFrame f = align(rs, cfg, two_stream_inventory());
    CHECK(f.columns == std::vector<std::string>{"a/x", "b/y"});
    CHECK(f.grid.front() == 120);
    CHECK(f.values(0, 0) == 2.0);
    CHECK(f.values(0, 1) == 5.0);
    CHECK(f.values(1, 0) == 3.0);
    CHECK_FALSE(f.mask(1, 1));
}

TEST_CASE("within one tick, input order breaks timestamp ties") {
    IngestConfig cfg;
    cfg.grid_period = 60;
    cfg.drop_incomplete_rows = false;
    std::vector<SensorReading> rs = {
        reading(100, "a", "x", 1.0),
        reading(100, "a", "x", 9.0),
    };
    StreamInventory inv({{"dev", "a", "x", true, EdgeProcess::None}});
    CHECK(align(rs, cfg, inv).values(0, 0) == 9.0);
}

TEST_CASE("forward fill is bounded") {
    IngestConfig cfg;
    cfg.grid_period = 10;
    cfg.max_gap_fill = 2;
    cfg.drop_incomplete_rows = false;
    std::vector<SensorReading> rs = {
        reading(0, "a", "x", 4.0),
        reading(60, "a", "x", 8.0),
    };
    StreamInventory inv({{"dev", "a", "x", true, EdgeProcess::None}});
    AlignedFrame f = align(rs, cfg, inv);
    REQUIRE(f.rows() == 7);
    CHECK(f.values(1, 0) == 4.0);  // filled
    CHECK(f.values(2, 0) == 4.0);  // filled, at the bound
    CHECK_FALSE(f.mask(3, 0));     // beyond the bound
    CHECK_FALSE(f.mask(4, 0));
    CHECK(f.values(6, 0) == 8.0);
}

TEST_CASE("incomplete rows are dropped when configured") {
    IngestConfig cfg;
    cfg.grid_period = 60;
    cfg.max_gap_fill = 0;
    std::vector<SensorReading> rs = {
        reading(0, "a", "x", 1.0),
        reading(0, "b", "y", 2.0),
        reading(60, "a", "x", 3.0),  // y missing on this tick
        reading(120, "a", "x", 4.0),
        reading(120, "b", "y", 5.0),
    };
    AlignedFrame f = align(rs, cfg, two_stream_inventory());
    CHECK(f.rows() == 2);
    CHECK(f.mask.all());
    CHECK(f.grid == std::vector<Timestamp>{0, 120});
}

TEST_CASE("readings outside the inventory are rejected") {
    IngestConfig cfg;
    std::vector<SensorReading> rs = {reading(0, "zz", "q", 1.0)};
    CHECK_THROWS_AS(align(rs, cfg, two_stream_inventory()), ValidationError);
}

TEST_CASE("random replays match the independent oracle") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<Timestamp> ts_dist(0, 2000);
    std::uniform_real_distribution<Scalar> val_dist(-5.0, 5.0);
    std::uniform_int_distribution<int> col_dist(0, 1);
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<SensorReading> rs;
        for (int k = 0; k < 60; ++k) {
            const bool second = col_dist(rng) == 1;
            rs.push_back(reading(ts_dist(rng), second ? "b" : "a", second ? "y" : "x",
                                 val_dist(rng)));
        }
        IngestConfig cfg;
        cfg.grid_period = 30;
        cfg.max_gap_fill = rep % 4;
        cfg.drop_incomplete_rows = rep % 2 == 0;
        AlignedFrame got = align(rs, cfg, two_stream_inventory());
        AlignedFrame want = oracle_align(rs, cfg, {"a/x", "b/y"});
        REQUIRE(got.rows() == want.rows());
        CHECK(got.grid == want.grid);
        for (Index i = 0; i < got.rows(); ++i) {
            for (Index j = 0; j < got.cols(); ++j) {
                REQUIRE(got.mask(i, j) == want.mask(i, j));
                if (got.mask(i, j)) REQUIRE(got.values(i, j) == want.values(i, j));
            }
        }
    }
}

TEST_CASE("alignment of already-aligned data is idempotent") {
    IngestConfig cfg;
    cfg.grid_period = 60;
    std::vector<SensorReading> rs = {
        reading(0, "a", "x", 1.0), reading(0, "b", "y", 2.0),
        reading(60, "a", "x", 3.0), reading(60, "b", "y", 4.0),
    };
    AlignedFrame once = align(rs, cfg, two_stream_inventory());
    std::vector<SensorReading> replay;
    for (Index i = 0; i < once.rows(); ++i) {
        for (Index j = 0; j < once.cols(); ++j) {
            SensorReading r;
            r.timestamp = once.grid[static_cast<std::size_t>(i)];
            r.topic = once.columns[static_cast<std::size_t>(j)].substr(0, 1);
            r.stream = once.columns[static_cast<std::size_t>(j)].substr(2);
            r.value = once.values(i, j);
            replay.push_back(r);
        }
    }
    AlignedFrame twice = align(replay, cfg, two_stream_inventory());
    CHECK(twice.grid == once.grid);
    CHECK(twice.values == once.values);
}

TEST_CASE("config validation") {
    IngestConfig cfg;
    cfg.grid_period = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.grid_period = 60;
    cfg.max_gap_fill = -1;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.max_gap_fill = 5;
    cfg.mode = IngestMode::Live;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);  // live needs a broker
    cfg.broker_uri = "mqtt://localhost:1883";
    CHECK_NOTHROW(cfg.validate());
}
