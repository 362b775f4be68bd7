#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "pdsde/error.hpp"
#include "pdsde/json_io.hpp"
#include "pdsde/segments.hpp"

using namespace pdsde;

namespace {

PathSegment row(std::vector<double> v) {
    const std::size_t n = v.size();
    return PathSegment(1, n, std::move(v));
}

}  // namespace

TEST(TimeGrid, ExactMultiples) {
    const TimeGrid g(0.0, 1.0, 0.1, 0.2);
    EXPECT_EQ(g.lags(), 2u);
    EXPECT_EQ(g.segment_columns(), 3u);
    EXPECT_EQ(g.steps(), 10u);
    EXPECT_EQ(g.trajectory_columns(), 13u);
    EXPECT_FALSE(g.r0_adjusted());
}

TEST(TimeGrid, RoundsDelayUp) {
    const TimeGrid g(0.0, 1.0, 0.25, 0.3);
    EXPECT_TRUE(g.r0_adjusted());
    EXPECT_DOUBLE_EQ(g.r0(), 0.5);
    EXPECT_EQ(g.lags(), 2u);
    EXPECT_DOUBLE_EQ(g.r0_requested(), 0.3);
}

TEST(TimeGrid, RejectsBadInput) {
    EXPECT_THROW(TimeGrid(0.0, 1.0, 0.0, 0.0), DomainError);
    EXPECT_THROW(TimeGrid(0.0, 1.0, -0.1, 0.0), DomainError);
    EXPECT_THROW(TimeGrid(1.0, 1.0, 0.1, 0.0), DomainError);
    EXPECT_THROW(TimeGrid(0.0, 1.05, 0.1, 0.0), DomainError);
}

TEST(TimeGrid, LagLookup) {
    const TimeGrid g(0.0, 1.0, 0.25, 0.5);
    EXPECT_EQ(g.column_of_lag(0.0), 2u);
    EXPECT_EQ(g.column_of_lag(-0.25), 1u);
    EXPECT_EQ(g.column_of_lag(-0.5), 0u);
    EXPECT_THROW(g.column_of_lag(-0.3), DomainError);
    EXPECT_THROW(g.column_of_lag(-0.75), DomainError);
    EXPECT_THROW(g.column_of_lag(0.25), DomainError);
}

TEST(Leq, Examples) {
    EXPECT_TRUE(leq(PathSegment::constant(0.0, 3), PathSegment::constant(1.0, 3)));
    const PathSegment xi = row({0.3, -1.0, 2.0});
    EXPECT_TRUE(leq(xi, xi));
    EXPECT_FALSE(leq(row({0, 0, 0}), row({1, -0.5, 1})));
}

TEST(Leq, DimensionMismatch) {
    EXPECT_THROW(leq(PathSegment(1, 3), PathSegment(1, 4)), DimensionError);
    EXPECT_THROW(leq(PathSegment(1, 3), PathSegment(2, 3)), DimensionError);
    EXPECT_THROW(meet(PathSegment(1, 3), PathSegment(2, 3)), DimensionError);
}

TEST(Meet, Examples) {
    EXPECT_EQ(meet(PathSegment::constant(2.0, 4), PathSegment::constant(3.0, 4)), PathSegment::constant(2.0, 4));
    const std::vector<double> a{1, 5}, b{3, 2}, want{1, 2};
    EXPECT_EQ(meet(PathSegment::constant(a, 3), PathSegment::constant(b, 3)), PathSegment::constant(want, 3));
    const PathSegment xi = row({0.5, -2.0, 7.0});
    EXPECT_EQ(meet(xi, xi), xi);
}

TEST(SupNorm, Examples) {
    EXPECT_EQ(sup_norm(PathSegment(2, 5)), 0.0);
    EXPECT_EQ(sup_norm(row({-3, 1, 2})), 3.0);
    EXPECT_EQ(sup_norm(PathSegment(2, 1, {3, 4})), 5.0);
}

TEST(SegmentAt, Examples) {
    const TimeGrid g(0.0, 1.0, 0.1, 0.2);
    std::vector<double> v(g.trajectory_columns());
    for (std::size_t c = 0; c < v.size(); ++c) v[c] = g.time_at_column(c);
    const Trajectory traj(1, g, v);
    const PathSegment w = segment_at(traj, 1.0);
    ASSERT_EQ(w.cols(), 3u);
    EXPECT_NEAR(w(0, 0), 0.8, 1e-12);
    EXPECT_NEAR(w(0, 1), 0.9, 1e-12);
    EXPECT_NEAR(w(0, 2), 1.0, 1e-12);

    const PathSegment init = segment_at(traj, 0.0);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(init(0, j), v[j]);

    const Trajectory flat(1, g, std::vector<double>(g.trajectory_columns(), 4.5));
    for (std::size_t k = 0; k <= g.steps(); ++k) {
        EXPECT_EQ(segment_at(flat, g.time_at_step(k)), PathSegment::constant(4.5, 3));
    }
}

TEST(SegmentAt, Errors) {
    const TimeGrid g(0.0, 1.0, 0.1, 0.2);
    const Trajectory traj(1, g);
    EXPECT_THROW(segment_at(traj, 0.05), DomainError);
    EXPECT_THROW(segment_at(traj, -0.1), DomainError);
    EXPECT_THROW(segment_at(traj, 1.1), DomainError);
}

TEST(SegmentAt, ShiftProperty) {
    std::mt19937_64 rng(11);
    const TimeGrid g(0.0, 2.0, 0.25, 0.5);
    std::normal_distribution<double> z;
    std::vector<double> v(2 * g.trajectory_columns());
    for (auto& x : v) x = z(rng);
    const Trajectory traj(2, g, v);
    for (std::size_t k = 0; k < g.steps(); ++k) {
        const PathSegment now = segment_at(traj, g.time_at_step(k));
        const PathSegment next = segment_at(traj, g.time_at_step(k + 1));
        for (std::size_t i = 0; i < 2; ++i) {
            for (std::size_t j = 0; j + 1 < now.cols(); ++j) EXPECT_EQ(next(i, j), now(i, j + 1));
            EXPECT_EQ(next(i, next.cols() - 1), traj(i, g.lags() + k + 1));
        }
    }
}

TEST(Order, PartialOrderProperties) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> shift(0.0, 0.5);
    for (int trial = 0; trial < 500; ++trial) {
        const PathSegment a = oracle::random_segment(rng, 2, 4);
        EXPECT_TRUE(leq(a, a));
        PathSegment b = a, c = a;
        for (std::size_t i = 0; i < 2; ++i) {
            for (std::size_t j = 0; j < 4; ++j) {
                b(i, j) += shift(rng);
                c(i, j) = b(i, j) + shift(rng);
            }
        }
        ASSERT_TRUE(leq(a, b) && leq(b, c));
        EXPECT_TRUE(leq(a, c));
        const PathSegment r = oracle::random_segment(rng, 2, 4);
        if (leq(a, r) && leq(r, a)) {
            EXPECT_EQ(a, r);
        }
        if (leq(a, b) && leq(b, a)) {
            EXPECT_EQ(a, b);
        }
        EXPECT_EQ(leq(a, r), oracle::entrywise_leq(a, r));
    }
}

TEST(Meet, GreatestLowerBound) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> down(0.0, 0.3);
    for (int trial = 0; trial < 500; ++trial) {
        const PathSegment x = oracle::random_segment(rng, 2, 3);
        const PathSegment y = oracle::random_segment(rng, 2, 3);
        const PathSegment m = meet(x, y);
        EXPECT_TRUE(leq(m, x));
        EXPECT_TRUE(leq(m, y));
        PathSegment z = m;
        for (std::size_t i = 0; i < 2; ++i) {
            for (std::size_t j = 0; j < 3; ++j) z(i, j) -= down(rng);
        }
        ASSERT_TRUE(leq(z, x) && leq(z, y));
        EXPECT_TRUE(leq(z, m));
    }
}

TEST(SupNorm, NormProperties) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> scale(-5.0, 5.0);
    for (int trial = 0; trial < 500; ++trial) {
        const PathSegment x = oracle::random_segment(rng, 3, 4);
        const PathSegment y = oracle::random_segment(rng, 3, 4);
        const double c = scale(rng);
        std::vector<double> cx(x.values()), sum(x.values());
        for (std::size_t k = 0; k < cx.size(); ++k) {
            cx[k] *= c;
            sum[k] += y.values()[k];
        }
        EXPECT_NEAR(sup_norm(PathSegment(3, 4, cx)), std::abs(c) * sup_norm(x), 1e-12);
        EXPECT_LE(sup_norm(PathSegment(3, 4, sum)), sup_norm(x) + sup_norm(y) + 1e-12);
        EXPECT_GE(sup_norm(x), 0.0);
        EXPECT_NEAR(sup_distance(x, y), oracle::sup_dist(x, y), 1e-15);
    }
}

TEST(PathSegment, RejectsNonFinite) {
    EXPECT_THROW(PathSegment(1, 2, {1.0, std::nan("")}), DomainError);
    EXPECT_THROW(PathSegment(1, 2, {1.0, INFINITY}), DomainError);
    EXPECT_THROW(PathSegment(1, 2, {1.0}), DimensionError);
}

TEST(Serialization, JsonRoundTripIsBitExact) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const PathSegment x = oracle::random_segment(rng, 2, 5, -1e6, 1e6);
        const PathSegment back = segment_from_json(segment_to_json(x, 0.1, 0.4));
        EXPECT_EQ(back, x);
    }
    const PathSegment tiny(1, 2, {5e-324, -1.7976931348623157e308});
    EXPECT_EQ(segment_from_json(segment_to_json(tiny, 1.0, 1.0)), tiny);
}

TEST(Serialization, JsonShape) {
    const PathSegment x(2, 3, {1, 4, 2, 5, 3, 6});
    const Json j = parse_json_text(segment_to_json(x, 0.1, 0.2));
    EXPECT_EQ(j.at("dim"), 2);
    EXPECT_EQ(j.at("values").size(), 2u);
    EXPECT_EQ(j.at("values")[0], Json::array({1.0, 2.0, 3.0}));
    EXPECT_EQ(j.at("values")[1], Json::array({4.0, 5.0, 6.0}));
}

TEST(Serialization, JsonRejectsWrongColumnCount) {
    EXPECT_THROW(segment_from_json(R"({"dim":1,"dt":0.1,"r0":0.2,"values":[[1,2]]})"), Error);
}

TEST(Serialization, Csv) {
    const PathSegment x(1, 3, {1.0, 2.5, -3.0});
    const std::string csv = segment_to_csv(x, 0.1, 0.2);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "coord,-0.20000000000000001,-0.10000000000000001,0");
    EXPECT_NE(csv.find("\n1,1,2.5,-3\n"), std::string::npos);
}
