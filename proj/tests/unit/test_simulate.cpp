#include <gtest/gtest.h>

#include <atomic>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pdsde/error.hpp"
#include "pdsde/executor.hpp"
#include "pdsde/simulate.hpp"

using namespace pdsde;

namespace {

CoeffModel model(const TimeGrid& g, std::vector<std::string> b, std::vector<std::string> sigma, std::size_t d = 1,
                 std::size_t m = 1) {
    return CoeffModel::parse(b, sigma, d, m, g);
}

Coupling dirac(const TimeGrid& g, double xi, double eta) {
    return Coupling({{PathSegment::constant(xi, g.segment_columns()), PathSegment::constant(eta, g.segment_columns()),
                      1.0}});
}

SimConfig sim(std::size_t n, std::uint64_t seed = 1, std::size_t m = 1) { return SimConfig{n, seed, m, false}; }

double endpoint(const RunResult& r, System s = System::X, std::size_t p = 0, std::size_t i = 0) {
    return r.cloud.value(s, p, r.cloud.grid().trajectory_columns() - 1, i);
}

const Executor serial;

}  // namespace

TEST(NoisePlan, CounterBased) {
    const NoisePlan a(7, 3, 0.01), b(7, 3, 0.01), c(8, 3, 0.01);
    double x[3], y[3], z[3];
    a.increment(5, 11, x);
    b.increment(5, 11, y);
    c.increment(5, 11, z);
    for (int k = 0; k < 3; ++k) {
        EXPECT_EQ(x[k], y[k]);
        EXPECT_NE(x[k], z[k]);
    }
    // Evaluation order does not matter.
    double first[3], again[3];
    a.increment(2, 4, first);
    a.increment(9, 9, y);
    a.increment(2, 4, again);
    for (int k = 0; k < 3; ++k) EXPECT_EQ(first[k], again[k]);
}

TEST(NoisePlan, Moments) {
    const double dt = 0.01;
    const NoisePlan plan(3, 2, dt);
    double sum = 0.0, sq = 0.0, cross = 0.0;
    const int n = 200000;
    for (int p = 0; p < n; ++p) {
        double w[2];
        plan.increment(static_cast<std::size_t>(p), 0, w);
        sum += w[0];
        sq += w[0] * w[0];
        cross += w[0] * w[1];
    }
    EXPECT_NEAR(sum / n, 0.0, 5.0 * std::sqrt(dt / n));
    EXPECT_NEAR(sq / n, dt, 5.0 * dt * std::sqrt(2.0 / n));
    EXPECT_NEAR(cross / n, 0.0, 5.0 * dt / std::sqrt(n));
}

TEST(NoisePlan, Antithetic) {
    const NoisePlan plan(3, 2, 0.04, true);
    for (std::size_t q = 0; q < 20; ++q) {
        double a[2], b[2];
        plan.increment(2 * q, 7, a);
        plan.increment(2 * q + 1, 7, b);
        EXPECT_EQ(a[0], -b[0]);
        EXPECT_EQ(a[1], -b[1]);
    }
}

TEST(InitCloud, Dirac) {
    const TimeGrid g(0.0, 1.0, 0.25, 0.5);
    const Coupling pi = dirac(g, 1.0, 2.0);
    const ParticleCloud c = init_cloud(pi, 10, 3, g);
    for (std::size_t p = 0; p < 10; ++p) {
        for (std::size_t col = 0; col < g.segment_columns(); ++col) {
            EXPECT_EQ(c.value(System::X, p, col, 0), 1.0);
            EXPECT_EQ(c.value(System::Xbar, p, col, 0), 2.0);
        }
    }
}

TEST(InitCloud, DiagonalStartsIdentical) {
    const TimeGrid g(0.0, 1.0, 0.25, 0.5);
    std::vector<CouplingPair> pairs;
    for (int k = 0; k < 5; ++k) {
        const PathSegment s(1, 3, {0.1 * k, -0.2 * k, 1.0 + k});
        pairs.push_back({s, s, 0.2});
    }
    const ParticleCloud c = init_cloud(Coupling(pairs), 50, 4, g);
    for (std::size_t p = 0; p < 50; ++p) {
        for (std::size_t col = 0; col < 3; ++col) {
            EXPECT_EQ(c.value(System::X, p, col, 0), c.value(System::Xbar, p, col, 0));
        }
    }
}

TEST(InitCloud, MixtureFraction) {
    const TimeGrid g(0.0, 1.0, 0.25, 0.5);
    const PathSegment xi = PathSegment::constant(3.0, 3), eta = PathSegment::constant(4.0, 3);
    const Coupling pi0({{PathSegment::constant(0.0, 3), PathSegment::constant(1.0, 3), 0.5},
                        {PathSegment::constant(1.0, 3), PathSegment::constant(2.0, 3), 0.5}});
    const Coupling pe = mixture_coupling(pi0, xi, eta, 0.5);
    const std::size_t n = 20000;
    const ParticleCloud c = init_cloud(pe, n, 5, g, &pe.pairs().back());
    std::size_t tagged = 0, at_pair = 0;
    for (std::size_t p = 0; p < n; ++p) {
        tagged += c.tagged()[p];
        at_pair += c.value(System::X, p, 2, 0) == 3.0 && c.value(System::Xbar, p, 2, 0) == 4.0;
    }
    EXPECT_EQ(tagged, at_pair);
    EXPECT_NEAR(static_cast<double>(tagged) / n, 0.5, 3.0 * std::sqrt(0.25 / n));
}

TEST(InitCloud, Errors) {
    const TimeGrid g(0.0, 1.0, 0.25, 0.5);
    EXPECT_THROW(init_cloud(dirac(g, 0, 1), 0, 1, g), DomainError);
    const TimeGrid other(0.0, 1.0, 0.25, 0.25);
    EXPECT_THROW(init_cloud(dirac(other, 0, 1), 4, 1, g), DimensionError);
}

TEST(Euler, LinearOde) {
    const TimeGrid g(0.0, 1.0, 1e-3, 0.0);
    const CoeffModel m = model(g, {"-x[1](0)"}, {"0"});
    const RunResult r = run(g, m, m, dirac(g, 1.0, 1.0), sim(1), serial);
    EXPECT_NEAR(endpoint(r), std::exp(-1.0), 2e-3);
    EXPECT_NEAR(endpoint(r), std::pow(1.0 - 1e-3, 1000), 1e-13);
}

TEST(Euler, MeanFieldGrowth) {
    const TimeGrid g(0.0, 1.0, 1e-3, 0.0);
    const CoeffModel m = model(g, {"E[x[1](0)]"}, {"0"});
    const RunResult r = run(g, m, m, dirac(g, 1.0, 1.0), sim(7), serial);
    double mean = 0.0;
    for (std::size_t p = 0; p < 7; ++p) mean += endpoint(r, System::X, p);
    mean /= 7.0;
    EXPECT_NEAR(mean, std::exp(1.0), 3e-3);
    EXPECT_NEAR(mean, std::pow(1.0 + 1e-3, 1000), 1e-12);
}

TEST(Euler, DelayMethodOfSteps) {
    const TimeGrid g(0.0, 0.25, 1e-3, 0.25);
    const CoeffModel m = model(g, {"-x[1](-0.25)"}, {"0"});
    const RunResult r = run(g, m, m, dirac(g, 1.0, 1.0), sim(1), serial);
    for (std::size_t k = 0; k <= g.steps(); ++k) {
        const double t = g.time_at_step(k);
        EXPECT_NEAR(r.cloud.value(System::X, 0, g.lags() + k, 0), 1.0 - t, 5.0 * g.dt());
    }
}

TEST(Euler, StrongOrderOne) {
    double err[3];
    const double dts[3] = {1e-2, 5e-3, 2.5e-3};
    for (int k = 0; k < 3; ++k) {
        const TimeGrid g(0.0, 1.0, dts[k], 0.0);
        const CoeffModel m = model(g, {"-x[1](0)"}, {"0"});
        err[k] = std::abs(endpoint(run(g, m, m, dirac(g, 1.0, 1.0), sim(1), serial)) - std::exp(-1.0));
    }
    for (int k = 0; k < 2; ++k) {
        const double ratio = err[k] / err[k + 1];
        EXPECT_GE(ratio, 1.7);
        EXPECT_LE(ratio, 2.3);
    }
}

TEST(Euler, LawUsesPreStepState) {
    // x_p(k+1) = x_p(k) + dt * mean_k with mean_k over the cloud before the step.
    const TimeGrid g(0.0, 0.1, 0.01, 0.0);
    const CoeffModel m = model(g, {"E[x[1](0)]"}, {"0"});
    std::vector<CouplingPair> pairs;
    const double levels[4] = {1.0, 2.0, 4.0, 8.0};
    for (double v : levels) pairs.push_back({PathSegment::constant(v, 1), PathSegment::constant(v, 1), 0.25});
    const RunResult r = run(g, m, m, Coupling(pairs), sim(64, 9), serial);
    std::vector<double> x(64);
    for (std::size_t p = 0; p < 64; ++p) x[p] = r.cloud.value(System::X, p, 0, 0);
    for (std::size_t k = 0; k < g.steps(); ++k) {
        double mean = 0.0;
        for (double v : x) mean += v;
        mean /= 64.0;
        for (auto& v : x) v += 0.01 * mean;
        for (std::size_t p = 0; p < 64; ++p) ASSERT_NEAR(r.cloud.value(System::X, p, k + 1, 0), x[p], 1e-12);
    }
}

TEST(Run, ZeroCoefficientsKeepEndpoints) {
    const TimeGrid g(0.0, 1.0, 0.1, 0.2);
    const CoeffModel m = model(g, {"0"}, {"0"});
    const Coupling pi({{PathSegment(1, 3, {3.0, 2.0, 1.0}), PathSegment(1, 3, {4.0, 5.0, 6.0}), 1.0}});
    const RunResult r = run(g, m, m, pi, sim(3), serial);
    for (std::size_t p = 0; p < 3; ++p) {
        for (std::size_t c = g.lags(); c < g.trajectory_columns(); ++c) {
            EXPECT_EQ(r.cloud.value(System::X, p, c, 0), 1.0);
            EXPECT_EQ(r.cloud.value(System::Xbar, p, c, 0), 6.0);
        }
    }
}

TEST(Run, SharedNoiseCancels) {
    const TimeGrid g(0.0, 1.0, 0.01, 0.0);
    const CoeffModel m = model(g, {"0"}, {"1"});
    const RunResult r = run(g, m, m, dirac(g, 0.0, 0.5), sim(20, 11), serial);
    for (std::size_t p = 0; p < 20; ++p) {
        for (std::size_t c = 0; c < g.trajectory_columns(); ++c) {
            EXPECT_NEAR(r.cloud.value(System::Xbar, p, c, 0) - r.cloud.value(System::X, p, c, 0), 0.5, 1e-12);
        }
    }
    // The noise is not degenerate.
    EXPECT_NE(endpoint(r, System::X, 0), endpoint(r, System::X, 1));
}

TEST(Run, SharedNoiseExactCopy) {
    const TimeGrid g(0.0, 1.0, 0.01, 0.1);
    const CoeffModel m = model(g, {"0.5*x[1](-0.1) + 0.5*E[x[1](0)] - x[1](0)", "tanh(x[1](0))"},
                               {"0.5*x[1](0)", "0.1", "0", "x[2](0)"}, 2, 2);
    std::vector<CouplingPair> pairs;
    for (int k = 0; k < 4; ++k) {
        std::vector<double> v(2 * g.segment_columns());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = 1.0 + 0.1 * k + 0.01 * static_cast<double>(j);
        const PathSegment s(2, g.segment_columns(), v);
        pairs.push_back({s, s, 0.25});
    }
    const RunResult r = run(g, m, m, Coupling(pairs), SimConfig{32, 5, 2, false}, serial);
    for (std::size_t p = 0; p < 32; ++p) {
        for (std::size_t c = 0; c < g.trajectory_columns(); ++c) {
            for (std::size_t i = 0; i < 2; ++i) {
                ASSERT_EQ(std::bit_cast<std::uint64_t>(r.cloud.value(System::X, p, c, i)),
                          std::bit_cast<std::uint64_t>(r.cloud.value(System::Xbar, p, c, i)));
            }
        }
    }
}

TEST(Run, DeterministicAcrossThreadCounts) {
    const TimeGrid g(0.0, 0.5, 0.01, 0.1);
    const CoeffModel m = model(g, {"0.5*x[1](-0.1) + 0.5*E[x[1](0)] - x[1](0)"}, {"0.5*x[1](0)"});
    const CoeffModel mb = model(g, {"0.5*x[1](-0.1) + 0.5*E[x[1](0)] - x[1](0) + 0.1"}, {"0.5*x[1](0)"});
    const Coupling pi({{PathSegment::constant(1.0, g.segment_columns()), PathSegment::constant(1.2, g.segment_columns()),
                        0.5},
                       {PathSegment::constant(0.5, g.segment_columns()), PathSegment::constant(0.6, g.segment_columns()),
                        0.5}});
    const RunResult a = run(g, m, mb, pi, sim(100, 3), serial);
    const RunResult b = run(g, m, mb, pi, sim(100, 3), serial);
    const Executor pool(3);
    const RunResult c = run(g, m, mb, pi, sim(100, 3), pool);
    for (std::size_t p = 0; p < 100; ++p) {
        for (std::size_t col = 0; col < g.trajectory_columns(); ++col) {
            for (System s : {System::X, System::Xbar}) {
                ASSERT_EQ(a.cloud.value(s, p, col, 0), b.cloud.value(s, p, col, 0));
                ASSERT_EQ(a.cloud.value(s, p, col, 0), c.cloud.value(s, p, col, 0));
            }
        }
    }
    const RunResult d = run(g, m, mb, pi, sim(100, 4), serial);
    EXPECT_NE(endpoint(a), endpoint(d));
}

TEST(Run, SecondMomentTrack) {
    const TimeGrid g(0.0, 1.0, 0.01, 0.1);
    const CoeffModel m = model(g, {"0.5*x[1](-0.1) + 0.5*E[x[1](0)] - x[1](0)"}, {"0.5*x[1](0)"});
    const RunResult r = run(g, m, m, dirac(g, 1.0, 1.5), sim(200, 2), serial, RunOptions{true});
    ASSERT_EQ(r.second_moment_x.size(), g.steps() + 1);
    EXPECT_EQ(r.second_moment_x[0], 1.0);
    EXPECT_EQ(r.second_moment_xbar[0], 2.25);
    for (double v : r.second_moment_x) {
        EXPECT_TRUE(std::isfinite(v));
        EXPECT_LT(v, 10.0);
    }
}

TEST(Run, BlowUpNamesParticleAndStep) {
    const TimeGrid g(0.0, 1.0, 0.1, 0.0);
    const CoeffModel m = model(g, {"x[1](0) * x[1](0) * 1e100"}, {"0"});
    try {
        run(g, m, m, dirac(g, 1.0, 1.0), sim(2), serial);
        FAIL() << "expected blow-up";
    } catch (const NumericError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("particle 0"), std::string::npos) << msg;
        EXPECT_NE(msg.find("step"), std::string::npos) << msg;
    }
}

TEST(Executor, LowestIndexFailureWins) {
    for (std::size_t threads : {1u, 4u}) {
        const Executor ex(threads);
        std::atomic<int> calls{0};
        try {
            ex.for_each(100, [&](std::size_t k) {
                ++calls;
                if (k == 37 || k == 80) throw std::runtime_error("fail " + std::to_string(k));
            });
            FAIL();
        } catch (const std::runtime_error& e) {
            EXPECT_STREQ(e.what(), "fail 37");
        }
    }
}
