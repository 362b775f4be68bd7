#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pdsde/coeffs.hpp"
#include "pdsde/executor.hpp"
#include "pdsde/measures.hpp"
#include "pdsde/segments.hpp"

namespace pdsde {

struct ScenarioSpec;

struct SimConfig {
    std::size_t particles = 1;
    std::uint64_t seed = 0;
    std::size_t noise_dim = 1;
    bool antithetic = false;
};

// Brownian increments addressed by (particle, step): the draw for a given
// triple (seed, particle, step) never depends on evaluation order. Both
// systems of a particle consume the same increment.
class NoisePlan {
public:
    NoisePlan(std::uint64_t seed, std::size_t noise_dim, double dt, bool antithetic = false);

    // Writes noise_dim increments (already scaled by sqrt(dt)) into out.
    void increment(std::size_t particle, std::size_t step, std::span<double> out) const noexcept;

    std::size_t noise_dim() const noexcept { return noise_dim_; }

private:
    std::uint64_t seed_;
    std::size_t noise_dim_;
    double scale_;
    bool antithetic_;
};

enum class System : std::uint8_t { X = 0, Xbar = 1 };

// N particle paths of X and of X-bar on [t0 - r0, T].
class ParticleCloud {
public:
    ParticleCloud(std::size_t particles, std::size_t dim, const TimeGrid& grid);

    std::size_t size() const noexcept { return particles_; }
    std::size_t dim() const noexcept { return dim_; }
    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t cols() const noexcept { return cols_; }

    double value(System s, std::size_t p, std::size_t col, std::size_t i) const noexcept {
        return data(s)[(p * cols_ + col) * dim_ + i];
    }
    double& value(System s, std::size_t p, std::size_t col, std::size_t i) noexcept {
        return data(s)[(p * cols_ + col) * dim_ + i];
    }

    // Segment of particle p at run step k (columns k .. k + L).
    SegmentView window(System s, std::size_t p, std::size_t step) const noexcept {
        return {data(s).data() + (p * cols_ + step) * dim_, dim_, grid_.segment_columns()};
    }

    Trajectory trajectory(System s, std::size_t p) const;

    // Index of the initial coupling pair each particle was drawn from.
    const std::vector<std::size_t>& origin() const noexcept { return origin_; }
    // Particles whose initial pair equals the tagged pair bit-for-bit.
    const std::vector<std::uint8_t>& tagged() const noexcept { return tagged_; }

    // Number of completed Euler steps.
    std::size_t steps_done() const noexcept { return steps_done_; }

private:
    friend ParticleCloud init_cloud(const Coupling&, std::size_t, std::uint64_t, const TimeGrid&,
                                    const CouplingPair*);
    friend void euler_step(ParticleCloud&, std::size_t, const CoeffModel&, const CoeffModel&, const NoisePlan&,
                           const Executor&);

    const std::vector<double>& data(System s) const noexcept { return s == System::X ? x_ : xbar_; }
    std::vector<double>& data(System s) noexcept { return s == System::X ? x_ : xbar_; }

    std::size_t particles_;
    std::size_t dim_;
    TimeGrid grid_;
    std::size_t cols_;
    std::vector<double> x_;
    std::vector<double> xbar_;
    std::vector<std::size_t> origin_;
    std::vector<std::uint8_t> tagged_;
    std::size_t steps_done_ = 0;
};

// N i.i.d. draws from the coupling fill the initial histories. When `tag` is
// given, particles drawn at exactly that pair are marked.
ParticleCloud init_cloud(const Coupling& coupling, std::size_t particles, std::uint64_t seed,
                         const TimeGrid& grid, const CouplingPair* tag = nullptr);

// One Euler-Maruyama step k -> k+1 for every particle of both systems. Laws
// are computed from the cloud state at step k before any particle moves.
void euler_step(ParticleCloud& cloud, std::size_t step, const CoeffModel& model, const CoeffModel& model_bar,
                const NoisePlan& noise, const Executor& exec);

struct RunOptions {
    bool track_second_moment = false;
};

struct RunResult {
    ParticleCloud cloud;
    std::uint64_t seed = 0;
    // Empirical E||X_t||_inf^2 per step (0..steps) when tracked.
    std::vector<double> second_moment_x;
    std::vector<double> second_moment_xbar;
};

// Seeds used by replication r of a run seeded with `seed`.
std::uint64_t replication_seed(std::uint64_t seed, std::size_t replication) noexcept;

// Full run of one replication on the spec's grid.
RunResult run(const ScenarioSpec& spec, std::size_t replication, const Executor& exec,
              const RunOptions& opts = {});

// Run with explicit pieces (used by run() and by tests).
RunResult run(const TimeGrid& grid, const CoeffModel& model, const CoeffModel& model_bar, const Coupling& initial,
              const SimConfig& sim, const Executor& exec, const RunOptions& opts = {},
              const CouplingPair* tag = nullptr);

}  // namespace pdsde
