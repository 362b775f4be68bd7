#include "pdsde/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pdsde/error.hpp"
#include "pdsde/rng.hpp"
#include "pdsde/scenario.hpp"

namespace pdsde {

NoisePlan::NoisePlan(std::uint64_t seed, std::size_t noise_dim, double dt, bool antithetic)
    : seed_(seed), noise_dim_(noise_dim), scale_(std::sqrt(dt)), antithetic_(antithetic) {
    if (noise_dim == 0) throw DomainError("noise dimension must be >= 1");
}

void NoisePlan::increment(std::size_t particle, std::size_t step, std::span<double> out) const noexcept {
    const std::size_t source = antithetic_ ? particle - particle % 2 : particle;
    const double sign = antithetic_ && particle % 2 == 1 ? -scale_ : scale_;
    for (std::size_t j = 0; j < noise_dim_; j += 2) {
        const auto z = rng::normal_pair(seed_, static_cast<std::uint32_t>(source), static_cast<std::uint32_t>(step),
                                        static_cast<std::uint32_t>(j / 2));
        out[j] = sign * z[0];
        if (j + 1 < noise_dim_) out[j + 1] = sign * z[1];
    }
}

ParticleCloud::ParticleCloud(std::size_t particles, std::size_t dim, const TimeGrid& grid)
    : particles_(particles), dim_(dim), grid_(grid), cols_(grid.trajectory_columns()),
      x_(particles * cols_ * dim, 0.0), xbar_(particles * cols_ * dim, 0.0), origin_(particles, 0),
      tagged_(particles, 0) {
    if (particles == 0) throw DomainError("particle count must be >= 1");
    if (dim == 0) throw DomainError("dimension must be >= 1");
}

Trajectory ParticleCloud::trajectory(System s, std::size_t p) const {
    const auto& d = data(s);
    const auto first = d.begin() + static_cast<std::ptrdiff_t>(p * cols_ * dim_);
    return Trajectory(dim_, grid_, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(cols_ * dim_)));
}

ParticleCloud init_cloud(const Coupling& coupling, std::size_t particles, std::uint64_t seed, const TimeGrid& grid,
                         const CouplingPair* tag) {
    if (coupling.cols() != grid.segment_columns()) {
        throw DimensionError("initial coupling has " + std::to_string(coupling.cols()) +
                             " lag columns, grid needs " + std::to_string(grid.segment_columns()));
    }
    ParticleCloud cloud(particles, coupling.dim(), grid);
    rng::Stream stream(seed, 0x494E4954u);
    const std::size_t block = grid.segment_columns() * cloud.dim_;
    for (std::size_t p = 0; p < particles; ++p) {
        const std::size_t k = coupling.sample_index(stream.uniform());
        const CouplingPair& pair = coupling.pairs()[k];
        cloud.origin_[p] = k;
        std::copy_n(pair.left.values().begin(), block, cloud.x_.begin() + static_cast<std::ptrdiff_t>(p * cloud.cols_ * cloud.dim_));
        std::copy_n(pair.right.values().begin(), block,
                    cloud.xbar_.begin() + static_cast<std::ptrdiff_t>(p * cloud.cols_ * cloud.dim_));
        if (tag && pair.left == tag->left && pair.right == tag->right) cloud.tagged_[p] = 1;
    }
    return cloud;
}

namespace {

std::vector<SegmentView> windows(const ParticleCloud& cloud, System s, std::size_t step) {
    std::vector<SegmentView> out(cloud.size());
    for (std::size_t p = 0; p < cloud.size(); ++p) out[p] = cloud.window(s, p, step);
    return out;
}

void check_model_shape(const CoeffModel& m, const ParticleCloud& cloud, std::size_t noise_dim) {
    if (m.dim() != cloud.dim()) throw DimensionError("model dimension does not match the cloud");
    if (m.noise_dim() != noise_dim) throw DimensionError("model noise dimension does not match the noise plan");
}

}  // namespace

void euler_step(ParticleCloud& cloud, std::size_t step, const CoeffModel& model, const CoeffModel& model_bar,
                const NoisePlan& noise, const Executor& exec) {
    const TimeGrid& grid = cloud.grid_;
    if (step >= grid.steps()) throw DomainError("step beyond the end of the grid");
    if (step != cloud.steps_done_) throw DomainError("euler_step called out of order");
    check_model_shape(model, cloud, noise.noise_dim());
    check_model_shape(model_bar, cloud, noise.noise_dim());

    const LawMoments law = LawMoments::compute(model.terminals(), windows(cloud, System::X, step));
    const LawMoments law_bar = LawMoments::compute(model_bar.terminals(), windows(cloud, System::Xbar, step));

    const double t = grid.time_at_step(step);
    const double dt = grid.dt();
    const std::size_t d = cloud.dim_, m = noise.noise_dim();
    const std::size_t cur_col = step + grid.lags();

    exec.for_each(cloud.size(), [&](std::size_t p) {
        double small[8];
        std::vector<double> large;
        std::span<double> dw(small, m);
        if (m > 8) {
            large.resize(m);
            dw = large;
        }
        noise.increment(p, step, dw);
        auto advance = [&](System s, const CoeffModel& mod, const LawMoments& mom) {
            const SegmentView seg = cloud.window(s, p, step);
            for (std::size_t i = 0; i < d; ++i) {
                double next = seg.current(i) + mod.drift(i).eval(t, seg, mom) * dt;
                for (std::size_t j = 0; j < m; ++j) next += mod.diffusion(i, j).eval(t, seg, mom) * dw[j];
                if (!std::isfinite(next)) {
                    throw NumericError(std::string("blow-up: non-finite state in system ") +
                                       (s == System::X ? "X" : "Xbar") + " at particle " + std::to_string(p) +
                                       ", step " + std::to_string(step));
                }
                cloud.value(s, p, cur_col + 1, i) = next;
            }
        };
        try {
            advance(System::X, model, law);
            advance(System::Xbar, model_bar, law_bar);
        } catch (const NumericError& e) {
            const std::string what = e.what();
            if (what.rfind("blow-up", 0) == 0) throw;
            throw NumericError("blow-up: " + what + " at particle " + std::to_string(p) + ", step " +
                               std::to_string(step));
        }
    });
    cloud.steps_done_ = step + 1;
}

std::uint64_t replication_seed(std::uint64_t seed, std::size_t replication) noexcept {
    return rng::derive_seed(seed, 0x5245500000000000ull + replication);
}

namespace {

double second_moment(const ParticleCloud& cloud, System s, std::size_t step) {
    double acc = 0.0;
    for (std::size_t p = 0; p < cloud.size(); ++p) {
        const double n = sup_norm(cloud.window(s, p, step));
        acc += n * n;
    }
    return acc / static_cast<double>(cloud.size());
}

}  // namespace

RunResult run(const TimeGrid& grid, const CoeffModel& model, const CoeffModel& model_bar, const Coupling& initial,
              const SimConfig& sim, const Executor& exec, const RunOptions& opts, const CouplingPair* tag) {
    if (sim.particles == 0) throw DomainError("sim.N must be >= 1");
    if (sim.noise_dim == 0) throw DomainError("dims.m must be >= 1");
    RunResult res{init_cloud(initial, sim.particles, rng::derive_seed(sim.seed, 1), grid, tag), sim.seed, {}, {}};
    const NoisePlan noise(rng::derive_seed(sim.seed, 2), sim.noise_dim, grid.dt(), sim.antithetic);
    if (opts.track_second_moment) {
        res.second_moment_x.push_back(second_moment(res.cloud, System::X, 0));
        res.second_moment_xbar.push_back(second_moment(res.cloud, System::Xbar, 0));
    }
    for (std::size_t k = 0; k < grid.steps(); ++k) {
        euler_step(res.cloud, k, model, model_bar, noise, exec);
        if (opts.track_second_moment) {
            res.second_moment_x.push_back(second_moment(res.cloud, System::X, k + 1));
            res.second_moment_xbar.push_back(second_moment(res.cloud, System::Xbar, k + 1));
        }
    }
    return res;
}

RunResult run(const ScenarioSpec& spec, std::size_t replication, const Executor& exec, const RunOptions& opts) {
    SimConfig sim = spec.sim;
    sim.seed = replication_seed(spec.sim.seed, replication);
    const CouplingPair* tag = spec.tag ? &spec.tag->pair : nullptr;
    return run(spec.grid, spec.model, spec.model_bar, spec.initial, sim, exec, opts, tag);
}

}  // namespace pdsde
