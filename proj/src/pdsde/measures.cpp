#include "pdsde/measures.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "pdsde/assignment.hpp"
#include "pdsde/error.hpp"
#include "pdsde/rng.hpp"

namespace pdsde {

namespace {

// Neumaier-compensated sum; the weight checks need ~1 ulp accuracy for
// clouds of 10^4+ atoms.
double accurate_sum(std::span<const double> xs) noexcept {
    double sum = 0.0, comp = 0.0;
    for (double x : xs) {
        const double t = sum + x;
        comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    return sum + comp;
}

std::vector<double> cumulative_of(std::span<const double> w) {
    std::vector<double> c(w.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        acc += w[k];
        c[k] = acc;
    }
    return c;
}

std::size_t pick(const std::vector<double>& cumulative, double u) noexcept {
    const double target = u * cumulative.back();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

void check_weights(std::span<const double> w, const char* what) {
    if (w.empty()) throw DomainError(std::string(what) + " is empty");
    for (double x : w) {
        if (!(x > 0.0) || !std::isfinite(x)) throw DomainError(std::string(what) + " has a non-positive weight");
    }
    if (std::abs(accurate_sum(w) - 1.0) > 1e-12) {
        throw DomainError(std::string(what) + " weights do not sum to 1");
    }
}

template <class Atoms>
void check_shapes(const Atoms& atoms, const char* what) {
    for (const auto& a : atoms) {
        if (a.dim() != atoms.front().dim() || a.cols() != atoms.front().cols()) {
            throw DimensionError(std::string(what) + " atoms do not share one shape");
        }
    }
}

void require_same_shape(std::size_t d1, std::size_t c1, std::size_t d2, std::size_t c2) {
    if (d1 != d2 || c1 != c2) throw DimensionError("measures have different atom shapes");
}

void require_equal_sizes(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    if (mu.size() != nu.size()) {
        throw DimensionError("measures have unequal atom counts (" + std::to_string(mu.size()) + " vs " +
                             std::to_string(nu.size()) + ")");
    }
    require_same_shape(mu.dim(), mu.cols(), nu.dim(), nu.cols());
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(std::vector<PathSegment> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw DomainError("empirical measure needs at least one atom");
    check_shapes(atoms_, "empirical measure");
}

double EmpiricalMeasure::second_moment() const noexcept {
    double acc = 0.0;
    for (const auto& a : atoms_) {
        const double n = sup_norm(a);
        acc += n * n;
    }
    return acc / static_cast<double>(atoms_.size());
}

WeightedMeasure::WeightedMeasure(std::vector<PathSegment> atoms, std::vector<double> weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
    if (atoms_.size() != weights_.size()) throw DimensionError("weighted measure: atom/weight count mismatch");
    check_weights(weights_, "weighted measure");
    check_shapes(atoms_, "weighted measure");
    cumulative_ = cumulative_of(weights_);
}

WeightedMeasure WeightedMeasure::uniform(const EmpiricalMeasure& mu) {
    return WeightedMeasure(mu.atoms(), std::vector<double>(mu.size(), 1.0 / static_cast<double>(mu.size())));
}

WeightedMeasure WeightedMeasure::merged() const {
    std::map<std::vector<double>, std::size_t> index;
    std::vector<PathSegment> atoms;
    std::vector<double> weights;
    for (std::size_t k = 0; k < atoms_.size(); ++k) {
        auto [it, inserted] = index.try_emplace(atoms_[k].values(), atoms.size());
        if (inserted) {
            atoms.push_back(atoms_[k]);
            weights.push_back(weights_[k]);
        } else {
            weights[it->second] += weights_[k];
        }
    }
    return WeightedMeasure(std::move(atoms), std::move(weights));
}

std::size_t WeightedMeasure::sample_index(double u) const noexcept { return pick(cumulative_, u); }

Coupling::Coupling(std::vector<CouplingPair> pairs) : pairs_(std::move(pairs)) {
    if (pairs_.empty()) throw DomainError("coupling is empty");
    std::vector<double> w;
    w.reserve(pairs_.size());
    for (const auto& p : pairs_) {
        require_same_shape(p.left.dim(), p.left.cols(), pairs_.front().left.dim(), pairs_.front().left.cols());
        require_same_shape(p.right.dim(), p.right.cols(), pairs_.front().left.dim(), pairs_.front().left.cols());
        w.push_back(p.weight);
    }
    check_weights(w, "coupling");
    cumulative_ = cumulative_of(w);
}

bool Coupling::order_supported() const {
    return std::all_of(pairs_.begin(), pairs_.end(), [](const CouplingPair& p) { return leq(p.left, p.right); });
}

std::size_t Coupling::sample_index(double u) const noexcept { return pick(cumulative_, u); }

double w2(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, std::size_t cap) {
    require_equal_sizes(mu, nu);
    const std::size_t n = mu.size();
    if (n > cap) {
        throw DomainError("w2: " + std::to_string(n) + " atoms exceeds the exact-solver cap of " +
                          std::to_string(cap));
    }
    std::vector<double> cost(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double dist = sup_distance(mu[i], nu[j]);
            cost[i * n + j] = dist * dist;
        }
    }
    const Assignment a = solve_assignment(cost, n);
    // Summing the matched costs in sorted order makes w2(mu, nu) == w2(nu, mu) bitwise.
    std::vector<double> matched(n);
    for (std::size_t i = 0; i < n; ++i) matched[i] = cost[i * n + a.row_to_col[i]];
    std::sort(matched.begin(), matched.end());
    double total = 0.0;
    for (double c : matched) total += c;
    return std::sqrt(total / static_cast<double>(n));
}

DominanceWitness stochastic_leq(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    require_equal_sizes(mu, nu);
    const std::size_t n = mu.size();
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (leq(mu[i], nu[j])) adj[i].push_back(j);
        }
    }
    auto match = max_bipartite_matching(adj, n);
    DominanceWitness w;
    w.holds = std::none_of(match.begin(), match.end(), [](std::size_t j) { return j == kUnmatched; });
    if (w.holds) w.matching = std::move(match);
    return w;
}

bool stochastic_leq(const WeightedMeasure& mu_in, const WeightedMeasure& nu_in, double tol) {
    require_same_shape(mu_in.dim(), mu_in.cols(), nu_in.dim(), nu_in.cols());
    const WeightedMeasure mu = mu_in.merged();
    const WeightedMeasure nu = nu_in.merged();
    const std::size_t n = mu.size(), m = nu.size();
    const std::size_t source = n + m, sink = n + m + 1;
    FlowNetwork net(n + m + 2);
    for (std::size_t i = 0; i < n; ++i) net.add_edge(source, i, mu.weights()[i]);
    for (std::size_t j = 0; j < m; ++j) net.add_edge(n + j, sink, nu.weights()[j]);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (leq(mu.atoms()[i], nu.atoms()[j])) net.add_edge(i, n + j, 2.0);
        }
    }
    return net.max_flow(source, sink) >= 1.0 - tol;
}

Coupling monotone_coupling(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    const DominanceWitness w = stochastic_leq(mu, nu);
    if (!w.holds) throw DomainError("monotone_coupling: mu is not stochastically dominated by nu");
    const double weight = 1.0 / static_cast<double>(mu.size());
    std::vector<CouplingPair> pairs;
    pairs.reserve(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) pairs.push_back({mu[i], nu[(*w.matching)[i]], weight});
    return Coupling(std::move(pairs));
}

Coupling mixture_coupling(const Coupling& pi0, const PathSegment& xi, const PathSegment& eta, double eps) {
    if (!(eps >= 0.0 && eps < 1.0)) throw DomainError("mixture_coupling: eps must lie in [0, 1)");
    require_same_shape(xi.dim(), xi.cols(), pi0.dim(), pi0.cols());
    require_same_shape(eta.dim(), eta.cols(), pi0.dim(), pi0.cols());
    if (eps == 0.0) return pi0;
    std::vector<CouplingPair> pairs = pi0.pairs();
    for (auto& p : pairs) p.weight *= (1.0 - eps);
    pairs.push_back({xi, eta, eps});
    return Coupling(std::move(pairs));
}

Marginals marginals(const Coupling& pi) {
    std::vector<PathSegment> left, right;
    std::vector<double> w;
    for (const auto& p : pi.pairs()) {
        left.push_back(p.left);
        right.push_back(p.right);
        w.push_back(p.weight);
    }
    return {WeightedMeasure(std::move(left), w), WeightedMeasure(std::move(right), w)};
}

MeetPushforward meet_pushforward(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, std::size_t cap,
                                 std::uint64_t seed) {
    require_same_shape(mu.dim(), mu.cols(), nu.dim(), nu.cols());
    if (cap == 0) throw DomainError("meet_pushforward: cap must be positive");
    const std::size_t n = mu.size(), m = nu.size();
    MeetPushforward out{WeightedMeasure({mu[0]}, {1.0}), false, seed};
    std::vector<PathSegment> atoms;
    if (n * m <= cap) {
        atoms.reserve(n * m);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < m; ++j) atoms.push_back(meet(mu[i], nu[j]));
        }
    } else {
        rng::Stream stream(seed, 0x4D454554u);
        atoms.reserve(cap);
        for (std::size_t k = 0; k < cap; ++k) {
            const std::size_t i = stream.below(n);
            const std::size_t j = stream.below(m);
            atoms.push_back(meet(mu[i], nu[j]));
        }
        out.subsampled = true;
    }
    const double weight = 1.0 / static_cast<double>(atoms.size());
    std::vector<double> weights(atoms.size(), weight);
    out.measure = WeightedMeasure(std::move(atoms), std::move(weights));
    return out;
}

}  // namespace pdsde
