#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pdsde/segments.hpp"

namespace pdsde {

// Uniform-weight cloud of N segments of one shape.
class EmpiricalMeasure {
public:
    explicit EmpiricalMeasure(std::vector<PathSegment> atoms);

    std::size_t size() const noexcept { return atoms_.size(); }
    std::size_t dim() const noexcept { return atoms_.front().dim(); }
    std::size_t cols() const noexcept { return atoms_.front().cols(); }
    const std::vector<PathSegment>& atoms() const noexcept { return atoms_; }
    const PathSegment& operator[](std::size_t k) const noexcept { return atoms_[k]; }

    // Mean of sup_norm^2 over the atoms.
    double second_moment() const noexcept;

private:
    std::vector<PathSegment> atoms_;
};

// Finitely supported measure with positive weights summing to 1.
class WeightedMeasure {
public:
    WeightedMeasure(std::vector<PathSegment> atoms, std::vector<double> weights);
    static WeightedMeasure uniform(const EmpiricalMeasure& mu);

    std::size_t size() const noexcept { return atoms_.size(); }
    std::size_t dim() const noexcept { return atoms_.front().dim(); }
    std::size_t cols() const noexcept { return atoms_.front().cols(); }
    const std::vector<PathSegment>& atoms() const noexcept { return atoms_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

    // Same measure with bitwise-identical atoms combined (first-occurrence order).
    WeightedMeasure merged() const;

    // Index of the atom selected by a uniform draw u in [0, 1).
    std::size_t sample_index(double u) const noexcept;

private:
    std::vector<PathSegment> atoms_;
    std::vector<double> weights_;
    std::vector<double> cumulative_;
};

struct CouplingPair {
    PathSegment left;
    PathSegment right;
    double weight;
};

// Joint law on pairs of segments given as weighted atom pairs.
class Coupling {
public:
    explicit Coupling(std::vector<CouplingPair> pairs);

    std::size_t size() const noexcept { return pairs_.size(); }
    std::size_t dim() const noexcept { return pairs_.front().left.dim(); }
    std::size_t cols() const noexcept { return pairs_.front().left.cols(); }
    const std::vector<CouplingPair>& pairs() const noexcept { return pairs_; }

    // True when leq(left, right) for every pair.
    bool order_supported() const;

    std::size_t sample_index(double u) const noexcept;

private:
    std::vector<CouplingPair> pairs_;
    std::vector<double> cumulative_;
};

struct DominanceWitness {
    bool holds = false;
    // matching[i] = j pairs mu atom i with nu atom j; present iff holds.
    std::optional<std::vector<std::size_t>> matching;
};

inline constexpr std::size_t kDefaultAssignmentCap = 512;
inline constexpr std::size_t kDefaultMeetCap = 65536;

// Wasserstein-2 distance with sup-norm ground cost between equal-size clouds,
// solved exactly as a linear assignment.
double w2(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
          std::size_t cap = kDefaultAssignmentCap);

// mu <= nu in the stochastic order: a perfect matching on the leq graph.
DominanceWitness stochastic_leq(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

// Weighted generalization: a transport plan supported on {xi <= eta} exists,
// decided by max-flow feasibility.
bool stochastic_leq(const WeightedMeasure& mu, const WeightedMeasure& nu, double tol = 1e-9);

// The dominance matching as a coupling with weights 1/N.
Coupling monotone_coupling(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

// (1 - eps) * pi0 + eps * delta_(xi, eta).
Coupling mixture_coupling(const Coupling& pi0, const PathSegment& xi, const PathSegment& eta, double eps);

struct Marginals {
    WeightedMeasure left;
    WeightedMeasure right;
};

Marginals marginals(const Coupling& pi);

struct MeetPushforward {
    WeightedMeasure measure;
    bool subsampled = false;
    std::uint64_t seed = 0;
};

// Law of xi1 ^ xi2 under mu x nu; above `cap` product atoms, `cap` product
// pairs are drawn uniformly with a Philox stream keyed by `seed`.
MeetPushforward meet_pushforward(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                                 std::size_t cap = kDefaultMeetCap, std::uint64_t seed = 0);

}  // namespace pdsde
