#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pdsde/measures.hpp"
#include "pdsde/segments.hpp"

namespace pdsde {

// Measure terminals an expression needs: E[x[i](theta)] as (coordinate,
// column) pairs, plus E[supnorm].
struct MeasureTerminals {
    std::vector<std::pair<std::size_t, std::size_t>> means;
    bool supnorm = false;

    void merge(const MeasureTerminals& other);
    bool empty() const noexcept { return means.empty() && !supnorm; }
};

// Moments of a law restricted to the terminals some expression reads.
class LawMoments {
public:
    LawMoments() = default;

    // Uniform weights over `atoms`.
    static LawMoments compute(const MeasureTerminals& need, std::span<const SegmentView> atoms);
    static LawMoments compute(const MeasureTerminals& need, std::span<const SegmentView> atoms,
                              std::span<const double> weights);
    static LawMoments compute(const MeasureTerminals& need, const EmpiricalMeasure& law);
    static LawMoments compute(const MeasureTerminals& need, const WeightedMeasure& law);

    double mean(std::size_t coord, std::size_t col) const;
    double supnorm() const;

private:
    std::size_t dim_ = 0;
    std::vector<double> means_;  // dim x cols, NaN where not requested
    double supnorm_ = 0.0;
    bool has_supnorm_ = false;
};

// Parsed coefficient expression. Immutable after parsing; eval is reentrant.
class CoeffExpr {
public:
    enum class Op : std::uint8_t {
        Number, Time, Lag, MeanLag, MeanSupnorm,
        Add, Sub, Mul, Div, Neg, Min, Max, Exp, Tanh, Abs,
    };

    struct Node {
        Op op;
        std::uint32_t a = 0;  // first child, or coordinate (0-based) for lag terminals
        std::uint32_t b = 0;  // second child, or grid column for lag terminals
        double value = 0.0;   // literal, or the lag theta as written
    };

    std::size_t dim() const noexcept { return dim_; }
    std::size_t cols() const noexcept { return cols_; }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    std::uint32_t root() const noexcept { return root_; }
    const MeasureTerminals& terminals() const noexcept { return terminals_; }

    double eval(double t, SegmentView seg, const LawMoments& law) const;

    // Fully parenthesized canonical form; parsing it yields the same tree.
    std::string print() const;

    // True when the only segment terminal is x[coord](0) and there are no
    // measure terminals (the diffusion-structure shape).
    bool depends_only_on_current(std::size_t coord) const;

    // Builder use only.
    CoeffExpr(std::size_t dim, std::size_t cols, std::vector<Node> nodes, std::uint32_t root);

private:
    double eval_node(std::uint32_t k, double t, SegmentView seg, const LawMoments& law) const;
    void print_node(std::uint32_t k, std::string& out) const;

    std::size_t dim_;
    std::size_t cols_;
    std::vector<Node> nodes_;
    std::uint32_t root_;
    MeasureTerminals terminals_;
};

inline constexpr std::size_t kMaxExprDepth = 64;

// Grammar (whitespace insignificant):
//   expr    := term (('+'|'-') term)*
//   term    := factor (('*'|'/') factor)*
//   factor  := number | 't' | lagref | measref | func '(' expr (',' expr)? ')' | '(' expr ')' | '-' factor
//   lagref  := 'x[' int '](' signed-number ')'
//   measref := 'E[x[' int '](' signed-number ')]' | 'E[supnorm]'
//   func    := 'min' | 'max' | 'exp' | 'tanh' | 'abs'
// Coordinates are 1-based; lags must be grid points in [-r0, 0].
CoeffExpr parse_coeff(std::string_view src, std::size_t dim, const TimeGrid& grid);

// Evaluate against an explicit law (moments computed on the fly).
double eval_coeff(const CoeffExpr& expr, double t, SegmentView seg, const EmpiricalMeasure& law);
double eval_coeff(const CoeffExpr& expr, double t, SegmentView seg, const WeightedMeasure& law);

// Drift b (d entries) and diffusion sigma (d x m, row-major) of one system.
class CoeffModel {
public:
    CoeffModel(std::size_t dim, std::size_t noise_dim, std::vector<CoeffExpr> drift,
               std::vector<CoeffExpr> diffusion);

    static CoeffModel parse(std::span<const std::string> drift, std::span<const std::string> diffusion,
                            std::size_t dim, std::size_t noise_dim, const TimeGrid& grid);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t noise_dim() const noexcept { return noise_dim_; }
    const CoeffExpr& drift(std::size_t i) const noexcept { return drift_[i]; }
    const CoeffExpr& diffusion(std::size_t i, std::size_t j) const noexcept { return diffusion_[i * noise_dim_ + j]; }
    const std::vector<CoeffExpr>& drift() const noexcept { return drift_; }
    const std::vector<CoeffExpr>& diffusion() const noexcept { return diffusion_; }
    const MeasureTerminals& terminals() const noexcept { return terminals_; }

    // Canonical text: drift then diffusion rows, one expression per line.
    std::string canonical() const;

private:
    std::size_t dim_;
    std::size_t noise_dim_;
    std::vector<CoeffExpr> drift_;
    std::vector<CoeffExpr> diffusion_;
    MeasureTerminals terminals_;
};

// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string model_hash(const CoeffModel& model);
std::string fnv1a_hex(std::string_view text);

}  // namespace pdsde
