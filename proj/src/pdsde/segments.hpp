#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace pdsde {

// Uniform time grid shared by segments and trajectories.
//
// Segments live on the lag grid theta_j = -r0 + j*dt, j = 0..lags. A run covers
// [t0, T] in `steps` Euler steps; the full trajectory domain is [t0 - r0, T].
class TimeGrid {
public:
    // r0 is rounded up to the next multiple of dt (see r0_adjusted()).
    // T - t0 must itself be a multiple of dt.
    TimeGrid(double t0, double T, double dt, double r0);

    double t0() const noexcept { return t0_; }
    double T() const noexcept { return T_; }
    double dt() const noexcept { return dt_; }
    double r0() const noexcept { return r0_; }
    double r0_requested() const noexcept { return r0_requested_; }
    bool r0_adjusted() const noexcept { return r0_ != r0_requested_; }

    std::size_t lags() const noexcept { return lags_; }
    std::size_t segment_columns() const noexcept { return lags_ + 1; }
    std::size_t steps() const noexcept { return steps_; }
    // Columns of a full trajectory over [t0 - r0, T].
    std::size_t trajectory_columns() const noexcept { return lags_ + steps_ + 1; }

    // Run time after k steps.
    double time_at_step(std::size_t k) const noexcept { return t0_ + static_cast<double>(k) * dt_; }
    // Time of trajectory column c.
    double time_at_column(std::size_t c) const noexcept {
        return t0_ - r0_ + static_cast<double>(c) * dt_;
    }
    double lag_at_column(std::size_t j) const noexcept {
        return -r0_ + static_cast<double>(j) * dt_;
    }

    // Step index k with t = t0 + k*dt; throws DomainError if t is off-grid or
    // outside [t0, T].
    std::size_t step_of(double t) const;

    // Segment column j with theta = -r0 + j*dt; throws DomainError when theta
    // is not a grid lag in [-r0, 0].
    std::size_t column_of_lag(double theta) const;

    // A grid sharing (t0, dt, r0) but ending at a different T.
    TimeGrid with_end(double T) const;

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    double t0_;
    double T_;
    double dt_;
    double r0_;
    double r0_requested_;
    std::size_t lags_;
    std::size_t steps_;
};

// Non-owning view of a d x cols column-major block; column j is the value of
// the path at lag -r0 + j*dt.
struct SegmentView {
    const double* data = nullptr;
    std::size_t dim = 0;
    std::size_t cols = 0;

    double operator()(std::size_t i, std::size_t j) const noexcept { return data[j * dim + i]; }
    std::span<const double> column(std::size_t j) const noexcept { return {data + j * dim, dim}; }
    double current(std::size_t i) const noexcept { return data[(cols - 1) * dim + i]; }
};

// An element of the discretized path space: d rows x (L+1) columns.
class PathSegment {
public:
    PathSegment() = default;
    // Zero segment.
    PathSegment(std::size_t dim, std::size_t cols);
    // Column-major values, size dim*cols. Throws DomainError on non-finite entries.
    PathSegment(std::size_t dim, std::size_t cols, std::vector<double> values);
    explicit PathSegment(SegmentView view);

    // Every column equal to `value` (size dim).
    static PathSegment constant(std::span<const double> value, std::size_t cols);
    static PathSegment constant(double value, std::size_t cols) {
        return constant(std::span<const double>(&value, 1), cols);
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t cols() const noexcept { return cols_; }

    double operator()(std::size_t i, std::size_t j) const noexcept { return values_[j * dim_ + i]; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return values_[j * dim_ + i]; }
    double current(std::size_t i) const noexcept { return (*this)(i, cols_ - 1); }

    const std::vector<double>& values() const noexcept { return values_; }
    SegmentView view() const noexcept { return {values_.data(), dim_, cols_}; }
    operator SegmentView() const noexcept { return view(); }

    friend bool operator==(const PathSegment&, const PathSegment&) = default;

private:
    std::size_t dim_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

// One path on [t0 - r0, T], sampled on the grid.
class Trajectory {
public:
    Trajectory(std::size_t dim, TimeGrid grid);
    Trajectory(std::size_t dim, TimeGrid grid, std::vector<double> values);

    std::size_t dim() const noexcept { return dim_; }
    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t cols() const noexcept { return grid_.trajectory_columns(); }

    double operator()(std::size_t i, std::size_t c) const noexcept { return values_[c * dim_ + i]; }
    double& operator()(std::size_t i, std::size_t c) noexcept { return values_[c * dim_ + i]; }
    const std::vector<double>& values() const noexcept { return values_; }

    // Window [t0 + k*dt - r0, t0 + k*dt].
    SegmentView window(std::size_t step) const noexcept {
        return {values_.data() + step * dim_, dim_, grid_.segment_columns()};
    }

private:
    std::size_t dim_;
    TimeGrid grid_;
    std::vector<double> values_;
};

// Componentwise order on the grid: xi(i, j) <= eta(i, j) for every entry.
bool leq(SegmentView xi, SegmentView eta);

PathSegment meet(SegmentView xi, SegmentView eta);

// max over columns of the Euclidean norm of the column.
double sup_norm(SegmentView xi) noexcept;

// sup_norm(xi - eta) without materializing the difference.
double sup_distance(SegmentView xi, SegmentView eta);

// The L+1 columns ending at time t.
PathSegment segment_at(const Trajectory& traj, double t);

// Serialization. JSON: {"dim", "dt", "r0", "values": [[row 1], ..., [row d]]}.
std::string segment_to_json(const PathSegment& seg, double dt, double r0);
PathSegment segment_from_json(const std::string& text);
// CSV: header "coord,<theta_0>,...", then one row per coordinate.
std::string segment_to_csv(const PathSegment& seg, double dt, double r0);
std::string trajectory_to_csv(const Trajectory& traj);

}  // namespace pdsde
