#include "pdsde/segments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "pdsde/error.hpp"
#include "pdsde/json_io.hpp"

namespace pdsde {

namespace {

constexpr double kGridTol = 1e-9;

// Nearest integer to x when x is within kGridTol of it (relative for large x).
bool near_integer(double x, double& rounded) {
    rounded = std::round(x);
    return std::abs(x - rounded) <= kGridTol * std::max(1.0, std::abs(rounded));
}

void require_same_shape(SegmentView a, SegmentView b) {
    if (a.dim != b.dim || a.cols != b.cols) {
        throw DimensionError("segment shape mismatch: (" + std::to_string(a.dim) + "x" +
                             std::to_string(a.cols) + ") vs (" + std::to_string(b.dim) + "x" +
                             std::to_string(b.cols) + ")");
    }
}

void require_finite(const std::vector<double>& v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw DomainError(std::string(what) + " has a non-finite entry");
    }
}

}  // namespace

TimeGrid::TimeGrid(double t0, double T, double dt, double r0)
    : t0_(t0), T_(T), dt_(dt), r0_(r0), r0_requested_(r0), lags_(0), steps_(0) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("grid: dt must be positive");
    if (!(r0 >= 0.0) || !std::isfinite(r0)) throw DomainError("grid: r0 must be >= 0");
    if (!(T > t0) || !std::isfinite(T) || !std::isfinite(t0)) {
        throw DomainError("grid: T must exceed t0");
    }
    double lags = 0.0;
    if (near_integer(r0 / dt, lags)) {
        lags_ = static_cast<std::size_t>(lags);
    } else {
        lags_ = static_cast<std::size_t>(std::ceil(r0 / dt));
        r0_ = static_cast<double>(lags_) * dt;
    }
    double steps = 0.0;
    if (!near_integer((T - t0) / dt, steps) || steps < 1.0) {
        throw DomainError("grid: T - t0 is not a multiple of dt");
    }
    steps_ = static_cast<std::size_t>(steps);
}

std::size_t TimeGrid::step_of(double t) const {
    double k = 0.0;
    if (!near_integer((t - t0_) / dt_, k)) throw DomainError("time is not on the grid");
    if (k < 0.0 || k > static_cast<double>(steps_)) {
        throw DomainError("window exits the trajectory domain");
    }
    return static_cast<std::size_t>(k);
}

std::size_t TimeGrid::column_of_lag(double theta) const {
    double j = 0.0;
    if (!near_integer((theta + r0_) / dt_, j)) throw DomainError("lag not on grid");
    if (j < 0.0 || j > static_cast<double>(lags_)) throw DomainError("lag outside [-r0, 0]");
    return static_cast<std::size_t>(j);
}

TimeGrid TimeGrid::with_end(double T) const {
    TimeGrid g(t0_, T, dt_, r0_);
    g.r0_requested_ = r0_requested_;
    return g;
}

PathSegment::PathSegment(std::size_t dim, std::size_t cols)
    : dim_(dim), cols_(cols), values_(dim * cols, 0.0) {
    if (dim == 0 || cols == 0) throw DimensionError("segment needs dim >= 1 and cols >= 1");
}

PathSegment::PathSegment(std::size_t dim, std::size_t cols, std::vector<double> values)
    : dim_(dim), cols_(cols), values_(std::move(values)) {
    if (dim == 0 || cols == 0) throw DimensionError("segment needs dim >= 1 and cols >= 1");
    if (values_.size() != dim * cols) throw DimensionError("segment value count mismatch");
    require_finite(values_, "segment");
}

PathSegment::PathSegment(SegmentView view)
    : PathSegment(view.dim, view.cols,
                  std::vector<double>(view.data, view.data + view.dim * view.cols)) {}

PathSegment PathSegment::constant(std::span<const double> value, std::size_t cols) {
    PathSegment s(value.size(), cols);
    for (std::size_t j = 0; j < cols; ++j) {
        for (std::size_t i = 0; i < value.size(); ++i) s(i, j) = value[i];
    }
    require_finite(s.values_, "segment");
    return s;
}

Trajectory::Trajectory(std::size_t dim, TimeGrid grid)
    : dim_(dim), grid_(grid), values_(dim * grid.trajectory_columns(), 0.0) {
    if (dim == 0) throw DimensionError("trajectory needs dim >= 1");
}

Trajectory::Trajectory(std::size_t dim, TimeGrid grid, std::vector<double> values)
    : dim_(dim), grid_(grid), values_(std::move(values)) {
    if (dim == 0) throw DimensionError("trajectory needs dim >= 1");
    if (values_.size() != dim * grid_.trajectory_columns()) {
        throw DimensionError("trajectory value count mismatch");
    }
    require_finite(values_, "trajectory");
}

bool leq(SegmentView xi, SegmentView eta) {
    require_same_shape(xi, eta);
    const std::size_t n = xi.dim * xi.cols;
    for (std::size_t k = 0; k < n; ++k) {
        if (!(xi.data[k] <= eta.data[k])) return false;
    }
    return true;
}

PathSegment meet(SegmentView xi, SegmentView eta) {
    require_same_shape(xi, eta);
    std::vector<double> v(xi.dim * xi.cols);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::min(xi.data[k], eta.data[k]);
    return PathSegment(xi.dim, xi.cols, std::move(v));
}

double sup_norm(SegmentView xi) noexcept {
    double best = 0.0;
    for (std::size_t j = 0; j < xi.cols; ++j) {
        double sq = 0.0;
        for (double x : xi.column(j)) sq += x * x;
        best = std::max(best, sq);
    }
    return std::sqrt(best);
}

double sup_distance(SegmentView xi, SegmentView eta) {
    require_same_shape(xi, eta);
    double best = 0.0;
    for (std::size_t j = 0; j < xi.cols; ++j) {
        double sq = 0.0;
        for (std::size_t i = 0; i < xi.dim; ++i) {
            const double diff = xi(i, j) - eta(i, j);
            sq += diff * diff;
        }
        best = std::max(best, sq);
    }
    return std::sqrt(best);
}

PathSegment segment_at(const Trajectory& traj, double t) {
    const std::size_t k = traj.grid().step_of(t);
    return PathSegment(traj.window(k));
}

std::string segment_to_json(const PathSegment& seg, double dt, double r0) {
    return segment_json(seg, dt, r0).dump();
}

PathSegment segment_from_json(const std::string& text) {
    return segment_from_json_value(parse_json_text(text));
}

namespace {

void append_number(std::string& out, double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out += buf;
}

}  // namespace

std::string segment_to_csv(const PathSegment& seg, double dt, double r0) {
    std::string out = "coord";
    for (std::size_t j = 0; j < seg.cols(); ++j) {
        out += ',';
        append_number(out, -r0 + static_cast<double>(j) * dt);
    }
    out += '\n';
    for (std::size_t i = 0; i < seg.dim(); ++i) {
        out += std::to_string(i + 1);
        for (std::size_t j = 0; j < seg.cols(); ++j) {
            out += ',';
            append_number(out, seg(i, j));
        }
        out += '\n';
    }
    return out;
}

std::string trajectory_to_csv(const Trajectory& traj) {
    std::string out = "coord";
    for (std::size_t c = 0; c < traj.cols(); ++c) {
        out += ',';
        append_number(out, traj.grid().time_at_column(c));
    }
    out += '\n';
    for (std::size_t i = 0; i < traj.dim(); ++i) {
        out += std::to_string(i + 1);
        for (std::size_t c = 0; c < traj.cols(); ++c) {
            out += ',';
            append_number(out, traj(i, c));
        }
        out += '\n';
    }
    return out;
}

}  // namespace pdsde
