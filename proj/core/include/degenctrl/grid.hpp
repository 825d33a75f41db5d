#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <vector>

namespace degenctrl {

/// Open interval (a, b) of the spatial domain.
struct Interval {
  double a = 0.0;
  double b = 1.0;

  [[nodiscard]] double length() const { return b - a; }
  [[nodiscard]] bool operator==(const Interval&) const = default;
};

/// Graded node set 0 = x_0 < ... < x_n = 1 with dual (finite-volume) cells.
///
/// Faces sit at arithmetic midpoints between nodes, plus the two endpoints,
/// so the dual-cell volumes double as composite-trapezoid weights.
class SpaceMesh {
 public:
  SpaceMesh(std::vector<double> nodes, double grading);

  [[nodiscard]] std::size_t cells() const { return nodes_.size() - 1; }
  [[nodiscard]] std::size_t size() const { return nodes_.size(); }
  [[nodiscard]] double grading() const { return grading_; }

  [[nodiscard]] double node(std::size_t i) const { return nodes_[i]; }
  [[nodiscard]] std::span<const double> nodes() const { return nodes_; }
  /// Face i separates node i-1 and node i; face 0 is x = 0, face n+1 is x = 1.
  [[nodiscard]] double face(std::size_t i) const { return faces_[i]; }
  [[nodiscard]] std::span<const double> faces() const { return faces_; }
  [[nodiscard]] double volume(std::size_t i) const { return volumes_[i]; }
  [[nodiscard]] std::span<const double> volumes() const { return volumes_; }
  /// Spacing x_{i+1} - x_i.
  [[nodiscard]] double spacing(std::size_t i) const { return nodes_[i + 1] - nodes_[i]; }
  [[nodiscard]] double max_volume() const;

 private:
  std::vector<double> nodes_;
  std::vector<double> faces_;
  std::vector<double> volumes_;
  double grading_;
};

/// Nodes x_i = (i/n)^grading. Throws InvalidArgument for n = 0 or grading < 1.
SpaceMesh make_graded_mesh(std::size_t n, double grading);

/// Uniform instants start = t_0 < ... < t_m = end.
class TimeGrid {
 public:
  TimeGrid(double start, double end, std::size_t steps);
  TimeGrid(double horizon, std::size_t steps) : TimeGrid(0.0, horizon, steps) {}

  [[nodiscard]] std::size_t steps() const { return steps_; }
  [[nodiscard]] std::size_t levels() const { return steps_ + 1; }
  [[nodiscard]] double start() const { return start_; }
  [[nodiscard]] double end() const { return end_; }
  [[nodiscard]] double dt() const { return dt_; }
  [[nodiscard]] double instant(std::size_t k) const;
  /// Midpoint of interval (t_{j-1}, t_j], j = 1..m.
  [[nodiscard]] double midpoint(std::size_t j) const;

 private:
  double start_;
  double end_;
  std::size_t steps_;
  double dt_;
};

/// Space-time discretization shared by all fields of one run.
struct Grid {
  std::shared_ptr<const SpaceMesh> mesh;
  TimeGrid time;

  [[nodiscard]] std::size_t nodes() const { return mesh->size(); }
  [[nodiscard]] std::size_t levels() const { return time.levels(); }
};

Grid make_grid(std::size_t n, double grading, double horizon, std::size_t steps);

/// Node-by-level scalar function; row k holds time level t_k.
class Field {
 public:
  explicit Field(Grid grid);
  Field(Grid grid, const std::function<double(double x, double t)>& fn);

  [[nodiscard]] const Grid& grid() const { return grid_; }
  [[nodiscard]] const SpaceMesh& mesh() const { return *grid_.mesh; }
  [[nodiscard]] const TimeGrid& time() const { return grid_.time; }
  [[nodiscard]] std::size_t nodes() const { return nodes_; }
  [[nodiscard]] std::size_t levels() const { return levels_; }

  double& operator()(std::size_t level, std::size_t node) { return values_[level * nodes_ + node]; }
  double operator()(std::size_t level, std::size_t node) const { return values_[level * nodes_ + node]; }

  std::span<double> level(std::size_t k) { return {values_.data() + k * nodes_, nodes_}; }
  [[nodiscard]] std::span<const double> level(std::size_t k) const {
    return {values_.data() + k * nodes_, nodes_};
  }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double factor);

 private:
  Grid grid_;
  std::size_t nodes_;
  std::size_t levels_;
  std::vector<double> values_;
};

Field operator+(Field lhs, const Field& rhs);
Field operator-(Field lhs, const Field& rhs);
Field operator*(double factor, Field rhs);

/// Values attached to the time intervals (t_{j-1}, t_j], j = 1..m; row j-1 holds interval j.
class IntervalField {
 public:
  explicit IntervalField(Grid grid);

  [[nodiscard]] const Grid& grid() const { return grid_; }
  [[nodiscard]] std::size_t nodes() const { return nodes_; }
  [[nodiscard]] std::size_t intervals() const { return intervals_; }

  /// Interval index j runs from 1 to m.
  double& operator()(std::size_t j, std::size_t node) { return values_[(j - 1) * nodes_ + node]; }
  double operator()(std::size_t j, std::size_t node) const { return values_[(j - 1) * nodes_ + node]; }
  std::span<double> interval(std::size_t j) { return {values_.data() + (j - 1) * nodes_, nodes_}; }
  [[nodiscard]] std::span<const double> interval(std::size_t j) const {
    return {values_.data() + (j - 1) * nodes_, nodes_};
  }

 private:
  Grid grid_;
  std::size_t nodes_;
  std::size_t intervals_;
  std::vector<double> values_;
};

/// (f(t_{j-1}) + f(t_j)) / 2 on every interval.
IntervalField midpoint_average(const Field& field);
/// f(t_j) on interval j, the implicit-Euler sampling.
IntervalField right_values(const Field& field);
/// (f(t_j) - f(t_{j-1})) / dt on every interval.
IntervalField time_difference(const Field& field);

using SpaceTimeFunction = std::function<double(double x, double t)>;

/// Composite trapezoid (space) x midpoint (time) quadrature of weight * field^2.
///
/// The field is averaged onto interval midpoints; the weight is only sampled at
/// midpoints, never at t_0 or t_m. Throws NumericalDomainError on a non-finite weight.
double integrate_qt(const Field& field, const SpaceTimeFunction& weight);
double integrate_qt(const IntervalField& field, const SpaceTimeFunction& weight);

/// log of int_Q e^{log_weight} field^2 with the field constant on each time
/// interval. Unlike integrate_qt the weight is integrated in time on a uniform
/// sub-grid fine enough to resolve its sharpest peak, since Carleman weights
/// concentrate on a time scale well below dt. Cells more than e^60 below the
/// total are dropped. A log-weight of -inf means an exact zero; +inf or NaN
/// throws NumericalDomainError.
double log_integrate_qt(const IntervalField& field, const SpaceTimeFunction& log_weight);

/// Streaming log-sum-exp accumulator.
class LogSum {
 public:
  void add(double log_term);
  [[nodiscard]] double value() const;

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double scaled_ = 0.0;
};

/// Fraction of each node's dual cell lying inside omega.
std::vector<double> omega_mask(const SpaceMesh& mesh, Interval omega);

/// Multiplies every level by omega_mask. Throws InvalidArgument unless
/// omega is a nonempty subinterval of [0, 1].
Field restrict_to_omega(const Field& field, Interval omega);

void validate_interval(Interval omega);

/// sum_i vol_i a_i b_i.
double vol_dot(const SpaceMesh& mesh, std::span<const double> a, std::span<const double> b);
double vol_norm(const SpaceMesh& mesh, std::span<const double> a);

/// Space-time discrete L2 norm: sqrt(dt * sum over levels 1..m of |f(t_k)|^2).
double l2_qt(const Field& field);

}  // namespace degenctrl
