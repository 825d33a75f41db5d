#include "degenctrl/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "degenctrl/errors.hpp"

namespace degenctrl {

SpaceMesh::SpaceMesh(std::vector<double> nodes, double grading)
    : nodes_(std::move(nodes)), grading_(grading) {
  if (nodes_.size() < 2) throw InvalidArgument("mesh needs at least two nodes");
  if (nodes_.front() != 0.0 || nodes_.back() != 1.0)
    throw InvalidArgument("mesh must span [0, 1] exactly");
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (!(nodes_[i] > nodes_[i - 1])) throw InvalidArgument("mesh nodes must be strictly increasing");
  }
  const std::size_t n = nodes_.size() - 1;
  faces_.resize(n + 2);
  faces_.front() = 0.0;
  faces_.back() = 1.0;
  for (std::size_t i = 1; i <= n; ++i) faces_[i] = 0.5 * (nodes_[i - 1] + nodes_[i]);
  volumes_.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) volumes_[i] = faces_[i + 1] - faces_[i];
}

double SpaceMesh::max_volume() const { return *std::max_element(volumes_.begin(), volumes_.end()); }

SpaceMesh make_graded_mesh(std::size_t n, double grading) {
  if (n == 0) throw InvalidArgument("mesh size n must be positive");
  if (!(grading >= 1.0)) throw InvalidArgument("grading exponent must be >= 1");
  std::vector<double> nodes(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    nodes[i] = std::pow(static_cast<double>(i) / static_cast<double>(n), grading);
  }
  nodes.front() = 0.0;
  nodes.back() = 1.0;
  return SpaceMesh(std::move(nodes), grading);
}

TimeGrid::TimeGrid(double start, double end, std::size_t steps)
    : start_(start), end_(end), steps_(steps), dt_((end - start) / static_cast<double>(steps)) {
  if (steps == 0) throw InvalidArgument("time grid needs at least one step");
  if (!(end > start)) throw InvalidArgument("time horizon must be positive");
}

double TimeGrid::instant(std::size_t k) const {
  if (k == steps_) return end_;
  return start_ + static_cast<double>(k) * dt_;
}

double TimeGrid::midpoint(std::size_t j) const {
  return start_ + (static_cast<double>(j) - 0.5) * dt_;
}

Grid make_grid(std::size_t n, double grading, double horizon, std::size_t steps) {
  return Grid{std::make_shared<const SpaceMesh>(make_graded_mesh(n, grading)), TimeGrid(horizon, steps)};
}

Field::Field(Grid grid)
    : grid_(std::move(grid)),
      nodes_(grid_.nodes()),
      levels_(grid_.levels()),
      values_(nodes_ * levels_, 0.0) {}

Field::Field(Grid grid, const std::function<double(double, double)>& fn) : Field(std::move(grid)) {
  for (std::size_t k = 0; k < levels_; ++k) {
    const double t = grid_.time.instant(k);
    for (std::size_t i = 0; i < nodes_; ++i) (*this)(k, i) = fn(grid_.mesh->node(i), t);
  }
}

namespace {
void check_same_shape(const Field& a, const Field& b) {
  if (a.nodes() != b.nodes() || a.levels() != b.levels())
    throw InvalidArgument("field dimensions do not match");
}
}  // namespace

Field& Field::operator+=(const Field& other) {
  check_same_shape(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  check_same_shape(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Field& Field::operator*=(double factor) {
  for (double& v : values_) v *= factor;
  return *this;
}

Field operator+(Field lhs, const Field& rhs) { return lhs += rhs; }
Field operator-(Field lhs, const Field& rhs) { return lhs -= rhs; }
Field operator*(double factor, Field rhs) { return rhs *= factor; }

IntervalField::IntervalField(Grid grid)
    : grid_(std::move(grid)),
      nodes_(grid_.nodes()),
      intervals_(grid_.time.steps()),
      values_(nodes_ * intervals_, 0.0) {}

IntervalField midpoint_average(const Field& field) {
  IntervalField out(field.grid());
  for (std::size_t j = 1; j <= out.intervals(); ++j) {
    for (std::size_t i = 0; i < out.nodes(); ++i) out(j, i) = 0.5 * (field(j - 1, i) + field(j, i));
  }
  return out;
}

IntervalField right_values(const Field& field) {
  IntervalField out(field.grid());
  for (std::size_t j = 1; j <= out.intervals(); ++j) {
    for (std::size_t i = 0; i < out.nodes(); ++i) out(j, i) = field(j, i);
  }
  return out;
}

IntervalField time_difference(const Field& field) {
  IntervalField out(field.grid());
  const double inv_dt = 1.0 / field.time().dt();
  for (std::size_t j = 1; j <= out.intervals(); ++j) {
    for (std::size_t i = 0; i < out.nodes(); ++i) out(j, i) = (field(j, i) - field(j - 1, i)) * inv_dt;
  }
  return out;
}

double integrate_qt(const Field& field, const SpaceTimeFunction& weight) {
  return integrate_qt(midpoint_average(field), weight);
}

double integrate_qt(const IntervalField& field, const SpaceTimeFunction& weight) {
  const SpaceMesh& mesh = *field.grid().mesh;
  const TimeGrid& time = field.grid().time;
  double total = 0.0;
  for (std::size_t j = 1; j <= field.intervals(); ++j) {
    const double t = time.midpoint(j);
    double slice = 0.0;
    for (std::size_t i = 0; i < field.nodes(); ++i) {
      const double value = field(j, i);
      if (value == 0.0) continue;
      const double w = weight(mesh.node(i), t);
      if (!std::isfinite(w)) {
        throw NumericalDomainError("non-finite weight at x=" + std::to_string(mesh.node(i)) +
                                   ", t=" + std::to_string(t));
      }
      slice += mesh.volume(i) * w * value * value;
    }
    total += time.dt() * slice;
  }
  return total;
}

void LogSum::add(double log_term) {
  if (log_term == -std::numeric_limits<double>::infinity()) return;
  if (log_term > max_) {
    scaled_ = scaled_ * std::exp(max_ - log_term) + 1.0;
    max_ = log_term;
  } else {
    scaled_ += std::exp(log_term - max_);
  }
}

double LogSum::value() const {
  if (scaled_ == 0.0) return -std::numeric_limits<double>::infinity();
  return max_ + std::log(scaled_);
}

double log_integrate_qt(const IntervalField& field, const SpaceTimeFunction& log_weight) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  constexpr double kNegligible = 60.0;
  constexpr std::size_t kMaxSub = 4096;
  const SpaceMesh& mesh = *field.grid().mesh;
  const TimeGrid& time = field.grid().time;
  const double dt = time.dt();
  const double log_dt = std::log(dt);
  const std::size_t nodes = field.nodes();

  const auto eval = [&](double x, double t) {
    const double lw = log_weight(x, t);
    if (std::isnan(lw) || lw == std::numeric_limits<double>::infinity()) {
      throw NumericalDomainError("non-finite log-weight at x=" + std::to_string(x) + ", t=" + std::to_string(t));
    }
    return lw;
  };

  // Pass 1: midpoint estimate, best quarter-point sample and curvature per cell.
  struct Cell {
    double base;
    double bound;
    double curvature;
  };
  std::vector<Cell> cells(field.intervals() * nodes, Cell{kNegInf, kNegInf, 0.0});
  LogSum coarse;
  for (std::size_t j = 1; j <= field.intervals(); ++j) {
    const double mid = time.midpoint(j);
    for (std::size_t i = 0; i < nodes; ++i) {
      const double value = field(j, i);
      if (value == 0.0) continue;
      const double x = mesh.node(i);
      const double lm = eval(x, mid);
      if (lm == kNegInf) continue;
      const double l1 = eval(x, mid - 0.25 * dt);
      const double l3 = eval(x, mid + 0.25 * dt);
      const double base = log_dt + std::log(mesh.volume(i)) + 2.0 * std::log(std::abs(value));
      Cell& c = cells[(j - 1) * nodes + i];
      c.base = base;
      c.bound = base + std::max({l1, lm, l3});
      c.curvature = (l1 == kNegInf || l3 == kNegInf) ? 0.0 : std::abs(l1 + l3 - 2.0 * lm);
      coarse.add(base + lm);
    }
  }
  const double level = coarse.value();
  if (level == kNegInf) return kNegInf;

  // Uniform sub-spacing over the cells that matter, about half the width of
  // the sharpest weight peak among them.
  double worst = 0.0;
  for (const Cell& c : cells) {
    if (c.bound >= level - kNegligible) worst = std::max(worst, c.curvature);
  }
  const std::size_t sub = std::isfinite(worst)
                              ? std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(8.0 * std::sqrt(worst))), 1, kMaxSub)
                              : kMaxSub;

  // Pass 2.
  LogSum sum;
  const double log_sub = std::log(static_cast<double>(sub));
  for (std::size_t j = 1; j <= field.intervals(); ++j) {
    const double start = time.instant(j - 1);
    for (std::size_t i = 0; i < nodes; ++i) {
      const Cell& c = cells[(j - 1) * nodes + i];
      if (c.base == kNegInf || c.bound < level - kNegligible) continue;
      const double x = mesh.node(i);
      for (std::size_t k = 0; k < sub; ++k) {
        const double t = start + (static_cast<double>(k) + 0.5) * dt / static_cast<double>(sub);
        const double lw = eval(x, t);
        if (lw != kNegInf) sum.add(c.base + lw - log_sub);
      }
    }
  }
  return sum.value();
}

void validate_interval(Interval omega) {
  if (!(omega.a < omega.b)) throw InvalidArgument("invalid interval: requires a < b");
  if (omega.a < 0.0 || omega.b > 1.0) throw InvalidArgument("invalid interval: must lie within [0, 1]");
}

std::vector<double> omega_mask(const SpaceMesh& mesh, Interval omega) {
  validate_interval(omega);
  std::vector<double> mask(mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const double lo = std::max(mesh.face(i), omega.a);
    const double hi = std::min(mesh.face(i + 1), omega.b);
    mask[i] = hi > lo ? (hi - lo) / mesh.volume(i) : 0.0;
    if (mask[i] > 1.0 - 1e-14) mask[i] = 1.0;
  }
  return mask;
}

Field restrict_to_omega(const Field& field, Interval omega) {
  const std::vector<double> mask = omega_mask(field.mesh(), omega);
  Field out = field;
  for (std::size_t k = 0; k < out.levels(); ++k) {
    auto row = out.level(k);
    for (std::size_t i = 0; i < row.size(); ++i) row[i] *= mask[i];
  }
  return out;
}

double vol_dot(const SpaceMesh& mesh, std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += mesh.volume(i) * a[i] * b[i];
  return sum;
}

double vol_norm(const SpaceMesh& mesh, std::span<const double> a) { return std::sqrt(vol_dot(mesh, a, a)); }

double l2_qt(const Field& field) {
  double sum = 0.0;
  for (std::size_t k = 1; k < field.levels(); ++k) {
    sum += vol_dot(field.mesh(), field.level(k), field.level(k));
  }
  return std::sqrt(field.time().dt() * sum);
}

}  // namespace degenctrl
