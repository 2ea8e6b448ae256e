#include "liesys/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "liesys/errors.hpp"
#include "liesys/sweep.hpp"

namespace liesys {

double angular_momentum(double x1, double v1, double x2, double v2) { return x1 * v2 - x2 * v1; }

double lewis_ermakov(double x, double y, double vx, double vy) {
  if (y == 0.0) throw SingularityError("lewis_ermakov: y = 0");
  const double ratio = x / y;
  const double xi = x * vy - y * vx;
  return ratio * ratio + xi * xi;
}

PairInvariants ermakov_pair_invariants(const State& s, double k) {
  if (s.size() != 6) throw DimensionError("ermakov_pair_invariants: expected (x, y, z, vx, vy, vz)");
  const double x = s(0), y = s(1), z = s(2), vx = s(3), vy = s(4), vz = s(5);
  if (x == 0.0) throw SingularityError("ermakov_pair_invariants: x = 0");
  const double a = y * vx - x * vy;
  const double b = x * vz - z * vx;
  const double yx = y / x, zx = z / x;
  return {0.5 * (a * a + k * yx * yx), 0.5 * (b * b + k * zx * zx), y * vz - z * vy};
}

double generalized_invariant(double x, double y, double vx, double vy, const ShapeFunctions& shapes,
                             double quad_tol) {
  if (x == 0.0) throw SingularityError("generalized_invariant: x = 0");
  if (y == 0.0) throw SingularityError("generalized_invariant: y = 0");
  const double xi = x * vy - y * vx;
  const double u = x / y;
  const auto integrand = [&shapes](double s) {
    const double inv = 1.0 / s;
    return -shapes.f(inv) / (s * s * s) + s * shapes.g(inv);
  };
  return 0.5 * xi * xi + quadrature(integrand, 1.0, u, quad_tol);
}

std::vector<double> InvariantSeries::running_drift() const {
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(std::abs(v - values.front()));
  return out;
}

namespace {

InvariantSeries build(const std::string& name, const std::vector<double>& times, const SweepValues& sweep) {
  InvariantSeries series;
  series.name = name;
  const std::size_t n = sweep.first_failure.value_or(times.size());
  series.times.assign(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(n));
  series.values.assign(sweep.values.begin(), sweep.values.begin() + static_cast<std::ptrdiff_t>(n));
  if (sweep.first_failure) {
    series.singular_at = times[*sweep.first_failure];
    series.singular_message = sweep.failure_message;
  }
  if (!series.values.empty()) {
    const double v0 = series.values.front();
    for (double v : series.values) series.drift_abs = std::max(series.drift_abs, std::abs(v - v0));
    series.drift_rel = series.drift_abs / std::max(1.0, std::abs(v0));
  }
  return series;
}

}  // namespace

InvariantSeries drift(const Trajectory& traj, const LabeledInvariant& invariant) {
  return build(invariant.name, traj.times(), parallel::evaluate(traj.states(), invariant.fn));
}

InvariantSeries drift(const Trajectory& a, const Trajectory& b, const LabeledInvariant& invariant) {
  std::vector<State> joint;
  joint.reserve(a.size());
  const int na = a.dimension(), nb = b.dimension();
  for (std::size_t i = 0; i < a.size(); ++i) {
    State s(na + nb);
    s << a.states()[i], b.at(a.times()[i]);
    joint.push_back(std::move(s));
  }
  return build(invariant.name, a.times(), parallel::evaluate(joint, invariant.fn));
}

namespace {

State flow(const VectorField& x, State p, double s, int substeps) {
  const double h = s / substeps;
  for (int i = 0; i < substeps; ++i) {
    const State k1 = x(p);
    const State k2 = x(State(p + 0.5 * h * k1));
    const State k3 = x(State(p + 0.5 * h * k2));
    const State k4 = x(State(p + h * k3));
    p += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return p;
}

}  // namespace

double lie_derivative(const std::function<double(const State&)>& f, const VectorField& x, const State& p,
                      double h) {
  if (!(h > 0.0)) throw DomainError("lie_derivative: step must be positive", h);
  const State plus = flow(x, p, h, 4);
  const State minus = flow(x, p, -h, 4);
  return (f(plus) - f(minus)) / (2.0 * h);
}

}  // namespace liesys
