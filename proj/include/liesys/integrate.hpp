#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace liesys {

using State = Eigen::VectorXd;

/// Right-hand side of a non-autonomous system dy/dt = f(t, y).
using Rhs = std::function<State(double, const State&)>;

/// Sampled solution with cubic Hermite dense output built from the stored
/// derivatives. Times are strictly increasing.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::vector<double> times, std::vector<State> states, std::vector<State> derivatives);

  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }
  int dimension() const noexcept { return empty() ? 0 : static_cast<int>(states_.front().size()); }

  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }

  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<State>& states() const noexcept { return states_; }
  const std::vector<State>& derivatives() const noexcept { return derivatives_; }

  /// Dense state at t; exact at sample times. Throws DomainError outside [t_begin, t_end].
  State at(double t) const;
  /// Dense derivative (derivative of the Hermite interpolant).
  State derivative_at(double t) const;
  double component(double t, int i) const { return at(t)(i); }

 private:
  std::size_t segment(double t) const;

  std::vector<double> times_;
  std::vector<State> states_;
  std::vector<State> derivatives_;
};

struct IntegratorOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double initial_step = 0.0;  // 0 selects automatically
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 5'000'000;
  /// Returns false when a state has left the admissible domain; integration aborts.
  std::function<bool(const State&)> domain_guard;
  std::string domain_message = "state left the admissible domain";
  /// Applied to each accepted state (e.g. projection back onto a constraint).
  std::function<void(State&)> project;
};

/// Adaptive Dormand-Prince 5(4) integration from t0 to t1 (either direction).
/// The returned trajectory is sorted by increasing time regardless of direction.
/// Throws IntegrationError on step-size underflow, step budget exhaustion, or
/// a domain-guard violation.
Trajectory integrate(const Rhs& rhs, const State& y0, double t0, double t1,
                     const IntegratorOptions& options = {});

/// Adaptive Simpson quadrature of f over [a, b] with estimated error <= tol.
/// Throws QuadratureError naming the abscissa of a non-finite sample.
double quadrature(const std::function<double(double)>& f, double a, double b, double tol = 1e-12);

/// Time-dependent squared frequency omega^2(t) with a printable label.
struct FrequencyProfile {
  std::function<double(double)> omega_squared;
  std::string description;

  double operator()(double t) const { return omega_squared(t); }

  static FrequencyProfile constant(double omega_squared);
  /// omega^2(t) = offset + amplitude * sin(t); the default is 2 + sin t.
  static FrequencyProfile sinusoidal(double offset = 2.0, double amplitude = 1.0);
  /// before for t < switch_time, after otherwise.
  static FrequencyProfile step(double switch_time, double before, double after);
  static FrequencyProfile custom(std::function<double(double)> fn, std::string label);
};

}  // namespace liesys
