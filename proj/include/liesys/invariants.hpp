#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "liesys/integrate.hpp"
#include "liesys/systems.hpp"

namespace liesys {

/// x1 v2 - x2 v1
double angular_momentum(double x1, double v1, double x2, double v2);

/// (x/y)^2 + (x vy - y vx)^2. Throws SingularityError at y = 0.
double lewis_ermakov(double x, double y, double vx, double vy);

struct PairInvariants {
  double I1;
  double I2;
  double W;
};

/// Ermakov invariants of the (x,y) and (x,z) pairs and the Wronskian of (y,z),
/// for a state ordered (x, y, z, vx, vy, vz). Throws SingularityError at x = 0.
PairInvariants ermakov_pair_invariants(const State& state, double k);

/// 1/2 (x vy - y vx)^2 + int_1^{x/y} [-f(1/s)/s^3 + s g(1/s)] ds.
/// Throws SingularityError at x = 0 or y = 0, QuadratureError if the path is singular.
double generalized_invariant(double x, double y, double vx, double vy, const ShapeFunctions& shapes,
                             double quad_tol = 1e-12);

/// A named scalar function of a (possibly concatenated) state.
struct LabeledInvariant {
  std::string name;
  std::function<double(const State&)> fn;
};

struct InvariantSeries {
  std::string name;
  std::vector<double> times;
  std::vector<double> values;
  double drift_abs = 0.0;
  double drift_rel = 0.0;
  /// Set when the invariant was singular at some sample; the series stops there.
  std::optional<double> singular_at;
  std::string singular_message;

  bool partial() const noexcept { return singular_at.has_value(); }
  /// |value_i - value_0| for each sample.
  std::vector<double> running_drift() const;
};

/// Evaluates the invariant at every sample and fills the drift statistics.
InvariantSeries drift(const Trajectory& traj, const LabeledInvariant& invariant);
/// Pair version: the invariant sees a's state followed by b's dense state at a's sample times.
InvariantSeries drift(const Trajectory& a, const Trajectory& b, const LabeledInvariant& invariant);

/// Directional derivative of F along the flow of X at p:
/// (F(phi_h(p)) - F(phi_{-h}(p))) / 2h, with phi integrated by RK4 substeps.
double lie_derivative(const std::function<double(const State&)>& f, const VectorField& x, const State& p,
                      double h = 1e-4);

}  // namespace liesys
