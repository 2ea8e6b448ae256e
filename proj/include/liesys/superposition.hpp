#pragma once

#include "liesys/integrate.hpp"
#include "liesys/invariants.hpp"
#include "liesys/systems.hpp"

namespace liesys {

struct PhasePoint {
  double x;
  double v;
};

struct Keys {
  double k1;
  double k2;
};

/// General oscillator solution from two independent ones:
/// x = (k1 x1 + k2 x2)/k, v = (k1 v1 + k2 v2)/k, k = x1 v2 - x2 v1.
/// Throws DependentSolutionsError when k = 0.
PhasePoint linear_rule(double x1, double v1, double x2, double v2, double k1, double k2);

/// Inverse of linear_rule: k1 = x v2 - x2 v, k2 = x1 v - v1 x.
Keys keys_from(double x, double v, double x1, double v1, double x2, double v2);

/// x2(t) = k' x1(t) + k x1(t) int_{t0}^t ds / x1(s)^2, t0 = x1.t_begin().
/// Throws QuadratureError when x1 vanishes in the window.
double quadrature_rule(const Trajectory& x1, double k_prime, double k, double t);

/// Same rule on every sample time of x1, with the integral accumulated
/// segment by segment. Returns (x, v) states with exact derivatives.
Trajectory quadrature_rule_series(const Trajectory& x1, double k_prime, double k);

enum class Branch { plus, minus };

inline double sign_of(Branch b) { return b == Branch::plus ? 1.0 : -1.0; }

struct PinneyValue {
  double x;    // |raw| placed in the chosen half-plane
  double v;    // dx/dt consistent with x
  double raw;  // sqrt(2)/W * sqrt(...) with its own sign
};

/// Pinney's rule x = sqrt(2)/W (I2 y^2 + I1 z^2 +- sqrt(4 I1 I2 - k W^2) y z)^(1/2).
/// Throws DependentSolutionsError at W = 0 and DomainError on a negative
/// discriminant or radicand.
PinneyValue pinney_rule(double y, double vy, double z, double vz, double I1, double I2, double W, double k,
                        Branch branch, HalfPlane half = HalfPlane::positive);

struct PinneyReconstruction {
  Trajectory trajectory;  // (x, v) on the sample grid of the y trajectory
  PairInvariants invariants;
  Branch branch;
};

/// Milne-Pinney solution through (x0, v0) at y.t_begin() from two oscillator
/// solutions y, z (states (q, dq/dt)). The branch is fixed at the initial time.
PinneyReconstruction pinney_rule_from_solutions(const Trajectory& y, const Trajectory& z, double x0, double v0,
                                                double k, HalfPlane half = HalfPlane::positive);

}  // namespace liesys
