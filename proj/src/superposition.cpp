#include "liesys/superposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "liesys/errors.hpp"

namespace liesys {

PhasePoint linear_rule(double x1, double v1, double x2, double v2, double k1, double k2) {
  const double k = x1 * v2 - x2 * v1;
  if (k == 0.0) throw DependentSolutionsError("linear_rule: solutions are dependent (x1 v2 - x2 v1 = 0)");
  const double c1 = k1 / k, c2 = k2 / k;
  return {c1 * x1 + c2 * x2, c1 * v1 + c2 * v2};
}

Keys keys_from(double x, double v, double x1, double v1, double x2, double v2) {
  return {x * v2 - x2 * v, x1 * v - v1 * x};
}

namespace {

// x1 must not change sign between t0 and t; checked on the stored samples so
// a zero crossing is reported before quadrature chases the pole.
void require_nonvanishing(const Trajectory& x1, double t) {
  const double s0 = x1.states().front()(0);
  if (s0 == 0.0) throw QuadratureError("particular solution vanishes at the initial time", x1.t_begin());
  for (std::size_t i = 0; i < x1.size() && x1.times()[i] <= t; ++i) {
    if (x1.states()[i](0) * s0 <= 0.0) {
      throw QuadratureError("particular solution vanishes inside the quadrature window", x1.times()[i]);
    }
  }
}

}  // namespace

double quadrature_rule(const Trajectory& x1, double k_prime, double k, double t) {
  require_nonvanishing(x1, t);
  const State s = x1.at(t);
  if (k == 0.0) return k_prime * s(0);
  const double integral = quadrature(
      [&x1](double z) {
        const double q = x1.at(z)(0);
        return 1.0 / (q * q);
      },
      x1.t_begin(), t, 1e-12);
  return k_prime * s(0) + k * s(0) * integral;
}

Trajectory quadrature_rule_series(const Trajectory& x1, double k_prime, double k) {
  require_nonvanishing(x1, x1.t_end());
  std::vector<State> states, derivs;
  states.reserve(x1.size());
  derivs.reserve(x1.size());
  for (std::size_t i = 0; i < x1.size(); ++i) {
    const double t = x1.times()[i];
    const double q = x1.states()[i](0), dq = x1.states()[i](1), ddq = x1.derivatives()[i](1);
    const double x = quadrature_rule(x1, k_prime, k, t);
    // x = q c(t) with c' = k/q^2, so v = dq c + k/q and dv/dt = ddq c.
    const double c = x / q;
    const double v = dq * c + k / q;
    State s(2), d(2);
    s << x, v;
    d << v, ddq * c;
    states.push_back(std::move(s));
    derivs.push_back(std::move(d));
  }
  return Trajectory(x1.times(), std::move(states), std::move(derivs));
}

namespace {

double slack(double scale) { return 1e-12 * std::max(1.0, std::abs(scale)); }

struct PinneyParts {
  double discriminant_root;
  double radicand;
};

PinneyParts pinney_parts(double y, double z, double I1, double I2, double W, double k, Branch branch) {
  if (W == 0.0) throw DependentSolutionsError("pinney_rule: W = 0, the oscillator solutions are dependent");
  double disc = 4.0 * I1 * I2 - k * W * W;
  if (disc < 0.0) {
    if (disc < -slack(std::max(std::abs(4.0 * I1 * I2), std::abs(k * W * W)))) {
      throw DomainError("pinney_rule: negative discriminant 4 I1 I2 - k W^2", disc);
    }
    disc = 0.0;
  }
  const double root = std::sqrt(disc);
  double radicand = I2 * y * y + I1 * z * z + sign_of(branch) * root * y * z;
  if (radicand < 0.0) {
    if (radicand < -slack(std::abs(I2 * y * y) + std::abs(I1 * z * z))) {
      throw DomainError("pinney_rule: negative radicand", radicand);
    }
    radicand = 0.0;
  }
  return {root, radicand};
}

}  // namespace

PinneyValue pinney_rule(double y, double vy, double z, double vz, double I1, double I2, double W, double k,
                        Branch branch, HalfPlane half) {
  const auto [root, radicand] = pinney_parts(y, z, I1, I2, W, k, branch);
  const double raw = std::sqrt(2.0) / W * std::sqrt(radicand);
  const double x = sign_of(half) * std::abs(raw);
  // d(x^2)/dt = 2 R'/W^2 with R' the time derivative of the radicand (over 2).
  const double dr = 2.0 * I2 * y * vy + 2.0 * I1 * z * vz + sign_of(branch) * root * (vy * z + y * vz);
  const double v = x == 0.0 ? 0.0 : dr / (W * W * x);
  return {x, v, raw};
}

PinneyReconstruction pinney_rule_from_solutions(const Trajectory& y, const Trajectory& z, double x0, double v0,
                                                double k, HalfPlane half) {
  if (y.dimension() != 2 || z.dimension() != 2) {
    throw DimensionError("pinney_rule_from_solutions: oscillator trajectories must have states (q, dq/dt)");
  }
  if (x0 == 0.0) throw SingularityError("pinney_rule_from_solutions: x0 = 0");
  if (x0 * sign_of(half) < 0.0) throw DomainError("pinney_rule_from_solutions: x0 outside the half-plane", x0);
  const double t0 = y.t_begin();
  const State ys = y.states().front();
  const State zs = z.at(t0);
  State triple(6);
  triple << x0, ys(0), zs(0), v0, ys(1), zs(1);
  const PairInvariants inv = ermakov_pair_invariants(triple, k);

  // Branch: whichever reproduces (x0, v0) at the initial time. Matching x0
  // alone is ambiguous whenever y(t0) z(t0) = 0, e.g. for y = (1,0), z = (0,1).
  Branch branch = Branch::plus;
  {
    double best = std::numeric_limits<double>::infinity();
    for (Branch b : {Branch::plus, Branch::minus}) {
      try {
        const auto p = pinney_rule(ys(0), ys(1), zs(0), zs(1), inv.I1, inv.I2, inv.W, k, b, half);
        const double miss = std::abs(p.x - x0) + std::abs(p.v - v0);
        if (miss < best) {
          best = miss;
          branch = b;
        }
      } catch (const DomainError&) {
      }
    }
    if (!std::isfinite(best)) throw DomainError("pinney_rule_from_solutions: no branch is admissible at t0", x0);
  }

  std::vector<State> states, derivs;
  states.reserve(y.size());
  derivs.reserve(y.size());
  const double root = pinney_parts(ys(0), zs(0), inv.I1, inv.I2, inv.W, k, branch).discriminant_root;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double t = y.times()[i];
    const State yi = y.states()[i];
    const double ay = y.derivatives()[i](1);
    const State zi = z.at(t);
    const double az = z.derivative_at(t)(1);
    PinneyValue p;
    try {
      p = pinney_rule(yi(0), yi(1), zi(0), zi(1), inv.I1, inv.I2, inv.W, k, branch, half);
    } catch (const DomainError& e) {
      std::ostringstream os;
      os << "pinney_rule_from_solutions: fixed branch left its domain at t = " << t << " (" << e.what() << ")";
      throw DomainError(os.str(), t);
    }
    if (p.x == 0.0) throw SingularityError("pinney_rule_from_solutions: reconstructed x reached 0");
    const double s = sign_of(branch);
    const double ddr = 2.0 * inv.I2 * (yi(1) * yi(1) + yi(0) * ay) + 2.0 * inv.I1 * (zi(1) * zi(1) + zi(0) * az) +
                       s * root * (2.0 * yi(1) * zi(1) + ay * zi(0) + yi(0) * az);
    const double accel = (ddr / (inv.W * inv.W) - p.v * p.v) / p.x;
    State st(2), d(2);
    st << p.x, p.v;
    d << p.v, accel;
    states.push_back(std::move(st));
    derivs.push_back(std::move(d));
  }
  return {Trajectory(y.times(), std::move(states), std::move(derivs)), inv, branch};
}

}  // namespace liesys
