#include <doctest.h>

#include <random>

#include "liesys/errors.hpp"
#include "liesys/superposition.hpp"
#include "support.hpp"

using namespace liesys;
using testing::vec;

TEST_CASE("linear rule and keys are mutually inverse") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    const double x = u(rng), v = u(rng), x1 = u(rng), v1 = u(rng), x2 = u(rng), v2 = u(rng);
    if (std::abs(x1 * v2 - x2 * v1) < 0.1) continue;
    const Keys k = keys_from(x, v, x1, v1, x2, v2);
    const PhasePoint p = linear_rule(x1, v1, x2, v2, k.k1, k.k2);
    CHECK(std::abs(p.x - x) < 1e-12);
    CHECK(std::abs(p.v - v) < 1e-12);
  }
  CHECK_THROWS_AS(linear_rule(1.0, 2.0, 2.0, 4.0, 1.0, 1.0), DependentSolutionsError);
}

TEST_CASE("keys are constant along three oscillator solutions") {
  const auto osc = oscillator_1d(FrequencyProfile::sinusoidal());
  auto o = osc.integrator_options();
  o.abs_tol = o.rel_tol = 1e-12;
  const Trajectory a = integrate(osc.as_rhs(), vec({1.0, 0.3}), 0.0, 10.0, o);
  const Trajectory b = integrate(osc.as_rhs(), vec({-0.2, 1.0}), 0.0, 10.0, o);
  const Trajectory c = integrate(osc.as_rhs(), vec({0.7, -0.9}), 0.0, 10.0, o);
  const Keys k0 = keys_from(0.7, -0.9, 1.0, 0.3, -0.2, 1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double t = c.times()[i];
    const State x = c.states()[i], p = a.at(t), q = b.at(t);
    const Keys k = keys_from(x(0), x(1), p(0), p(1), q(0), q(1));
    worst = std::max({worst, testing::rel(k.k1, k0.k1), testing::rel(k.k2, k0.k2)});
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("quadrature rule from cos t gives sin t") {
  const Trajectory x1 = testing::cos_curve(0.0, 1.2);
  for (double t : {0.0, 0.3, 0.77, 1.2}) {
    CHECK(std::abs(quadrature_rule(x1, 0.0, 1.0, t) - std::sin(t)) < 1e-9);
    CHECK(std::abs(quadrature_rule(x1, 2.5, 0.0, t) - 2.5 * std::cos(t)) < 1e-14);
  }
  const Trajectory x2 = quadrature_rule_series(x1, 0.5, 1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < x2.size(); ++i) {
    const double t = x2.times()[i];
    worst = std::max({worst, std::abs(x2.states()[i](0) - (0.5 * std::cos(t) + std::sin(t))),
                      std::abs(x2.states()[i](1) - (-0.5 * std::sin(t) + std::cos(t)))});
  }
  CHECK(worst < 1e-8);
  // cos t vanishes at pi/2
  CHECK_THROWS_AS(quadrature_rule_series(testing::cos_curve(0.0, 2.0), 0.0, 1.0), QuadratureError);
}

TEST_CASE("Pinney rule: equilibrium from sin and cos") {
  const Trajectory y = testing::sin_curve(0.0, 6.0), z = testing::cos_curve(0.0, 6.0);
  const auto rec = pinney_rule_from_solutions(y, z, 1.0, 0.0, 1.0);
  CHECK(rec.invariants.W == doctest::Approx(-1.0));
  for (std::size_t i = 0; i < rec.trajectory.size(); ++i) {
    CHECK(std::abs(rec.trajectory.states()[i](0) - 1.0) < 1e-12);
    CHECK(std::abs(rec.trajectory.states()[i](1)) < 1e-12);
  }
}

TEST_CASE("Pinney rule against the closed-form solution at unit frequency") {
  const Trajectory y = testing::cos_curve(0.0, 8.0), z = testing::sin_curve(0.0, 8.0);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> pos(0.5, 2.0), any(-1.5, 1.5), kk(0.2, 3.0);
  for (int i = 0; i < 20; ++i) {
    const double x0 = pos(rng), v0 = any(rng), k = kk(rng);
    const testing::PinneyUnitFrequency exact(x0, v0, k);
    const auto rec = pinney_rule_from_solutions(y, z, x0, v0, k);
    for (std::size_t j = 0; j < rec.trajectory.size(); j += 37) {
      const double t = rec.trajectory.times()[j];
      const double h = 1e-5;
      CHECK(testing::rel(rec.trajectory.states()[j](0), exact.x(t)) < 1e-10);
      const double v = (exact.x(t + h) - exact.x(t - h)) / (2 * h);
      CHECK(std::abs(rec.trajectory.states()[j](1) - v) < 1e-7);
    }
  }
}

TEST_CASE("Pinney rule satisfies the ODE under numerical differentiation") {
  // unit frequency, exact y = cos t, z = sin t
  const double k = 1.3, x0 = 0.8, v0 = 0.4;
  const PairInvariants inv = ermakov_pair_invariants(vec({x0, 1.0, 0.0, v0, 0.0, 1.0}), k);
  const auto y0 = pinney_rule(1.0, 0.0, 0.0, 1.0, inv.I1, inv.I2, inv.W, k, Branch::plus);
  const auto y1 = pinney_rule(1.0, 0.0, 0.0, 1.0, inv.I1, inv.I2, inv.W, k, Branch::minus);
  const Branch b = std::abs(y0.v - v0) < std::abs(y1.v - v0) ? Branch::plus : Branch::minus;
  const auto xb = [&](double t) {
    return pinney_rule(std::cos(t), -std::sin(t), std::sin(t), std::cos(t), inv.I1, inv.I2, inv.W, k, b).x;
  };
  const double h = 1e-3;
  double worst = 0.0;
  for (double t = 0.1; t < 6.0; t += 0.1) {
    const double acc = (xb(t + h) - 2 * xb(t) + xb(t - h)) / (h * h);
    const double q = xb(t);
    worst = std::max(worst, std::abs(acc - (-q + k / (q * q * q))));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("Pinney rule permutation structure") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0), pos(0.5, 2.0);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    const double k = pos(rng);
    const State s = vec({pos(rng), u(rng), u(rng), u(rng), u(rng), u(rng)});
    const auto inv = ermakov_pair_invariants(s, k);
    if (std::abs(inv.W) < 0.05) continue;
    const double y = u(rng), vy = u(rng), z = u(rng), vz = u(rng);
    for (Branch b : {Branch::plus, Branch::minus}) {
      try {
        const auto a = pinney_rule(y, vy, z, vz, inv.I1, inv.I2, inv.W, k, b);
        const auto c = pinney_rule(z, vz, y, vy, inv.I2, inv.I1, -inv.W, k, b);
        CHECK(std::abs(std::abs(a.x) - std::abs(c.x)) < 1e-12 * std::max(1.0, std::abs(a.x)));
        ++checked;
      } catch (const DomainError&) {
      }
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("Pinney rule errors and half-plane placement") {
  CHECK_THROWS_AS(pinney_rule(1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0, Branch::plus), DependentSolutionsError);
  // 4 I1 I2 - k W^2 < 0
  CHECK_THROWS_AS(pinney_rule(1.0, 0.0, 0.0, 1.0, 0.1, 0.1, 1.0, 1.0, Branch::plus), DomainError);
  const auto pos = pinney_rule(1.0, 0.0, 0.0, 1.0, 0.5, 0.5, 1.0, 1.0, Branch::plus);
  const auto neg = pinney_rule(1.0, 0.0, 0.0, 1.0, 0.5, 0.5, 1.0, 1.0, Branch::plus, HalfPlane::negative);
  CHECK(pos.x == doctest::Approx(1.0));
  CHECK(neg.x == doctest::Approx(-1.0));
  CHECK(neg.v == doctest::Approx(-pos.v));
  const auto flipped = pinney_rule(1.0, 0.0, 0.0, 1.0, 0.5, 0.5, -1.0, 1.0, Branch::plus);
  CHECK(flipped.raw < 0.0);
  CHECK(flipped.x > 0.0);
}

TEST_CASE("k -> 0 agrees with the linear rule") {
  const Trajectory y = testing::cos_curve(0.0, 1.0), z = testing::sin_curve(0.0, 1.0);
  const double x0 = 2.0, v0 = 0.1;
  const auto rec = pinney_rule_from_solutions(y, z, x0, v0, 1e-12);
  const Keys keys = keys_from(x0, v0, 1.0, 0.0, 0.0, 1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const State a = y.states()[i], b = z.states()[i];
    const PhasePoint lin = linear_rule(a(0), a(1), b(0), b(1), keys.k1, keys.k2);
    worst = std::max(worst, std::abs(rec.trajectory.states()[i](0) - lin.x));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("Pinney reconstruction matches integration for a time-dependent frequency") {
  const auto w = FrequencyProfile::sinusoidal();
  const auto osc = oscillator_1d(w);
  const auto mp = milne_pinney(w, 1.0);
  // short steps keep the Hermite interpolant's second derivative honest for the FD residual
  auto fine = osc.integrator_options();
  fine.max_step = 0.005;
  const Trajectory y = integrate(osc.as_rhs(), vec({1.0, 0.0}), 0.0, 10.0, fine);
  const Trajectory z = integrate(osc.as_rhs(), vec({0.0, 1.0}), 0.0, 10.0, fine);
  for (const auto& [x0, v0] : {std::pair{0.6, 0.9}, std::pair{1.8, -0.7}}) {
    const auto rec = pinney_rule_from_solutions(y, z, x0, v0, 1.0);
    const Trajectory oracle = integrate(mp.as_rhs(), vec({x0, v0}), 0.0, 10.0, mp.integrator_options());
    const auto& tr = rec.trajectory;
    // second difference, Richardson-extrapolated: x gets small, so x'''' is large
    const auto d2 = [&tr](double t, double h) { return (tr.at(t + h)(0) - 2 * tr.at(t)(0) + tr.at(t - h)(0)) / (h * h); };
    double worst = 0.0, residual = 0.0, node_residual = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      const double t = tr.times()[i];
      const double q = tr.states()[i](0);
      worst = std::max(worst, testing::rel(q, oracle.at(t)(0)));
      node_residual = std::max(node_residual, std::abs(tr.derivatives()[i](1) + w(t) * q - 1.0 / (q * q * q)));
      if (t > 0.05 && t < 9.95) {
        const double acc = (4.0 * d2(t, 5e-3) - d2(t, 1e-2)) / 3.0;
        residual = std::max(residual, std::abs(acc + w(t) * q - 1.0 / (q * q * q)));
      }
    }
    CHECK(worst < 1e-5);
    CHECK(node_residual < 1e-6);
    CHECK(residual < 1e-4);
  }
  CHECK_THROWS_AS(pinney_rule_from_solutions(y, z, -1.0, 0.0, 1.0), DomainError);
}
