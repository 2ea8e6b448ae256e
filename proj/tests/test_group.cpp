#include <doctest.h>

#include <random>

#include "liesys/errors.hpp"
#include "liesys/group.hpp"
#include "support.hpp"

using namespace liesys;
using testing::vec;

namespace {

Sl2Vector random_vector(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

// exp(s M) by integrating dG/ds = M G from the identity.
Mat2 exp_by_ode(const Mat2& m, double s) {
  const Rhs rhs = [m](double, const State& g) -> State {
    Mat2 G;
    G << g(0), g(1), g(2), g(3);
    const Mat2 d = m * G;
    return vec({d(0, 0), d(0, 1), d(1, 0), d(1, 1)});
  };
  IntegratorOptions o;
  o.abs_tol = o.rel_tol = 1e-13;
  const Trajectory tr = integrate(rhs, vec({1.0, 0.0, 0.0, 1.0}), 0.0, s, o);
  const State g = s > 0 ? tr.states().back() : tr.states().front();
  Mat2 out;
  out << g(0), g(1), g(2), g(3);
  return out;
}

}  // namespace

TEST_CASE("sl(2,R) basis") {
  Mat2 a1, a2, a3;
  a1 << 0, 0, -1, 0;
  a2 << 0, -1, 0, 0;
  a3 << -0.5, 0, 0, 0.5;
  CHECK(Sl2Vector::a1().matrix() == a1);
  CHECK(Sl2Vector::a2().matrix() == a2);
  CHECK(Sl2Vector::a3().matrix() == a3);
  // [a1, a2] = 2 a3, [a1, a3] = -a1, [a2, a3] = a2 as matrix commutators
  CHECK((a1 * a2 - a2 * a1 - 2 * a3).norm() == 0.0);
  CHECK((a1 * a3 - a3 * a1 + a1).norm() == 0.0);
  CHECK((a2 * a3 - a3 * a2 - a2).norm() == 0.0);
  const Sl2Vector v{0.3, -1.2, 2.5};
  CHECK(v.matrix().trace() == 0.0);
  const Sl2Vector back = Sl2Vector::from_matrix(v.matrix());
  CHECK(back.c1 == doctest::Approx(v.c1));
  CHECK(back.c2 == doctest::Approx(v.c2));
  CHECK(back.c3 == doctest::Approx(v.c3));
  CHECK_THROWS_AS(Sl2Vector::from_matrix(Mat2::Identity()), DomainError);
}

TEST_CASE("SL2Matrix validates the determinant") {
  CHECK_THROWS_AS(SL2Matrix(2.0, 0.0, 0.0, 1.0), DomainError);
  const SL2Matrix g = SL2Matrix::renormalized((Mat2() << 2.0, 1.0, 0.5, 3.0).finished());
  CHECK(std::abs(g.det() - 1.0) < 1e-14);
  CHECK(((g * g.inverse()).matrix() - Mat2::Identity()).norm() < 1e-14);
  CHECK_THROWS_AS(SL2Matrix::renormalized((Mat2() << 0.0, 1.0, 1.0, 0.0).finished()), DomainError);
}

TEST_CASE("closed-form exponential agrees with an ODE solve") {
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> su(-2.0, 2.0);
  for (int i = 0; i < 20; ++i) {
    const Sl2Vector v = random_vector(rng, 1.0);
    const double s = su(rng);
    const Mat2 expected = exp_by_ode(v.matrix(), s);
    CHECK((sl2_exp(v, s).matrix() - expected).cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, expected.norm()));
  }
  // all three classes, including the parabolic boundary
  for (const Sl2Vector& v : {Sl2Vector{1.0, -1.0, 0.0}, Sl2Vector{1.0, 1.0, 0.0}, Sl2Vector{0.0, 1.0, 0.0}}) {
    CHECK((sl2_exp(v, 0.7).matrix() - exp_by_ode(v.matrix(), 0.7)).norm() < 1e-9);
    CHECK(((sl2_exp(v, 0.3) * sl2_exp(v, 0.4)).matrix() - sl2_exp(v, 0.7).matrix()).norm() < 1e-12);
  }
}

TEST_CASE("adjoint is conjugation") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 10; ++i) {
    const SL2Matrix g = sl2_exp(random_vector(rng, 1.0), 1.0);
    const Sl2Vector v = random_vector(rng, 2.0);
    const Mat2 expected = g.matrix() * v.matrix() * g.inverse().matrix();
    CHECK((adjoint(g, v).matrix() - expected).norm() < 1e-12);
  }
}

TEST_CASE("actions are compatible with the group product") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> pos(0.5, 2.0), any(-1.0, 1.0);
  const double k = 1.0;
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    const SL2Matrix a = sl2_exp(random_vector(rng, 0.4), 1.0), b = sl2_exp(random_vector(rng, 0.4), 1.0);
    const PhasePoint p{pos(rng), any(rng)};
    const PhasePoint l1 = linear_action(a * b, p), l2 = linear_action(a, linear_action(b, p));
    CHECK(std::abs(l1.x - l2.x) < 1e-13);
    CHECK(std::abs(l1.v - l2.v) < 1e-13);
    try {
      const auto inner = pinney_action(b, p, k);
      const auto lhs = pinney_action(a * b, p, k);
      const auto rhs = pinney_action(a, {inner.x_bar, inner.v_bar}, k);
      CHECK(std::abs(lhs.x_bar - rhs.x_bar) < 1e-12);
      CHECK(std::abs(lhs.v_bar - rhs.v_bar) < 1e-11);
      ++checked;
    } catch (const DomainError&) {
    }
  }
  CHECK(checked > 150);
}

TEST_CASE("Pinney action: identity, sign, and domain") {
  const auto id = pinney_action(SL2Matrix::identity(), {-0.7, 0.3}, 2.0);
  CHECK(id.x_bar == doctest::Approx(-0.7));
  CHECK(id.v_bar_magnitude == doctest::Approx(0.3));
  CHECK(id.v_bar == doctest::Approx(0.3));
  CHECK_THROWS_AS(pinney_action(SL2Matrix::identity(), {0.0, 1.0}, 1.0), SingularityError);
}

TEST_CASE("fundamental fields of both actions") {
  const auto w = FrequencyProfile::constant(1.0);
  const auto osc = oscillator_1d(w);
  const auto mp = milne_pinney(w, 0.8);
  const Sl2Vector basis[3] = {Sl2Vector::a1(), Sl2Vector::a2(), Sl2Vector::a3()};
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> pos(0.5, 2.0);
  const double h = 1e-5;
  for (int i = 0; i < 50; ++i) {
    const PhasePoint p{pos(rng), pos(rng)};
    const State ps = vec({p.x, p.v});
    for (int j = 0; j < 3; ++j) {
      const SL2Matrix f = sl2_exp(basis[j], -h), b = sl2_exp(basis[j], h);
      const State xl = osc.generators()[j](ps), xp = mp.generators()[j](ps);
      const PhasePoint lf = linear_action(f, p), lb = linear_action(b, p);
      CHECK(std::abs((lf.x - lb.x) / (2 * h) - xl(0)) < 1e-5);
      CHECK(std::abs((lf.v - lb.v) / (2 * h) - xl(1)) < 1e-5);
      const auto pf = pinney_action(f, p, 0.8), pb = pinney_action(b, p, 0.8);
      CHECK(std::abs((pf.x_bar - pb.x_bar) / (2 * h) - xp(0)) < 1e-5 * std::max(1.0, std::abs(xp(0))));
      CHECK(std::abs((pf.v_bar - pb.v_bar) / (2 * h) - xp(1)) < 1e-5 * std::max(1.0, std::abs(xp(1))));
    }
  }
}

TEST_CASE("group solve: determinant and linear action") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (const auto& w : {FrequencyProfile::constant(1.0), FrequencyProfile::sinusoidal()}) {
    const GroupSolution g = solve_group_equation(oscillator_curve(w), 0.0, 10.0);
    CHECK(g.max_det_drift() < 1e-9);
    CHECK(g.max_step_det_drift() < 1e-9);
    const auto osc = oscillator_1d(w);
    for (int i = 0; i < 5; ++i) {
      const PhasePoint p0{u(rng), u(rng)};
      const Trajectory tr = integrate(osc.as_rhs(), vec({p0.x, p0.v}), 0.0, 10.0, osc.integrator_options());
      double worst = 0.0;
      for (std::size_t j = 0; j < tr.size(); ++j) {
        worst = std::max(worst, testing::rel(linear_action(g.at(tr.times()[j]), p0).x, tr.states()[j](0)));
      }
      CHECK(worst < 1e-6);
    }
  }
  // constant frequency: g(t) is the rotation [[cos, sin], [-sin, cos]]
  const GroupSolution rot = solve_group_equation(oscillator_curve(FrequencyProfile::constant(1.0)), 0.0, 3.0);
  const SL2Matrix m = rot.at(2.0);
  CHECK(std::abs(m.alpha() - std::cos(2.0)) < 1e-8);
  CHECK(std::abs(m.beta() - std::sin(2.0)) < 1e-8);
}

TEST_CASE("signed v_bar is the time derivative of x_bar along the group flow") {
  // The Pinney action of g(t) on a fixed point traces a Milne-Pinney solution.
  const double k = 1.0;
  const auto w = FrequencyProfile::sinusoidal();
  const GroupSolution g = solve_group_equation(oscillator_curve(w), 0.0, 4.0);
  const PhasePoint p{1.1, -0.4};
  const auto mp = milne_pinney(w, k);
  const Trajectory tr = integrate(mp.as_rhs(), vec({p.x, p.v}), 0.0, 4.0, mp.integrator_options());
  const double h = 1e-4;
  for (double t = 0.2; t < 3.8; t += 0.3) {
    const double fd = (pinney_action(g.at(t + h), p, k).x_bar - pinney_action(g.at(t - h), p, k).x_bar) / (2 * h);
    const auto a = pinney_action(g.at(t), p, k);
    CHECK(std::abs(a.v_bar - fd) < 1e-6);
    CHECK(std::abs(a.x_bar - tr.at(t)(0)) < 1e-7);
    CHECK(std::abs(a.v_bar - tr.at(t)(1)) < 1e-7);
  }
}

TEST_CASE("tau reparametrization") {
  const Trajectory x1 = testing::cos_curve(0.0, 1.2);
  CHECK(std::abs(tau_reparametrization(x1, 1.0) - std::tan(1.0)) < 1e-9);
  const auto tau = tau_series(x1);
  for (std::size_t i = 0; i < tau.size(); i += 20) CHECK(std::abs(tau[i] - std::tan(x1.times()[i])) < 1e-9);
  CHECK_THROWS_AS(tau_series(testing::cos_curve(0.0, 2.0)), QuadratureError);
}

TEST_CASE("analytic reductions") {
  const Trajectory c = testing::cos_curve(0.0, 1.2);
  const Reduction dal = reduce_oscillator(c, 0.0, 1.0);
  for (std::size_t i = 0; i < dal.trajectory.size(); ++i) {
    const double t = dal.trajectory.times()[i];
    CHECK(std::abs(dal.trajectory.states()[i](0) - std::sin(t)) < 1e-8);
    CHECK(std::abs(dal.trajectory.states()[i](1) - std::cos(t)) < 1e-8);
    CHECK(dal.det_drift[i] < 1e-12);
  }
  const Reduction osc = reduce_pinney_from_oscillator(c, 1.0, 0.0, 1.0);
  CHECK(osc.parameters.A == doctest::Approx(1.0));
  CHECK(std::abs(osc.parameters.B) < 1e-15);
  for (const auto& s : osc.trajectory.states()) CHECK(std::abs(s(0) - 1.0) < 1e-8);

  const Trajectory one = testing::closed_form([](double) { return 1.0; }, [](double) { return 0.0; },
                                              [](double) { return 0.0; }, 0.0, 5.0, 0.01);
  const Reduction self = reduce_pinney_from_pinney(one, 1.0, 0.0, 1.0);
  for (const auto& s : self.trajectory.states()) CHECK(std::abs(s(0) - 1.0) < 1e-8);
  CHECK_THROWS_AS(reduce_pinney_from_pinney(one, 1.0, 0.0, 0.0), DomainError);
}

TEST_CASE("Pinney reductions against the unit-frequency closed form") {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> pos(0.5, 2.0), any(-1.0, 1.0);
  const Trajectory c = testing::cos_curve(0.0, 1.2);
  for (int i = 0; i < 10; ++i) {
    const double x0 = pos(rng), v0 = any(rng), k = pos(rng);
    const testing::PinneyUnitFrequency exact(x0, v0, k);
    const Reduction red = reduce_pinney_from_oscillator(c, x0, v0, k);
    CHECK(red.trajectory.states().front()(0) == doctest::Approx(x0));  // x(0) = x1(0) A
    for (std::size_t j = 0; j < red.trajectory.size(); ++j) {
      CHECK(testing::rel(red.trajectory.states()[j](0), exact.x(red.trajectory.times()[j])) < 1e-8);
    }
    // particular Pinney solution with the same k, in closed form
    const testing::PinneyUnitFrequency part(pos(rng), any(rng), k);
    const double h = 1e-6;
    const Trajectory x1 = testing::closed_form(
        [&](double t) { return part.x(t); }, [&](double t) { return (part.x(t + h) - part.x(t - h)) / (2 * h); },
        [&](double t) { return -part.x(t) + k / std::pow(part.x(t), 3); }, 0.0, 5.0, 0.005);
    const Reduction self = reduce_pinney_from_pinney(x1, x0, v0, k);
    double worst = 0.0;
    for (std::size_t j = 0; j < self.trajectory.size(); ++j) {
      worst = std::max(worst, testing::rel(self.trajectory.states()[j](0), exact.x(self.trajectory.times()[j])));
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("reductions in the negative half-plane mirror the positive ones") {
  const Trajectory c = testing::cos_curve(0.0, 1.2);
  const Reduction pos = reduce_pinney_from_oscillator(c, 0.9, 0.3, 1.0);
  const Reduction neg = reduce_pinney_from_oscillator(c, -0.9, -0.3, 1.0);
  for (std::size_t i = 0; i < pos.trajectory.size(); ++i) {
    CHECK(pos.trajectory.states()[i](0) == doctest::Approx(-neg.trajectory.states()[i](0)));
  }
}

TEST_CASE("Pinney-from-Pinney output satisfies the ODE") {
  const double k = 1.0;
  const auto mp = milne_pinney(FrequencyProfile::constant(1.0), k);
  auto fine = mp.integrator_options();
  fine.max_step = 0.0025;
  const Trajectory x1 = integrate(mp.as_rhs(), vec({1.3, 0.2}), 0.0, 5.0, fine);
  const Reduction red = reduce_pinney_from_pinney(x1, 0.8, 0.5, k);
  const double h = 5e-3;
  double worst = 0.0;
  for (double t = 0.1; t < 4.9; t += 0.05) {
    const auto& tr = red.trajectory;
    const double acc = (tr.at(t + h)(0) - 2 * tr.at(t)(0) + tr.at(t - h)(0)) / (h * h);
    const double q = tr.at(t)(0);
    worst = std::max(worst, std::abs(acc + q - k / (q * q * q)));
  }
  CHECK(worst < 1e-4);
}
