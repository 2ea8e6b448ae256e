#include "liesys/group.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "liesys/errors.hpp"

namespace liesys {

// --- algebra and group elements --------------------------------------------

Mat2 Sl2Vector::matrix() const {
  Mat2 m;
  m << -0.5 * c3, -c2, -c1, 0.5 * c3;
  return m;
}

Sl2Vector Sl2Vector::from_matrix(const Mat2& m) {
  const double tr = m.trace();
  if (std::abs(tr) > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    throw DomainError("Sl2Vector::from_matrix: matrix is not traceless", tr);
  }
  return {-m(1, 0), -m(0, 1), m(1, 1) - m(0, 0)};
}

namespace {

void check_det(const Mat2& m) {
  const double d = m.determinant();
  if (!std::isfinite(d) || std::abs(d - 1.0) > 1e-9) throw DomainError("SL2Matrix: determinant is not 1", d);
}

}  // namespace

SL2Matrix::SL2Matrix(double alpha, double beta, double gamma, double delta) {
  m_ << alpha, beta, gamma, delta;
  check_det(m_);
}

SL2Matrix::SL2Matrix(const Mat2& m) : m_(m) { check_det(m_); }

SL2Matrix SL2Matrix::renormalized(const Mat2& m) {
  const double d = m.determinant();
  if (!(d > 0.0)) throw DomainError("SL2Matrix::renormalized: determinant must be positive", d);
  return SL2Matrix(Mat2(m / std::sqrt(d)));
}

SL2Matrix sl2_exp(const Sl2Vector& v, double s) {
  const Mat2 m = s * v.matrix();
  // For traceless M, M^2 = -det(M) I.
  const double d = m.determinant();
  Mat2 out;
  if (std::abs(d) < 1e-12) {
    out = Mat2::Identity() + m;
  } else if (d > 0.0) {
    const double w = std::sqrt(d);
    out = std::cos(w) * Mat2::Identity() + (std::sin(w) / w) * m;
  } else {
    const double w = std::sqrt(-d);
    out = std::cosh(w) * Mat2::Identity() + (std::sinh(w) / w) * m;
  }
  return SL2Matrix::renormalized(out);
}

Sl2Vector adjoint(const SL2Matrix& g, const Sl2Vector& v) {
  const Mat2 c = g.matrix() * v.matrix() * g.inverse().matrix();
  // Conjugation keeps the trace at zero up to rounding; drop the residue.
  Mat2 traceless = c;
  const double half = 0.5 * c.trace();
  traceless(0, 0) -= half;
  traceless(1, 1) -= half;
  return Sl2Vector::from_matrix(traceless);
}

// --- group equation -------------------------------------------------------------------

SL2Matrix GroupSolution::at(double t) const {
  const State e = entries_.at(t);
  Mat2 m;
  m << e(0), e(1), e(2), e(3);
  return SL2Matrix::renormalized(m);
}

double GroupSolution::max_det_drift() const {
  double worst = 0.0;
  for (const auto& e : entries_.states()) worst = std::max(worst, std::abs(e(0) * e(3) - e(1) * e(2) - 1.0));
  return worst;
}

GroupSolution solve_group_equation(const std::function<Sl2Vector(double)>& a, double t0, double t1, double tol) {
  const Rhs rhs = [&a](double t, const State& g) {
    const Mat2 am = a(t).matrix();
    State out(4);
    out << am(0, 0) * g(0) + am(0, 1) * g(2), am(0, 0) * g(1) + am(0, 1) * g(3),
        am(1, 0) * g(0) + am(1, 1) * g(2), am(1, 0) * g(1) + am(1, 1) * g(3);
    return out;
  };
  auto worst = std::make_shared<double>(0.0);
  IntegratorOptions o;
  o.abs_tol = tol;
  o.rel_tol = tol;
  o.project = [worst](State& g) {
    const double d = g(0) * g(3) - g(1) * g(2);
    *worst = std::max(*worst, std::abs(d - 1.0));
    if (d > 0.0) g /= std::sqrt(d);
  };
  State e(4);
  e << 1.0, 0.0, 0.0, 1.0;
  Trajectory traj = integrate(rhs, e, t0, t1, o);
  return GroupSolution(std::move(traj), *worst);
}

std::function<Sl2Vector(double)> oscillator_curve(const FrequencyProfile& omega) {
  return [w = omega.omega_squared](double t) { return Sl2Vector{w(t), -1.0, 0.0}; };
}

// --- actions ------------------------------------------------------------------------------

PhasePoint linear_action(const SL2Matrix& g, PhasePoint p) {
  return {g.alpha() * p.x + g.beta() * p.v, g.gamma() * p.x + g.delta() * p.v};
}

PinneyActionResult pinney_action(const SL2Matrix& a, PhasePoint p, double k) {
  const double x = p.x, v = p.v;
  if (x == 0.0) throw SingularityError("pinney_action: x = 0");
  const double al = a.alpha(), be = a.beta(), ga = a.gamma(), de = a.delta();
  const double top = be * v + al * x;   // alpha x + beta v
  const double low = de * v + ga * x;   // gamma x + delta v
  const double x2 = x * x;
  const double cross = top * low + k * de * be / x2;
  const double den = low * low + k * (de / x) * (de / x);
  const double num = k + cross * cross;
  if (den == 0.0) throw DomainError("pinney_action: vanishing denominator", den);
  const double ratio = num / den;
  if (!(ratio >= 0.0)) throw DomainError("pinney_action: negative radicand in x_bar", ratio);
  const double xb = (x > 0.0 ? 1.0 : -1.0) * std::sqrt(ratio);
  if (xb == 0.0) throw DomainError("pinney_action: x_bar vanishes", xb);
  // (delta v + gamma x)^2 + k delta^2/x^2 (1 - x^2/(delta^2 x_bar^2)), expanded so delta = 0 is not 0/0.
  double rad = low * low + k * de * de / x2 - k / (xb * xb);
  if (rad < 0.0) {
    const double scale = low * low + std::abs(k * de * de / x2) + std::abs(k / (xb * xb));
    if (rad < -1e-12 * std::max(1.0, scale)) throw DomainError("pinney_action: negative radicand in v_bar", rad);
    rad = 0.0;
  }
  return {xb, std::sqrt(rad), rad, cross / xb};
}

// --- reparametrization ---------------------------------------------------------------------

namespace {

void require_nonvanishing(const Trajectory& x1, double t_last, const char* who) {
  const double s0 = x1.states().front()(0);
  for (std::size_t i = 0; i < x1.size() && x1.times()[i] <= t_last; ++i) {
    if (x1.states()[i](0) * s0 <= 0.0) {
      std::ostringstream os;
      os << who << ": particular solution vanishes at or before t = " << x1.times()[i];
      throw QuadratureError(os.str(), x1.times()[i]);
    }
  }
}

double inverse_square(const Trajectory& x1, double a, double b, double tol) {
  return quadrature(
      [&x1](double z) {
        const double q = x1.at(z)(0);
        return 1.0 / (q * q);
      },
      a, b, tol);
}

}  // namespace

double tau_reparametrization(const Trajectory& x1, double t, double tol) {
  require_nonvanishing(x1, t, "tau_reparametrization");
  return inverse_square(x1, x1.t_begin(), t, tol);
}

std::vector<double> tau_series(const Trajectory& x1, double tol) {
  require_nonvanishing(x1, x1.t_end(), "tau_series");
  std::vector<double> tau(x1.size(), 0.0);
  for (std::size_t i = 1; i < x1.size(); ++i) {
    tau[i] = tau[i - 1] + inverse_square(x1, x1.times()[i - 1], x1.times()[i], tol);
  }
  return tau;
}

SL2Matrix ParticularSolutionCurve::from(double x1, double v1) {
  if (x1 == 0.0) throw SingularityError("particular_solution_curve: x1 = 0");
  return {x1, 0.0, v1, 1.0 / x1};
}

SL2Matrix ParticularSolutionCurve::at(double t) const {
  const State s = x1_->at(t);
  return from(s(0), s(1));
}

// --- reductions -------------------------------------------------------------------------------

ReductionParameters reduction_parameters(double x1_0, double v1_0, double x0, double v0, double k) {
  const SL2Matrix g0inv = ParticularSolutionCurve::from(x1_0, v1_0).inverse();
  const auto r = pinney_action(g0inv, {x0, v0}, k);
  if (r.x_bar == 0.0) throw DomainError("reduction parameters: A = 0", r.x_bar);
  return {r.x_bar, r.v_bar};
}

Keys reduction_keys(const Trajectory& x1, double x0, double v0) {
  const State s = x1.states().front();
  const PhasePoint c = linear_action(ParticularSolutionCurve::from(s(0), s(1)).inverse(), {x0, v0});
  return {c.x, c.v};
}

Reduction reduce_oscillator(const Trajectory& x1, double k_prime, double k) {
  Reduction out;
  out.tau = tau_series(x1);
  out.parameters = {k_prime, k};
  const State s0 = x1.states().front();
  const SL2Matrix g0inv = ParticularSolutionCurve::from(s0(0), s0(1)).inverse();
  std::vector<State> states, derivs;
  for (std::size_t i = 0; i < x1.size(); ++i) {
    const State& s = x1.states()[i];
    const double tau = out.tau[i];
    const SL2Matrix g1 = ParticularSolutionCurve::from(s(0), s(1));
    const SL2Matrix h = sl2_exp(-1.0 * Sl2Vector::a2(), tau);  // [[1, tau], [0, 1]]
    // z-coordinates (k', k) are carried to the solution by g1(t) h(tau).
    const PhasePoint p = linear_action(g1 * h, {k_prime, k});
    out.det_drift.push_back(std::abs((g1 * h * g0inv).det() - 1.0));
    State st(2), d(2);
    st << p.x, p.v;
    d << p.v, x1.derivatives()[i](1) * (k_prime + k * tau);
    states.push_back(std::move(st));
    derivs.push_back(std::move(d));
  }
  out.trajectory = Trajectory(x1.times(), std::move(states), std::move(derivs));
  return out;
}

namespace {

// Both equations are odd in x, so the negative half-plane is handled by
// reflecting the particular solution and the initial state.
struct Reflection {
  double particular;  // sign of x1
  double target;      // sign of x0
};

Reflection reflection(const Trajectory& x1, double x0) {
  const double q = x1.states().front()(0);
  if (q == 0.0) throw SingularityError("reduction: particular solution vanishes at t0");
  if (x0 == 0.0) throw SingularityError("reduction: x0 = 0");
  return {q > 0.0 ? 1.0 : -1.0, x0 > 0.0 ? 1.0 : -1.0};
}

// w^2(t) recovered from the particular solution: x1'' = -w^2 x1 + k_particular / x1^3.
double omega_squared_from(double q, double ddq, double k_particular) {
  return (k_particular / (q * q * q) - ddq) / q;
}

template <class ClosedForm>
Reduction reduce_pinney(const Trajectory& x1, double x0, double v0, double k, double k_particular,
                        const Sl2Vector& reduced, ClosedForm closed_form) {
  const Reflection r = reflection(x1, x0);
  Reduction out;
  out.tau = tau_series(x1);
  const State s0 = r.particular * x1.states().front();
  out.parameters = reduction_parameters(s0(0), s0(1), r.target * x0, r.target * v0, k);
  const auto [A, B] = out.parameters;
  const SL2Matrix g0inv = ParticularSolutionCurve::from(s0(0), s0(1)).inverse();

  std::vector<State> states, derivs;
  for (std::size_t i = 0; i < x1.size(); ++i) {
    const State s = r.particular * x1.states()[i];
    const double ddq = r.particular * x1.derivatives()[i](1);
    const double tau = out.tau[i];
    const SL2Matrix g1 = ParticularSolutionCurve::from(s(0), s(1));
    const SL2Matrix g = g1 * sl2_exp(reduced, tau);
    out.det_drift.push_back(std::abs((g * g0inv).det() - 1.0));

    const double x = closed_form(s(0), tau, A, B);
    const double v = pinney_action(g, {A, B}, k).v_bar;
    const double w2 = omega_squared_from(s(0), ddq, k_particular);
    State st(2), d(2);
    st << r.target * x, r.target * v;
    d << r.target * v, r.target * (-w2 * x + k / (x * x * x));
    states.push_back(std::move(st));
    derivs.push_back(std::move(d));
  }
  out.trajectory = Trajectory(x1.times(), std::move(states), std::move(derivs));
  return out;
}

}  // namespace

Reduction reduce_pinney_from_pinney(const Trajectory& x1, double x0, double v0, double k) {
  if (!(k > 0.0)) throw DomainError("reduce_pinney_from_pinney: k must be positive", k);
  const double rk = std::sqrt(k);
  auto closed = [k, rk](double q, double tau, double A, double B) {
    const double c = std::cos(2.0 * rk * tau), s = std::sin(2.0 * rk * tau);
    const double A2 = A * A, B2 = B * B;
    const double rad = (B2 + k / A2 + A2 * k + (A2 * k - B2 - k / A2) * c + 2.0 * A * B * rk * s) * q * q / (2.0 * k);
    if (rad < 0.0) throw DomainError("reduce_pinney_from_pinney: negative radicand", rad);
    return std::sqrt(rad);
  };
  return reduce_pinney(x1, x0, v0, k, k, Sl2Vector{k, -1.0, 0.0}, closed);
}

Reduction reduce_pinney_from_oscillator(const Trajectory& x1, double x0, double v0, double k) {
  auto closed = [k](double q, double tau, double A, double B) {
    const double A2 = A * A;
    const double rad = A2 * A2 + 2.0 * A2 * A * B * tau + (A2 * B * B + k) * tau * tau;
    if (rad < 0.0) throw DomainError("reduce_pinney_from_oscillator: negative radicand", rad);
    return q / A * std::sqrt(rad);
  };
  return reduce_pinney(x1, x0, v0, k, 0.0, Sl2Vector{0.0, -1.0, 0.0}, closed);
}

}  // namespace liesys
