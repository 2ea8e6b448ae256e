#include "liesys/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "liesys/errors.hpp"

namespace liesys {

// --- trajectory -----------------------------------------------------------

Trajectory::Trajectory(std::vector<double> times, std::vector<State> states, std::vector<State> derivatives)
    : times_(std::move(times)), states_(std::move(states)), derivatives_(std::move(derivatives)) {
  if (times_.empty()) throw DimensionError("trajectory needs at least one sample");
  if (states_.size() != times_.size() || derivatives_.size() != times_.size()) {
    throw DimensionError("trajectory: times, states and derivatives differ in length");
  }
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1])) throw DomainError("trajectory times must be strictly increasing", times_[i]);
  }
  const auto n = states_.front().size();
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (states_[i].size() != n || derivatives_[i].size() != n) {
      throw DimensionError("trajectory: inconsistent state dimension");
    }
  }
}

std::size_t Trajectory::segment(double t) const {
  const double slack = 1e-12 * std::max(1.0, std::abs(t));
  if (t < times_.front() - slack || t > times_.back() + slack) {
    std::ostringstream os;
    os << "time " << t << " outside trajectory window [" << times_.front() << ", " << times_.back() << "]";
    throw DomainError(os.str(), t);
  }
  if (times_.size() == 1) return 0;
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t i = (it == times_.begin()) ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
  return std::min(i, times_.size() - 2);
}

State Trajectory::at(double t) const {
  const std::size_t i = segment(t);
  if (times_.size() == 1) return states_.front();
  if (t == times_[i]) return states_[i];
  if (t == times_[i + 1]) return states_[i + 1];
  const double h = times_[i + 1] - times_[i];
  const double s = std::clamp((t - times_[i]) / h, 0.0, 1.0);
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * states_[i] + (h10 * h) * derivatives_[i] + h01 * states_[i + 1] + (h11 * h) * derivatives_[i + 1];
}

State Trajectory::derivative_at(double t) const {
  const std::size_t i = segment(t);
  if (times_.size() == 1) return derivatives_.front();
  if (t == times_[i]) return derivatives_[i];
  if (t == times_[i + 1]) return derivatives_[i + 1];
  const double h = times_[i + 1] - times_[i];
  const double s = std::clamp((t - times_[i]) / h, 0.0, 1.0);
  const double s2 = s * s;
  const double d00 = 6 * s2 - 6 * s;
  const double d10 = 3 * s2 - 4 * s + 1;
  const double d01 = -6 * s2 + 6 * s;
  const double d11 = 3 * s2 - 2 * s;
  return (d00 / h) * states_[i] + d10 * derivatives_[i] + (d01 / h) * states_[i + 1] + d11 * derivatives_[i + 1];
}

// --- Dormand-Prince 5(4) ---------------------------------------------------------

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b_hat
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

bool finite(const State& y) { return y.allFinite(); }

double error_norm(const State& err, const State& y0, const State& y1, double atol, double rtol) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = atol + rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    worst = std::max(worst, std::abs(err(i)) / sc);
  }
  return worst;
}

// Stage evaluation that turns a singular rhs into a rejected step.
bool eval(const Rhs& rhs, double t, const State& y, State& out) {
  try {
    out = rhs(t, y);
  } catch (const SingularityError&) {
    return false;
  }
  return finite(out);
}

double initial_step(const Rhs& rhs, double t0, const State& y0, const State& f0, double dir,
                    const IntegratorOptions& o) {
  State sc = (o.abs_tol + o.rel_tol * y0.array().abs()).matrix();
  const double d0 = (y0.array() / sc.array()).abs().maxCoeff();
  const double d1 = (f0.array() / sc.array()).abs().maxCoeff();
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, o.max_step);
  State y1 = y0 + dir * h0 * f0;
  State f1;
  if (!eval(rhs, t0 + dir * h0, y1, f1)) return h0 * 1e-3;
  const double d2 = ((f1 - f0).array() / sc.array()).abs().maxCoeff() / h0;
  const double dm = std::max(d1, d2);
  const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
  return std::min({100 * h0, h1, o.max_step});
}

}  // namespace

Trajectory integrate(const Rhs& rhs, const State& y0, double t0, double t1, const IntegratorOptions& o) {
  if (!(o.abs_tol > 0.0) || !(o.rel_tol >= 0.0)) throw DomainError("integrate: tolerances must be positive");
  if (!(t1 != t0) || !std::isfinite(t0) || !std::isfinite(t1)) {
    throw DomainError("integrate: degenerate or non-finite time span", t1 - t0);
  }
  if (!finite(y0)) throw DomainError("integrate: non-finite initial state");
  if (o.domain_guard && !o.domain_guard(y0)) throw IntegrationError(o.domain_message + " at the initial state", t0);

  const double dir = t1 > t0 ? 1.0 : -1.0;
  State y = y0;
  State f;
  if (!eval(rhs, t0, y, f)) throw IntegrationError("integrate: right-hand side not finite at the initial state", t0);

  std::vector<double> ts{t0};
  std::vector<State> ys{y};
  std::vector<State> fs{f};

  double h = o.initial_step > 0.0 ? o.initial_step : initial_step(rhs, t0, y, f, dir, o);
  double t = t0;
  State k2, k3, k4, k5, k6, k7, ytmp, ynew;
  std::size_t steps = 0;

  while (dir * (t1 - t) > 0.0) {
    if (++steps > o.max_steps) throw IntegrationError("integrate: step budget exhausted", t);
    h = std::min(h, o.max_step);
    bool last = false;
    if (h >= std::abs(t1 - t)) {
      h = std::abs(t1 - t);
      last = true;
    }
    const double min_h = 10.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    if (h < min_h) {
      std::ostringstream os;
      os << "integrate: step size underflow at t = " << t;
      throw IntegrationError(os.str(), t);
    }
    const double hs = dir * h;

    bool ok = eval(rhs, t + c2 * hs, ytmp = y + hs * (a21 * f), k2) &&
              eval(rhs, t + c3 * hs, ytmp = y + hs * (a31 * f + a32 * k2), k3) &&
              eval(rhs, t + c4 * hs, ytmp = y + hs * (a41 * f + a42 * k2 + a43 * k3), k4) &&
              eval(rhs, t + c5 * hs, ytmp = y + hs * (a51 * f + a52 * k2 + a53 * k3 + a54 * k4), k5) &&
              eval(rhs, t + hs, ytmp = y + hs * (a61 * f + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), k6);
    double err = std::numeric_limits<double>::infinity();
    if (ok) {
      ynew = y + hs * (b1 * f + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      ok = eval(rhs, t + hs, ynew, k7);
      if (ok) {
        const State e = hs * (e1 * f + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        err = error_norm(e, y, ynew, o.abs_tol, o.rel_tol);
      }
    }
    if (!ok || !std::isfinite(err)) {
      h *= 0.25;
      continue;
    }
    if (err > 1.0) {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      continue;
    }

    const double tnew = last ? t1 : t + hs;
    if (o.domain_guard && !o.domain_guard(ynew)) {
      std::ostringstream os;
      os << o.domain_message << " between t = " << t << " and t = " << tnew;
      throw IntegrationError(os.str(), t);
    }
    if (o.project) {
      o.project(ynew);
      if (!eval(rhs, tnew, ynew, k7)) throw IntegrationError("integrate: projection produced a singular state", t);
    }
    t = tnew;
    y = ynew;
    f = k7;
    ts.push_back(t);
    ys.push_back(y);
    fs.push_back(f);

    const double factor = err == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
    h *= factor;
  }

  if (dir < 0.0) {
    std::reverse(ts.begin(), ts.end());
    std::reverse(ys.begin(), ys.end());
    std::reverse(fs.begin(), fs.end());
  }
  return Trajectory(std::move(ts), std::move(ys), std::move(fs));
}

// --- adaptive Simpson ----------------------------------------------------------------

namespace {

struct Simpson {
  const std::function<double(double)>& f;
  int max_depth;

  double sample(double x) const {
    const double v = f(x);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "quadrature: non-finite integrand at " << x;
      throw QuadratureError(os.str(), x);
    }
    return v;
  }

  double refine(double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) const {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = sample(lm), frm = sample(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth >= max_depth) {
      std::ostringstream os;
      os << "quadrature: tolerance not reached near " << m << " (integrand likely singular)";
      throw QuadratureError(os.str(), m);
    }
    return refine(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           refine(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
  }
};

}  // namespace

double quadrature(const std::function<double(double)>& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  if (!(tol > 0.0)) throw DomainError("quadrature: tolerance must be positive", tol);
  if (b < a) return -quadrature(f, b, a, tol);
  const Simpson s{f, 50};
  // Split into a few panels first so a symmetric integrand cannot fool the
  // first error estimate.
  constexpr int panels = 4;
  double total = 0.0;
  const double w = (b - a) / panels;
  double fa = s.sample(a);
  for (int i = 0; i < panels; ++i) {
    const double lo = a + i * w;
    const double hi = (i + 1 == panels) ? b : a + (i + 1) * w;
    const double m = 0.5 * (lo + hi);
    const double fm = s.sample(m), fb = s.sample(hi);
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    total += s.refine(lo, hi, fa, fm, fb, whole, tol / panels, 0);
    fa = fb;
  }
  return total;
}

// --- frequency profiles ----------------------------------------------------------------

namespace {

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

FrequencyProfile FrequencyProfile::constant(double w2) {
  if (!std::isfinite(w2)) throw DomainError("constant frequency must be finite", w2);
  return {[w2](double) { return w2; }, "constant w^2 = " + num(w2)};
}

FrequencyProfile FrequencyProfile::sinusoidal(double offset, double amplitude) {
  if (!std::isfinite(offset) || !std::isfinite(amplitude)) throw DomainError("sinusoidal profile must be finite");
  return {[offset, amplitude](double t) { return offset + amplitude * std::sin(t); },
          "w^2 = " + num(offset) + " + " + num(amplitude) + " sin t"};
}

FrequencyProfile FrequencyProfile::step(double switch_time, double before, double after) {
  if (!std::isfinite(before) || !std::isfinite(after) || !std::isfinite(switch_time)) {
    throw DomainError("step profile must be finite");
  }
  return {[=](double t) { return t < switch_time ? before : after; },
          "w^2 = " + num(before) + " for t < " + num(switch_time) + ", " + num(after) + " after"};
}

FrequencyProfile FrequencyProfile::custom(std::function<double(double)> fn, std::string label) {
  if (!fn) throw DomainError("custom frequency profile needs a callable");
  return {std::move(fn), std::move(label)};
}

}  // namespace liesys
