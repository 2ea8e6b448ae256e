#pragma once

#include <cmath>
#include <functional>
#include <initializer_list>
#include <random>

#include "liesys/integrate.hpp"

namespace testing {

inline liesys::State vec(std::initializer_list<double> v) {
  liesys::State s(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) s(i++) = x;
  return s;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// (x, x') sampled from a closed form on a uniform grid, derivatives exact.
inline liesys::Trajectory closed_form(const std::function<double(double)>& x, const std::function<double(double)>& dx,
                                      const std::function<double(double)>& ddx, double t0, double t1, double h) {
  const int n = static_cast<int>(std::ceil((t1 - t0) / h));
  std::vector<double> times;
  std::vector<liesys::State> states, derivs;
  for (int i = 0; i <= n; ++i) {
    const double t = i == n ? t1 : t0 + (t1 - t0) * i / n;
    times.push_back(t);
    states.push_back(vec({x(t), dx(t)}));
    derivs.push_back(vec({dx(t), ddx(t)}));
  }
  return {std::move(times), std::move(states), std::move(derivs)};
}

inline liesys::Trajectory cos_curve(double t0, double t1, double h = 0.01) {
  return closed_form([](double t) { return std::cos(t); }, [](double t) { return -std::sin(t); },
                     [](double t) { return -std::cos(t); }, t0, t1, h);
}

inline liesys::Trajectory sin_curve(double t0, double t1, double h = 0.01) {
  return closed_form([](double t) { return std::sin(t); }, [](double t) { return std::cos(t); },
                     [](double t) { return -std::sin(t); }, t0, t1, h);
}

// Milne-Pinney with w = 1: x^2 = a cos^2 t + b sin^2 t + 2 c sin t cos t,
// ab - c^2 = k. Through (x0, v0) at t = 0: a = x0^2, c = x0 v0, b = (k + c^2)/a.
struct PinneyUnitFrequency {
  double a, b, c;
  PinneyUnitFrequency(double x0, double v0, double k) : a(x0 * x0), b((k + x0 * x0 * v0 * v0) / (x0 * x0)), c(x0 * v0) {}
  double x(double t) const {
    const double s = std::sin(t), co = std::cos(t);
    return std::sqrt(a * co * co + b * s * s + 2 * c * s * co);
  }
};

}  // namespace testing
