#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "liesys/integrate.hpp"
#include "liesys/superposition.hpp"

namespace liesys {

using Mat2 = Eigen::Matrix2d;

/// Element c1 a1 + c2 a2 + c3 a3 of sl(2,R) in the basis
/// a1 = [[0,0],[-1,0]], a2 = [[0,-1],[0,0]], a3 = 1/2 diag(-1, 1).
struct Sl2Vector {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;

  Mat2 matrix() const;
  /// Coordinates of a traceless matrix. Throws DomainError if the trace is not ~0.
  static Sl2Vector from_matrix(const Mat2& m);

  static Sl2Vector a1() { return {1.0, 0.0, 0.0}; }
  static Sl2Vector a2() { return {0.0, 1.0, 0.0}; }
  static Sl2Vector a3() { return {0.0, 0.0, 1.0}; }

  friend Sl2Vector operator+(Sl2Vector a, Sl2Vector b) { return {a.c1 + b.c1, a.c2 + b.c2, a.c3 + b.c3}; }
  friend Sl2Vector operator*(double s, Sl2Vector a) { return {s * a.c1, s * a.c2, s * a.c3}; }
};

/// [[alpha, beta], [gamma, delta]] with unit determinant.
class SL2Matrix {
 public:
  /// Throws DomainError if |det - 1| > 1e-9.
  SL2Matrix(double alpha, double beta, double gamma, double delta);
  explicit SL2Matrix(const Mat2& m);

  static SL2Matrix identity() { return {1.0, 0.0, 0.0, 1.0}; }
  /// m / sqrt(det m); requires det m > 0.
  static SL2Matrix renormalized(const Mat2& m);

  double alpha() const { return m_(0, 0); }
  double beta() const { return m_(0, 1); }
  double gamma() const { return m_(1, 0); }
  double delta() const { return m_(1, 1); }
  double det() const { return m_.determinant(); }
  const Mat2& matrix() const { return m_; }

  SL2Matrix inverse() const { return {delta(), -beta(), -gamma(), alpha()}; }
  friend SL2Matrix operator*(const SL2Matrix& a, const SL2Matrix& b) { return SL2Matrix(Mat2(a.m_ * b.m_)); }

 private:
  Mat2 m_;
};

/// exp(s v) in closed form, classified by d = det(s v): elliptic (d > 0),
/// hyperbolic (d < 0), parabolic (|d| < 1e-12).
SL2Matrix sl2_exp(const Sl2Vector& v, double s);

/// Coordinates of g v g^{-1}.
Sl2Vector adjoint(const SL2Matrix& g, const Sl2Vector& v);

/// Solution of dg/dt g^{-1} = a(t), g(t0) = e, integrated as dg/dt = a(t) g
/// with the determinant renormalized after every accepted step.
class GroupSolution {
 public:
  GroupSolution(Trajectory entries, double max_correction)
      : entries_(std::move(entries)), max_correction_(max_correction) {}

  SL2Matrix at(double t) const;
  double t_begin() const { return entries_.t_begin(); }
  double t_end() const { return entries_.t_end(); }
  const std::vector<double>& times() const { return entries_.times(); }
  /// Entries (alpha, beta, gamma, delta) per sample.
  const Trajectory& entries() const { return entries_; }
  /// max |det - 1| over the stored samples.
  double max_det_drift() const;
  /// Largest |det - 1| seen before a renormalization, i.e. the per-step drift.
  double max_step_det_drift() const { return max_correction_; }

 private:
  Trajectory entries_;
  double max_correction_;
};

GroupSolution solve_group_equation(const std::function<Sl2Vector(double)>& a, double t0, double t1,
                                   double tol = 1e-10);

/// The curve a(t) = w^2(t) a1 - a2 shared by every system in this library.
std::function<Sl2Vector(double)> oscillator_curve(const FrequencyProfile& omega);

/// g (x, v)^T
PhasePoint linear_action(const SL2Matrix& g, PhasePoint p);

struct PinneyActionResult {
  double x_bar;             // carries sign(x)
  double v_bar_magnitude;   // the nonnegative root
  double v_bar_radicand;    // its radicand before the root
  double v_bar;             // signed velocity: ((alpha x + beta v)(gamma x + delta v) + k beta delta / x^2) / x_bar
};

/// SL(2,R) action on a half-plane of the Milne-Pinney phase space.
/// Throws SingularityError at x = 0 and DomainError on a negative radicand.
PinneyActionResult pinney_action(const SL2Matrix& a, PhasePoint p, double k);

/// tau(t) = int_{t_begin}^t ds / x1(s)^2 over the dense interpolant of x1.
double tau_reparametrization(const Trajectory& x1, double t, double tol = 1e-12);
/// tau at every sample time of x1, accumulated segment by segment.
std::vector<double> tau_series(const Trajectory& x1, double tol = 1e-12);

/// g1(t) = [[x1, 0], [dx1/dt, 1/x1]] built from a solution x1 with states (x, v).
class ParticularSolutionCurve {
 public:
  explicit ParticularSolutionCurve(const Trajectory& x1) : x1_(&x1) {}

  SL2Matrix at(double t) const;
  static SL2Matrix from(double x1, double v1);

 private:
  const Trajectory* x1_;
};

struct ReductionParameters {
  double A;
  double B;
};

/// (A, B) = Phi(g1(0)^{-1}, (x0, v0)) with Phi the Pinney action.
/// Throws DomainError when A = 0.
ReductionParameters reduction_parameters(double x1_0, double v1_0, double x0, double v0, double k);

struct Reduction {
  Trajectory trajectory;    // (x, v) on the sample grid of x1
  std::vector<double> tau;  // per sample
  std::vector<double> det_drift;  // |det g(t) - 1| of g1(t) h(tau) g1(0)^{-1}
  ReductionParameters parameters{0.0, 0.0};
};

/// d'Alembert reduction: x = x1 (k' + k tau), the general oscillator solution
/// from a nonvanishing particular one.
Reduction reduce_oscillator(const Trajectory& x1, double k_prime, double k);
/// (k', k) for the reduced solution through (x0, v0) at x1.t_begin().
Keys reduction_keys(const Trajectory& x1, double x0, double v0);

/// Milne-Pinney solution through (x0, v0) from a particular Milne-Pinney
/// solution x1, via h(tau) = exp((k a1 - a2) tau). Requires k > 0.
Reduction reduce_pinney_from_pinney(const Trajectory& x1, double x0, double v0, double k);

/// Milne-Pinney solution through (x0, v0) from a particular oscillator
/// solution x1 with the same frequency:
/// x = x1/A sqrt(A^4 + 2 A^3 B tau + (A^2 B^2 + k) tau^2).
Reduction reduce_pinney_from_oscillator(const Trajectory& x1, double x0, double v0, double k);

}  // namespace liesys
