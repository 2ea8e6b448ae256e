#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace liesys {

using Point = Eigen::VectorXd;
using Jacobian = Eigen::MatrixXd;

/// Central-difference Jacobian with step cbrt(eps) * max(1, |p|).
Jacobian central_difference_jacobian(const std::function<Point(const Point&)>& f, const Point& p);

/// Autonomous vector field on R^n.
///
/// Built-in fields carry an analytic Jacobian. Fields constructed without one
/// fall back to central differences and report `has_analytic_jacobian() == false`.
class VectorField {
 public:
  using EvalFn = std::function<Point(const Point&)>;
  using JacobianFn = std::function<Jacobian(const Point&)>;

  VectorField(std::string name, int dimension, EvalFn eval, JacobianFn jacobian);
  VectorField(std::string name, int dimension, EvalFn eval);

  const std::string& name() const noexcept { return name_; }
  int dimension() const noexcept { return dimension_; }
  bool has_analytic_jacobian() const noexcept { return analytic_; }

  Point operator()(const Point& p) const;
  Jacobian jacobian(const Point& p) const;

 private:
  void check(const Point& p) const;

  std::string name_;
  int dimension_;
  EvalFn eval_;
  JacobianFn jacobian_;
  bool analytic_;
};

/// Structure constants c_{ab}^g of an r-dimensional Lie algebra, stored
/// antisymmetrically. Indices are 1-based in the public interface.
class StructureConstants {
 public:
  explicit StructureConstants(int r);

  /// The sl(2,R) relations [e1,e2] = 2 e3, [e1,e3] = -e1, [e2,e3] = e2.
  static StructureConstants sl2();

  int dimension() const noexcept { return r_; }

  /// Sets c_{ab}^g and c_{ba}^g = -c_{ab}^g.
  void set(int a, int b, int g, double value);
  double operator()(int a, int b, int g) const;

  bool antisymmetric() const;
  /// Largest |sum_d (c_{ab}^d c_{dc}^e + cyclic)| over all index triples.
  double jacobi_residual() const;

 private:
  std::size_t index(int a, int b, int g) const;

  int r_;
  std::vector<double> c_;
};

/// Lie bracket [X, Y](p) = DY(p) X(p) - DX(p) Y(p).
Point bracket(const VectorField& x, const VectorField& y, const Point& p);

struct AlgebraReport {
  bool passed = true;
  double tolerance = 0.0;
  double worst_residual = 0.0;
  int worst_alpha = 0;  // 1-based
  int worst_beta = 0;
  Point worst_point;
  std::size_t probes = 0;
  /// max residual per pair (a < b), row-major over the strict upper triangle.
  std::vector<double> pair_residuals;

  std::string describe() const;
};

/// Checks [X_a, X_b](p) = sum_g c_{ab}^g X_g(p) for every pair and probe.
/// Runs the probe sweep with OpenMP; `serial::verify_algebra` is the reference.
AlgebraReport verify_algebra(std::span<const VectorField> fields, const StructureConstants& c,
                             std::span<const Point> probes, double tol);

/// Field on R^(n*copies) acting as X on every n-block.
VectorField diagonal_prolongation(const VectorField& x, int copies);

/// Uniform random points in [-box, box]^n. Guarded coordinates avoid the band
/// |q| < guard_band; a nonzero sign additionally pins them to one half-line.
class ProbeSampler {
 public:
  struct Guard {
    int index;
    int sign;  // +1, -1, or 0 for "either side"
  };

  explicit ProbeSampler(int dimension, double box = 2.0, double guard_band = 0.1);

  ProbeSampler& guard(int index, int sign = 0);

  int dimension() const noexcept { return dimension_; }
  const std::vector<Guard>& guards() const noexcept { return guards_; }

  Point sample(std::mt19937_64& rng) const;
  std::vector<Point> sample(std::size_t count, std::uint64_t seed) const;

  /// Sampler for `copies` independent blocks of this one.
  ProbeSampler prolonged(int copies) const;

 private:
  int dimension_;
  double box_;
  double band_;
  std::vector<Guard> guards_;
};

struct MinimalMResult {
  std::optional<int> m;    // empty when no k <= max_copies reaches full rank
  std::vector<int> ranks;  // majority rank for k = 1, 2, ...
  int algebra_dimension = 0;
};

/// Numerical rank of the fields stacked as rows at p, counting singular values above rank_tol * sigma_1.
int numerical_rank(std::span<const VectorField> fields, const Point& p, double rank_tol);

/// Smallest number of copies whose diagonal prolongations are pointwise
/// independent at generic points. Each level takes the majority rank over
/// `probes_per_level` random probes drawn from `base` (one block per copy).
MinimalMResult minimal_m(std::span<const VectorField> fields, int max_copies, int probes_per_level,
                         double rank_tol, const ProbeSampler& base, std::uint64_t seed = 0);

}  // namespace liesys
