#pragma once

#include <functional>
#include <string>
#include <vector>

#include "liesys/integrate.hpp"
#include "liesys/vectorfield.hpp"

namespace liesys {

/// Which side of the singular hyperplane a Pinney-type block lives on.
enum class HalfPlane { positive, negative };

inline int sign_of(HalfPlane h) { return h == HalfPlane::positive ? 1 : -1; }

/// A scalar function together with its derivative.
struct ShapeFunction {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  std::string label;

  double operator()(double u) const { return value(u); }

  static ShapeFunction constant(double c);
  /// c * u^p
  static ShapeFunction power(double c, int p);
  /// Derivative by central differences.
  static ShapeFunction custom(std::function<double(double)> fn, std::string label);
};

/// f(y/x), g(y/x) of the generalized Ermakov system.
struct ShapeFunctions {
  ShapeFunction f;
  ShapeFunction g;
};

/// A Lie system: generators X_a, coefficients b_a(t), and the structure
/// constants the generators close on. The right-hand side is assembled as
/// sum_a b_a(t) X_a(p).
class SystemDef {
 public:
  SystemDef(std::string name, int dimension, std::vector<VectorField> generators,
            std::vector<std::function<double(double)>> coefficients, StructureConstants constants,
            std::vector<std::string> coordinate_names);

  const std::string& name() const noexcept { return name_; }
  int dimension() const noexcept { return dimension_; }
  const std::vector<VectorField>& generators() const noexcept { return generators_; }
  const std::vector<std::function<double(double)>>& coefficients() const noexcept { return coefficients_; }
  const StructureConstants& constants() const noexcept { return constants_; }
  const std::vector<std::string>& coordinate_names() const noexcept { return coordinate_names_; }

  State rhs(double t, const State& p) const;
  Rhs as_rhs() const;

  /// Marks coordinate `index` as singular at zero, living on the `sign` side.
  SystemDef& guard(int index, int sign);
  const std::vector<ProbeSampler::Guard>& guards() const noexcept { return guards_; }

  /// False when a guarded coordinate is within `min_abs` of zero or on the wrong side.
  bool in_domain(const State& p, double min_abs = 1e-6) const;
  /// Integrator options with the singularity abort wired in.
  IntegratorOptions integrator_options(double abs_tol = 1e-10, double rel_tol = 1e-10) const;
  /// Probe sampler on [-2,2]^n honoring the guards.
  ProbeSampler sampler(double box = 2.0, double guard_band = 0.1) const;

 private:
  std::string name_;
  int dimension_;
  std::vector<VectorField> generators_;
  std::vector<std::function<double(double)>> coefficients_;
  StructureConstants constants_;
  std::vector<std::string> coordinate_names_;
  std::vector<ProbeSampler::Guard> guards_;
};

/// x'' = -w^2(t) x on (x, v).
SystemDef oscillator_1d(const FrequencyProfile& omega);
/// Isotropic 2-d oscillator on (x1, v1, x2, v2).
SystemDef oscillator_2d(const FrequencyProfile& omega);
/// x'' = -w^2(t) x + k / x^3 on (x, v).
SystemDef milne_pinney(const FrequencyProfile& omega, double k, HalfPlane half = HalfPlane::positive);
/// Oscillator in x and Pinney block (k = 1) in y, on (x, vx, y, vy).
SystemDef ermakov(const FrequencyProfile& omega, HalfPlane half = HalfPlane::positive);
/// x'' = f(y/x)/x^3 - w^2 x, y'' = g(y/x)/y^3 - w^2 y on (x, vx, y, vy).
SystemDef generalized_ermakov(const FrequencyProfile& omega, const ShapeFunctions& shapes,
                              HalfPlane half = HalfPlane::positive);
/// Pinney block in x, oscillators in y and z, on (x, y, z, vx, vy, vz).
SystemDef pinney_triple(const FrequencyProfile& omega, double k, HalfPlane half = HalfPlane::positive);

}  // namespace liesys
