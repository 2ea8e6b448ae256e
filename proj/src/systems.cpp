#include "liesys/systems.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "liesys/errors.hpp"

namespace liesys {

// --- shape functions ------------------------------------------------------

ShapeFunction ShapeFunction::constant(double c) {
  std::ostringstream os;
  os << c;
  return {[c](double) { return c; }, [](double) { return 0.0; }, os.str()};
}

ShapeFunction ShapeFunction::power(double c, int p) {
  std::ostringstream os;
  os << c << "*u^" << p;
  return {[c, p](double u) { return c * std::pow(u, p); },
          [c, p](double u) { return p == 0 ? 0.0 : c * p * std::pow(u, p - 1); }, os.str()};
}

ShapeFunction ShapeFunction::custom(std::function<double(double)> fn, std::string label) {
  auto d = [fn](double u) {
    const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, std::abs(u));
    return (fn(u + h) - fn(u - h)) / (2.0 * h);
  };
  return {fn, d, std::move(label)};
}

// --- SystemDef ------------------------------------------------------------------

SystemDef::SystemDef(std::string name, int dimension, std::vector<VectorField> generators,
                     std::vector<std::function<double(double)>> coefficients, StructureConstants constants,
                     std::vector<std::string> coordinate_names)
    : name_(std::move(name)),
      dimension_(dimension),
      generators_(std::move(generators)),
      coefficients_(std::move(coefficients)),
      constants_(std::move(constants)),
      coordinate_names_(std::move(coordinate_names)) {
  if (generators_.size() != coefficients_.size()) throw DimensionError(name_ + ": one coefficient per generator");
  if (static_cast<int>(generators_.size()) != constants_.dimension()) {
    throw DimensionError(name_ + ": structure constants do not match the number of generators");
  }
  for (const auto& g : generators_) {
    if (g.dimension() != dimension_) throw DimensionError(name_ + ": generator '" + g.name() + "' has wrong dimension");
  }
  if (static_cast<int>(coordinate_names_.size()) != dimension_) {
    throw DimensionError(name_ + ": one coordinate name per dimension");
  }
}

State SystemDef::rhs(double t, const State& p) const {
  State out = State::Zero(dimension_);
  for (std::size_t a = 0; a < generators_.size(); ++a) {
    const double b = coefficients_[a](t);
    if (b != 0.0) out += b * generators_[a](p);
  }
  return out;
}

Rhs SystemDef::as_rhs() const {
  return [self = *this](double t, const State& p) { return self.rhs(t, p); };
}

SystemDef& SystemDef::guard(int index, int sign) {
  if (index < 0 || index >= dimension_) throw DimensionError(name_ + ": guarded coordinate out of range");
  guards_.push_back({index, sign});
  return *this;
}

bool SystemDef::in_domain(const State& p, double min_abs) const {
  for (const auto& g : guards_) {
    const double q = p(g.index);
    if (!(std::abs(q) >= min_abs)) return false;
    if (g.sign != 0 && q * g.sign < 0.0) return false;
  }
  return true;
}

IntegratorOptions SystemDef::integrator_options(double abs_tol, double rel_tol) const {
  IntegratorOptions o;
  o.abs_tol = abs_tol;
  o.rel_tol = rel_tol;
  if (!guards_.empty()) {
    o.domain_guard = [self = *this](const State& p) { return self.in_domain(p); };
    o.domain_message = name_ + ": trajectory reached the singular hyperplane (|q| < 1e-6)";
  }
  return o;
}

ProbeSampler SystemDef::sampler(double box, double guard_band) const {
  ProbeSampler s(dimension_, box, guard_band);
  for (const auto& g : guards_) s.guard(g.index, g.sign);
  return s;
}

// --- generators ----------------------------------------------------------------------

namespace {

using Fn = std::function<double(double)>;

Fn minus_omega_squared(const FrequencyProfile& omega) {
  return [w = omega.omega_squared](double t) { return -w(t); };
}

const Fn one = [](double) { return 1.0; };
const Fn zero = [](double) { return 0.0; };

void require_nonzero(double q, const char* system, const char* coordinate) {
  if (q == 0.0) {
    throw SingularityError(std::string(system) + ": generator evaluated on " + coordinate + " = 0");
  }
}

// Blocks of (position, velocity) index pairs; X1 = sum q dv, X3 = 1/2 sum (q dq - v dv).
struct Blocks {
  std::vector<std::pair<int, int>> pairs;
  int n;
};

VectorField x1_field(const std::string& name, Blocks b) {
  return VectorField(
      name, b.n,
      [b](const Point& p) {
        Point out = Point::Zero(b.n);
        for (auto [q, v] : b.pairs) out(v) = p(q);
        return out;
      },
      [b](const Point&) {
        Jacobian j = Jacobian::Zero(b.n, b.n);
        for (auto [q, v] : b.pairs) j(v, q) = 1.0;
        return j;
      });
}

VectorField x3_field(const std::string& name, Blocks b) {
  return VectorField(
      name, b.n,
      [b](const Point& p) {
        Point out = Point::Zero(b.n);
        for (auto [q, v] : b.pairs) {
          out(q) = 0.5 * p(q);
          out(v) = -0.5 * p(v);
        }
        return out;
      },
      [b](const Point&) {
        Jacobian j = Jacobian::Zero(b.n, b.n);
        for (auto [q, v] : b.pairs) {
          j(q, q) = 0.5;
          j(v, v) = -0.5;
        }
        return j;
      });
}

// X2 = sum v dq + sum_{pinney blocks} k/q^3 dv
VectorField x2_field(const std::string& name, Blocks b, std::vector<std::pair<int, double>> pinney,
                     const char* system) {
  return VectorField(
      name, b.n,
      [b, pinney, system](const Point& p) {
        Point out = Point::Zero(b.n);
        for (auto [q, v] : b.pairs) out(q) = p(v);
        for (auto [block, k] : pinney) {
          auto [q, v] = b.pairs[static_cast<std::size_t>(block)];
          if (k != 0.0) {
            require_nonzero(p(q), system, "the Pinney coordinate");
            out(v) += k / (p(q) * p(q) * p(q));
          }
        }
        return out;
      },
      [b, pinney, system](const Point& p) {
        Jacobian j = Jacobian::Zero(b.n, b.n);
        for (auto [q, v] : b.pairs) j(q, v) = 1.0;
        for (auto [block, k] : pinney) {
          auto [q, v] = b.pairs[static_cast<std::size_t>(block)];
          if (k != 0.0) {
            require_nonzero(p(q), system, "the Pinney coordinate");
            const double q2 = p(q) * p(q);
            j(v, q) += -3.0 * k / (q2 * q2);
          }
        }
        return j;
      });
}

std::vector<Fn> standard_coefficients(const FrequencyProfile& omega) {
  return {minus_omega_squared(omega), one, zero};
}

}  // namespace

SystemDef oscillator_1d(const FrequencyProfile& omega) {
  const Blocks b{{{0, 1}}, 2};
  return SystemDef("oscillator_1d", 2,
                   {x1_field("X1", b), x2_field("X2", b, {}, "oscillator_1d"), x3_field("X3", b)},
                   standard_coefficients(omega), StructureConstants::sl2(), {"x", "v"});
}

SystemDef oscillator_2d(const FrequencyProfile& omega) {
  const Blocks b{{{0, 1}, {2, 3}}, 4};
  return SystemDef("oscillator_2d", 4,
                   {x1_field("X1", b), x2_field("X2", b, {}, "oscillator_2d"), x3_field("X3", b)},
                   standard_coefficients(omega), StructureConstants::sl2(), {"x1", "v1", "x2", "v2"});
}

SystemDef milne_pinney(const FrequencyProfile& omega, double k, HalfPlane half) {
  if (!std::isfinite(k)) throw DomainError("milne_pinney: k must be finite", k);
  const Blocks b{{{0, 1}}, 2};
  SystemDef s("milne_pinney", 2,
              {x1_field("L1", b), x2_field("L2", b, {{0, k}}, "milne_pinney"), x3_field("L3", b)},
              standard_coefficients(omega), StructureConstants::sl2(), {"x", "v"});
  if (k != 0.0) s.guard(0, sign_of(half));
  return s;
}

SystemDef ermakov(const FrequencyProfile& omega, HalfPlane half) {
  const Blocks b{{{0, 1}, {2, 3}}, 4};
  SystemDef s("ermakov", 4, {x1_field("X1", b), x2_field("X2", b, {{1, 1.0}}, "ermakov"), x3_field("X3", b)},
              standard_coefficients(omega), StructureConstants::sl2(), {"x", "vx", "y", "vy"});
  s.guard(2, sign_of(half));
  return s;
}

SystemDef generalized_ermakov(const FrequencyProfile& omega, const ShapeFunctions& shapes, HalfPlane half) {
  const Blocks b{{{0, 1}, {2, 3}}, 4};
  const ShapeFunctions sh = shapes;
  // N2 = vx dx + f(y/x)/x^3 dvx + vy dy + g(y/x)/y^3 dvy
  VectorField n2(
      "N2", 4,
      [sh](const Point& p) {
        const double x = p(0), y = p(2);
        require_nonzero(x, "generalized_ermakov", "x");
        require_nonzero(y, "generalized_ermakov", "y");
        const double u = y / x;
        Point out(4);
        out << p(1), sh.f(u) / (x * x * x), p(3), sh.g(u) / (y * y * y);
        return out;
      },
      [sh](const Point& p) {
        const double x = p(0), y = p(2);
        require_nonzero(x, "generalized_ermakov", "x");
        require_nonzero(y, "generalized_ermakov", "y");
        const double u = y / x;
        const double x3 = x * x * x, y3 = y * y * y;
        const double f = sh.f(u), df = sh.f.derivative(u);
        const double g = sh.g(u), dg = sh.g.derivative(u);
        Jacobian j = Jacobian::Zero(4, 4);
        j(0, 1) = 1.0;
        j(2, 3) = 1.0;
        j(1, 0) = -df * y / (x * x) / x3 - 3.0 * f / (x3 * x);
        j(1, 2) = df / x / x3;
        j(3, 0) = -dg * y / (x * x) / y3;
        j(3, 2) = dg / x / y3 - 3.0 * g / (y3 * y);
        return j;
      });
  SystemDef s("generalized_ermakov", 4, {x1_field("N1", b), n2, x3_field("N3", b)}, standard_coefficients(omega),
              StructureConstants::sl2(), {"x", "vx", "y", "vy"});
  s.guard(0, sign_of(half));
  s.guard(2, sign_of(half));
  return s;
}

SystemDef pinney_triple(const FrequencyProfile& omega, double k, HalfPlane half) {
  if (!std::isfinite(k)) throw DomainError("pinney_triple: k must be finite", k);
  // (x, y, z, vx, vy, vz)
  const Blocks b{{{0, 3}, {1, 4}, {2, 5}}, 6};
  SystemDef s("pinney_triple", 6,
              {x1_field("N1", b), x2_field("N2", b, {{0, k}}, "pinney_triple"), x3_field("N3", b)},
              standard_coefficients(omega), StructureConstants::sl2(), {"x", "y", "z", "vx", "vy", "vz"});
  if (k != 0.0) s.guard(0, sign_of(half));
  return s;
}

}  // namespace liesys
