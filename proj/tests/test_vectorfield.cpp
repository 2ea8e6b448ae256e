#include <doctest.h>

#include <random>

#include "liesys/errors.hpp"
#include "liesys/systems.hpp"
#include "liesys/vectorfield.hpp"
#include "support.hpp"

using namespace liesys;
using testing::vec;

namespace {

// Linear field p -> M p.
VectorField linear(const std::string& name, const Eigen::MatrixXd& m) {
  return VectorField(
      name, static_cast<int>(m.rows()), [m](const Point& p) -> Point { return m * p; },
      [m](const Point&) -> Jacobian { return m; });
}

}  // namespace

TEST_CASE("structure constants: sl2 relations, antisymmetry, Jacobi") {
  const auto c = StructureConstants::sl2();
  CHECK(c.dimension() == 3);
  CHECK(c(1, 2, 3) == 2.0);
  CHECK(c(2, 1, 3) == -2.0);
  CHECK(c(1, 3, 1) == -1.0);
  CHECK(c(2, 3, 2) == 1.0);
  CHECK(c(1, 1, 1) == 0.0);
  CHECK(c.antisymmetric());
  CHECK(c.jacobi_residual() < 1e-8);

  StructureConstants bad(3);
  bad.set(1, 2, 3, 1.0);
  bad.set(2, 3, 1, 1.0);
  bad.set(1, 3, 3, 1.0);
  CHECK(bad.jacobi_residual() > 1e-8);
  CHECK_THROWS_AS(bad.set(1, 1, 1, 1.0), DomainError);
  CHECK_THROWS_AS(bad(0, 1, 1), DimensionError);
}

TEST_CASE("bracket of linear fields is the matrix commutator") {
  // [X_A, X_B](p) = DX_B X_A - DX_A X_B = (B A - A B) p
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::MatrixXd a(3, 3), b(3, 3);
  for (int i = 0; i < 9; ++i) {
    a.data()[i] = u(rng);
    b.data()[i] = u(rng);
  }
  const Point p = vec({0.3, -1.2, 0.7});
  const Point expected = (b * a - a * b) * p;
  CHECK((bracket(linear("A", a), linear("B", b), p) - expected).norm() < 1e-13);
}

TEST_CASE("finite-difference fallback is flagged and accurate") {
  VectorField f("cubic", 2, [](const Point& p) -> Point { return vec({p(0) * p(0) * p(1), std::sin(p(1))}); });
  CHECK_FALSE(f.has_analytic_jacobian());
  const Point p = vec({0.7, -0.4});
  Jacobian exact(2, 2);
  exact << 2 * p(0) * p(1), p(0) * p(0), 0.0, std::cos(p(1));
  CHECK((f.jacobian(p) - exact).norm() < 1e-8);
  CHECK_THROWS_AS(f(vec({1.0})), DimensionError);
}

TEST_CASE("every system's generators close on sl(2,R)") {
  const auto w = FrequencyProfile::sinusoidal();
  const ShapeFunctions shapes{ShapeFunction::power(1.0, 2), ShapeFunction::constant(1.0)};
  for (const auto& def : {oscillator_1d(w), oscillator_2d(w), milne_pinney(w, 1.5), ermakov(w),
                          generalized_ermakov(w, shapes), pinney_triple(w, 0.7, HalfPlane::negative)}) {
    CAPTURE(def.name());
    const auto probes = def.sampler().sample(100, 5);
    const auto report = verify_algebra(def.generators(), StructureConstants::sl2(), probes, 1e-9);
    CHECK(report.passed);
    CHECK(report.pair_residuals.size() == 3);
  }
}

TEST_CASE("verify_algebra reports the worst pair for wrong constants") {
  const auto def = oscillator_1d(FrequencyProfile::constant(1.0));
  StructureConstants wrong = StructureConstants::sl2();
  wrong.set(1, 2, 3, 1.0);  // true value is 2
  const auto probes = def.sampler().sample(20, 0);
  const auto report = verify_algebra(def.generators(), wrong, probes, 1e-9);
  CHECK_FALSE(report.passed);
  CHECK(report.worst_alpha == 1);
  CHECK(report.worst_beta == 2);
  CHECK(report.describe().find("pair (1,2)") != std::string::npos);
}

TEST_CASE("diagonal prolongation commutes with the bracket") {
  const auto def = milne_pinney(FrequencyProfile::constant(1.0), 1.0);
  const auto& g = def.generators();
  const auto sampler = def.sampler().prolonged(3);
  for (const auto& p : sampler.sample(10, 9)) {
    for (int a = 0; a < 3; ++a) {
      for (int b = a + 1; b < 3; ++b) {
        const Point lifted = bracket(diagonal_prolongation(g[a], 3), diagonal_prolongation(g[b], 3), p);
        for (int blk = 0; blk < 3; ++blk) {
          const Point q = p.segment(2 * blk, 2);
          CHECK((lifted.segment(2 * blk, 2) - bracket(g[a], g[b], q)).norm() < 1e-10);
        }
      }
    }
  }
  CHECK(diagonal_prolongation(g[0], 1).dimension() == 2);
}

TEST_CASE("probe sampler honors guards and seeds") {
  ProbeSampler s(3, 2.0, 0.1);
  s.guard(0, 1).guard(2, 0);
  const auto a = s.sample(500, 17), b = s.sample(500, 17);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == b[i]);
    CHECK(a[i](0) >= 0.1);
    CHECK(std::abs(a[i](2)) >= 0.1);
    CHECK(a[i].cwiseAbs().maxCoeff() <= 2.0);
  }
  CHECK(s.sample(1, 18)[0] != a[0]);
  const auto wide = s.prolonged(2);
  CHECK(wide.dimension() == 6);
  CHECK(wide.guards().size() == 4);
}

TEST_CASE("numerical rank and minimal m") {
  const auto w = FrequencyProfile::constant(1.0);
  for (const auto& def : {oscillator_1d(w), milne_pinney(w, 1.0)}) {
    const auto r = minimal_m(def.generators(), 4, 7, 1e-8, def.sampler(), 0);
    REQUIRE(r.m.has_value());
    CHECK(*r.m == 2);
    CHECK(r.algebra_dimension == 3);
    // rank is monotone in the number of copies and saturates at dim g
    for (std::size_t i = 1; i < r.ranks.size(); ++i) CHECK(r.ranks[i] >= r.ranks[i - 1]);
    CHECK(r.ranks.front() == 2);
    CHECK(r.ranks.back() == 3);
  }
  const auto osc = oscillator_1d(w);
  CHECK(numerical_rank(osc.generators(), vec({0.0, 0.0}), 1e-8) == 0);
  const auto capped = minimal_m(osc.generators(), 1, 5, 1e-8, osc.sampler(), 0);
  CHECK_FALSE(capped.m.has_value());
}
