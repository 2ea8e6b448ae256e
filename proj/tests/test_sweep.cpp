// The OpenMP kernels must reproduce their serial references exactly.
#include <doctest.h>

#include "liesys/errors.hpp"
#include "liesys/sweep.hpp"
#include "liesys/systems.hpp"
#include "support.hpp"

using namespace liesys;
using testing::vec;

TEST_CASE("verify_algebra: serial and parallel agree") {
  const ShapeFunctions shapes{ShapeFunction::power(1.0, 2), ShapeFunction::constant(1.0)};
  const auto def = generalized_ermakov(FrequencyProfile::sinusoidal(), shapes);
  const auto probes = def.sampler().sample(300, 2);
  const auto s = serial::verify_algebra(def.generators(), StructureConstants::sl2(), probes, 1e-9);
  const auto p = parallel::verify_algebra(def.generators(), StructureConstants::sl2(), probes, 1e-9);
  CHECK(s.worst_residual == p.worst_residual);
  CHECK(s.pair_residuals == p.pair_residuals);
  CHECK(s.worst_point == p.worst_point);
  CHECK(s.passed == p.passed);
}

TEST_CASE("verify_algebra rejects mismatched input") {
  const auto def = oscillator_1d(FrequencyProfile::constant(1.0));
  const std::vector<Point> none;
  CHECK_THROWS_AS(parallel::verify_algebra(def.generators(), StructureConstants::sl2(), none, 1e-9), DomainError);
  CHECK_THROWS_AS(parallel::verify_algebra(def.generators(), StructureConstants(2), def.sampler().sample(3, 0), 1e-9),
                  DimensionError);
  // singular probes propagate out of the parallel region
  const auto mp = milne_pinney(FrequencyProfile::constant(1.0), 1.0);
  const std::vector<Point> bad{vec({1.0, 0.0}), vec({0.0, 1.0})};
  CHECK_THROWS_AS(parallel::verify_algebra(mp.generators(), StructureConstants::sl2(), bad, 1e-9), SingularityError);
}

TEST_CASE("evaluate: NaN from the first failure on, in both versions") {
  std::vector<State> pts;
  for (int i = 0; i < 50; ++i) pts.push_back(vec({double(i)}));
  const auto f = [](const State& p) {
    if (p(0) == 17.0 || p(0) == 30.0) throw SingularityError("bad point");
    return p(0) * p(0);
  };
  const auto s = serial::evaluate(pts, f), p = parallel::evaluate(pts, f);
  REQUIRE(s.first_failure.has_value());
  CHECK(*s.first_failure == 17);
  CHECK(p.first_failure == s.first_failure);
  CHECK(p.failure_message == s.failure_message);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i < 17) {
      CHECK(s.values[i] == p.values[i]);
    } else {
      CHECK(std::isnan(s.values[i]));
      CHECK(std::isnan(p.values[i]));
    }
  }
}

TEST_CASE("integrate_ensemble: serial and parallel agree, failures are per member") {
  const auto def = milne_pinney(FrequencyProfile::constant(1.0), -1.0);  // attractive: some members collapse
  std::vector<State> states{vec({1.0, 0.0}), vec({2.0, 3.0}), vec({0.5, 0.0}), vec({1.5, 2.0})};
  const auto o = def.integrator_options();
  const auto s = serial::integrate_ensemble(def.as_rhs(), states, 0.0, 1.0, o);
  const auto p = parallel::integrate_ensemble(def.as_rhs(), states, 0.0, 1.0, o);
  REQUIRE(s.size() == p.size());
  int failures = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s[i].trajectory.has_value() == p[i].trajectory.has_value());
    CHECK(s[i].last_good_time == p[i].last_good_time);
    if (s[i].trajectory) {
      CHECK(s[i].trajectory->times() == p[i].trajectory->times());
      CHECK(s[i].trajectory->states().back() == p[i].trajectory->states().back());
    } else {
      ++failures;
      CHECK(s[i].error == p[i].error);
    }
  }
  CHECK(failures >= 1);
  CHECK(failures < 4);
}
