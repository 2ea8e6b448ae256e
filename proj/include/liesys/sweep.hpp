#pragma once

// Data-parallel sweeps over probes, samples, and initial conditions.
//
// Every kernel has a serial reference in `liesys::serial` and an OpenMP
// version in `liesys::parallel` that must return identical results. The
// library entry points (verify_algebra, drift, ...) call the parallel ones.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "liesys/integrate.hpp"
#include "liesys/vectorfield.hpp"

namespace liesys {

struct SweepValues {
  std::vector<double> values;  // NaN from the first failure on
  std::optional<std::size_t> first_failure;
  std::string failure_message;
};

/// One ensemble member: either a trajectory or the error that stopped it.
struct EnsembleMember {
  std::optional<Trajectory> trajectory;
  std::string error;
  double last_good_time = 0.0;
};

namespace serial {

AlgebraReport verify_algebra(std::span<const VectorField> fields, const StructureConstants& c,
                             std::span<const Point> probes, double tol);

SweepValues evaluate(std::span<const State> points, const std::function<double(const State&)>& f);

std::vector<EnsembleMember> integrate_ensemble(const Rhs& rhs, std::span<const State> initial_states, double t0,
                                               double t1, const IntegratorOptions& options);

}  // namespace serial

namespace parallel {

AlgebraReport verify_algebra(std::span<const VectorField> fields, const StructureConstants& c,
                             std::span<const Point> probes, double tol);

SweepValues evaluate(std::span<const State> points, const std::function<double(const State&)>& f);

std::vector<EnsembleMember> integrate_ensemble(const Rhs& rhs, std::span<const State> initial_states, double t0,
                                               double t1, const IntegratorOptions& options);

}  // namespace parallel

}  // namespace liesys
