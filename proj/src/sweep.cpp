#include "liesys/sweep.hpp"

#include <cmath>
#include <exception>
#include <limits>

#include <omp.h>

#include "liesys/errors.hpp"

namespace liesys {

namespace {

void check_fields(std::span<const VectorField> fields, const StructureConstants& c, std::span<const Point> probes) {
  if (fields.empty()) throw DimensionError("verify_algebra: no fields");
  if (static_cast<int>(fields.size()) != c.dimension()) {
    throw DimensionError("verify_algebra: structure constants do not match the number of fields");
  }
  for (const auto& f : fields) {
    if (f.dimension() != fields.front().dimension()) throw DimensionError("verify_algebra: fields differ in dimension");
  }
  if (probes.empty()) throw DomainError("verify_algebra: no probe points");
}

// Residual of every pair (a < b) at one probe.
std::vector<double> probe_residuals(std::span<const VectorField> fields, const StructureConstants& c, const Point& p) {
  const int r = static_cast<int>(fields.size());
  std::vector<Point> values;
  std::vector<Jacobian> jacobians;
  values.reserve(fields.size());
  jacobians.reserve(fields.size());
  for (const auto& f : fields) {
    values.push_back(f(p));
    jacobians.push_back(f.jacobian(p));
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(r * (r - 1) / 2));
  for (int a = 0; a < r; ++a) {
    for (int b = a + 1; b < r; ++b) {
      Point residual = jacobians[b] * values[a] - jacobians[a] * values[b];
      for (int g = 0; g < r; ++g) {
        const double coeff = c(a + 1, b + 1, g + 1);
        if (coeff != 0.0) residual -= coeff * values[g];
      }
      const double norm = residual.norm();
      out.push_back(std::isfinite(norm) ? norm : std::numeric_limits<double>::infinity());
    }
  }
  return out;
}

AlgebraReport assemble(std::span<const VectorField> fields, std::span<const Point> probes,
                       const std::vector<std::vector<double>>& per_probe, double tol) {
  AlgebraReport report;
  report.tolerance = tol;
  report.probes = probes.size();
  const int r = static_cast<int>(fields.size());
  report.pair_residuals.assign(per_probe.front().size(), 0.0);
  double worst = -1.0;
  for (std::size_t i = 0; i < per_probe.size(); ++i) {
    int pair = 0;
    for (int a = 0; a < r; ++a) {
      for (int b = a + 1; b < r; ++b, ++pair) {
        const double v = per_probe[i][static_cast<std::size_t>(pair)];
        auto& slot = report.pair_residuals[static_cast<std::size_t>(pair)];
        slot = std::max(slot, v);
        if (v > worst) {
          worst = v;
          report.worst_alpha = a + 1;
          report.worst_beta = b + 1;
          report.worst_point = probes[i];
        }
      }
    }
  }
  report.worst_residual = std::max(worst, 0.0);
  report.passed = report.worst_residual <= tol;
  return report;
}

}  // namespace

namespace serial {

AlgebraReport verify_algebra(std::span<const VectorField> fields, const StructureConstants& c,
                             std::span<const Point> probes, double tol) {
  check_fields(fields, c, probes);
  std::vector<std::vector<double>> per_probe(probes.size());
  for (std::size_t i = 0; i < probes.size(); ++i) per_probe[i] = probe_residuals(fields, c, probes[i]);
  return assemble(fields, probes, per_probe, tol);
}

SweepValues evaluate(std::span<const State> points, const std::function<double(const State&)>& f) {
  SweepValues out;
  out.values.assign(points.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < points.size(); ++i) {
    try {
      out.values[i] = f(points[i]);
    } catch (const Error& e) {
      out.first_failure = i;
      out.failure_message = e.what();
      break;
    }
  }
  return out;
}

std::vector<EnsembleMember> integrate_ensemble(const Rhs& rhs, std::span<const State> initial_states, double t0,
                                               double t1, const IntegratorOptions& options) {
  std::vector<EnsembleMember> out(initial_states.size());
  for (std::size_t i = 0; i < initial_states.size(); ++i) {
    try {
      out[i].trajectory = integrate(rhs, initial_states[i], t0, t1, options);
      out[i].last_good_time = t1;
    } catch (const IntegrationError& e) {
      out[i].error = e.what();
      out[i].last_good_time = e.last_good_time();
    }
  }
  return out;
}

}  // namespace serial

namespace parallel {

// Exceptions cannot cross an OpenMP region; the first one is kept and rethrown.
AlgebraReport verify_algebra(std::span<const VectorField> fields, const StructureConstants& c,
                             std::span<const Point> probes, double tol) {
  check_fields(fields, c, probes);
  std::vector<std::vector<double>> per_probe(probes.size());
  std::exception_ptr failure;
  const auto n = static_cast<std::ptrdiff_t>(probes.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      per_probe[static_cast<std::size_t>(i)] = probe_residuals(fields, c, probes[static_cast<std::size_t>(i)]);
    } catch (...) {
#pragma omp critical(liesys_sweep_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return assemble(fields, probes, per_probe, tol);
}

SweepValues evaluate(std::span<const State> points, const std::function<double(const State&)>& f) {
  const auto n = static_cast<std::ptrdiff_t>(points.size());
  std::vector<double> values(points.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> errors(points.size());
  std::vector<char> failed(points.size(), 0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      values[k] = f(points[k]);
    } catch (const Error& e) {
      failed[k] = 1;
      errors[k] = e.what();
    }
  }
  // Same result as the serial sweep: everything from the first failure on is NaN.
  SweepValues out;
  out.values = std::move(values);
  for (std::size_t i = 0; i < failed.size(); ++i) {
    if (failed[i]) {
      out.first_failure = i;
      out.failure_message = errors[i];
      for (std::size_t j = i; j < out.values.size(); ++j) out.values[j] = std::numeric_limits<double>::quiet_NaN();
      break;
    }
  }
  return out;
}

std::vector<EnsembleMember> integrate_ensemble(const Rhs& rhs, std::span<const State> initial_states, double t0,
                                               double t1, const IntegratorOptions& options) {
  std::vector<EnsembleMember> out(initial_states.size());
  const auto n = static_cast<std::ptrdiff_t>(initial_states.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out[k].trajectory = integrate(rhs, initial_states[k], t0, t1, options);
      out[k].last_good_time = t1;
    } catch (const IntegrationError& e) {
      out[k].error = e.what();
      out[k].last_good_time = e.last_good_time();
    } catch (...) {
#pragma omp critical(liesys_sweep_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace parallel

}  // namespace liesys
