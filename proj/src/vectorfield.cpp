#include "liesys/vectorfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "liesys/errors.hpp"
#include "liesys/sweep.hpp"

namespace liesys {

Jacobian central_difference_jacobian(const std::function<Point(const Point&)>& f, const Point& p) {
  const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, p.norm());
  const auto n = p.size();
  Jacobian j(n, n);
  Point q = p;
  for (Eigen::Index c = 0; c < n; ++c) {
    q(c) = p(c) + h;
    const Point fp = f(q);
    q(c) = p(c) - h;
    const Point fm = f(q);
    q(c) = p(c);
    if (fp.size() != n || fm.size() != n) {
      throw DimensionError("finite-difference Jacobian: field returned a vector of the wrong size");
    }
    j.col(c) = (fp - fm) / (2.0 * h);
  }
  return j;
}

VectorField::VectorField(std::string name, int dimension, EvalFn eval, JacobianFn jacobian)
    : name_(std::move(name)),
      dimension_(dimension),
      eval_(std::move(eval)),
      jacobian_(std::move(jacobian)),
      analytic_(true) {
  if (dimension_ <= 0) throw DimensionError("vector field '" + name_ + "' needs a positive dimension");
}

VectorField::VectorField(std::string name, int dimension, EvalFn eval)
    : name_(std::move(name)), dimension_(dimension), eval_(std::move(eval)), analytic_(false) {
  if (dimension_ <= 0) throw DimensionError("vector field '" + name_ + "' needs a positive dimension");
  jacobian_ = [f = eval_](const Point& p) { return central_difference_jacobian(f, p); };
}

void VectorField::check(const Point& p) const {
  if (p.size() != dimension_) {
    std::ostringstream os;
    os << "vector field '" << name_ << "' has dimension " << dimension_ << ", got a point of size " << p.size();
    throw DimensionError(os.str());
  }
}

Point VectorField::operator()(const Point& p) const {
  check(p);
  return eval_(p);
}

Jacobian VectorField::jacobian(const Point& p) const {
  check(p);
  return jacobian_(p);
}

// --- structure constants -------------------------------------------------

StructureConstants::StructureConstants(int r) : r_(r), c_(static_cast<std::size_t>(r * r * r), 0.0) {
  if (r <= 0) throw DimensionError("structure constants need r >= 1");
}

StructureConstants StructureConstants::sl2() {
  StructureConstants c(3);
  c.set(1, 2, 3, 2.0);
  c.set(1, 3, 1, -1.0);
  c.set(2, 3, 2, 1.0);
  return c;
}

std::size_t StructureConstants::index(int a, int b, int g) const {
  if (a < 1 || a > r_ || b < 1 || b > r_ || g < 1 || g > r_) {
    throw DimensionError("structure constant index out of range");
  }
  return static_cast<std::size_t>(((a - 1) * r_ + (b - 1)) * r_ + (g - 1));
}

void StructureConstants::set(int a, int b, int g, double value) {
  if (a == b && value != 0.0) throw DomainError("structure constants: c_aa^g must vanish", value);
  c_[index(a, b, g)] = value;
  c_[index(b, a, g)] = (a == b) ? 0.0 : -value;
}

double StructureConstants::operator()(int a, int b, int g) const { return c_[index(a, b, g)]; }

bool StructureConstants::antisymmetric() const {
  for (int a = 1; a <= r_; ++a)
    for (int b = 1; b <= r_; ++b)
      for (int g = 1; g <= r_; ++g)
        if ((*this)(a, b, g) != -(*this)(b, a, g)) return false;
  return true;
}

double StructureConstants::jacobi_residual() const {
  // [[ea,eb],ec] + [[eb,ec],ea] + [[ec,ea],eb] = 0, component e.
  double worst = 0.0;
  const auto& c = *this;
  for (int a = 1; a <= r_; ++a)
    for (int b = 1; b <= r_; ++b)
      for (int cc = 1; cc <= r_; ++cc)
        for (int e = 1; e <= r_; ++e) {
          double s = 0.0;
          for (int d = 1; d <= r_; ++d) {
            s += c(a, b, d) * c(d, cc, e) + c(b, cc, d) * c(d, a, e) + c(cc, a, d) * c(d, b, e);
          }
          worst = std::max(worst, std::abs(s));
        }
  return worst;
}

// --- brackets ---------------------------------------------------------------

Point bracket(const VectorField& x, const VectorField& y, const Point& p) {
  if (x.dimension() != y.dimension()) {
    throw DimensionError("bracket of '" + x.name() + "' and '" + y.name() + "': dimension mismatch");
  }
  return y.jacobian(p) * x(p) - x.jacobian(p) * y(p);
}

std::string AlgebraReport::describe() const {
  std::ostringstream os;
  os.precision(3);
  os << (passed ? "closure holds" : "closure FAILED") << ": worst residual " << std::scientific << worst_residual
     << " (tol " << tolerance << ") over " << probes << " probes";
  if (!passed) {
    os << "; pair (" << worst_alpha << "," << worst_beta << ") at [";
    for (Eigen::Index i = 0; i < worst_point.size(); ++i) os << (i ? ", " : "") << worst_point(i);
    os << "]";
  }
  return os.str();
}

AlgebraReport verify_algebra(std::span<const VectorField> fields, const StructureConstants& c,
                             std::span<const Point> probes, double tol) {
  return parallel::verify_algebra(fields, c, probes, tol);
}

// --- prolongation -----------------------------------------------------------

VectorField diagonal_prolongation(const VectorField& x, int copies) {
  if (copies < 1) throw DimensionError("diagonal prolongation needs copies >= 1");
  if (copies == 1) return x;
  const int n = x.dimension();
  const int big = n * copies;
  auto eval = [x, n, copies](const Point& p) {
    Point out(p.size());
    for (int b = 0; b < copies; ++b) out.segment(b * n, n) = x(Point(p.segment(b * n, n)));
    return out;
  };
  auto jac = [x, n, copies](const Point& p) {
    Jacobian j = Jacobian::Zero(p.size(), p.size());
    for (int b = 0; b < copies; ++b) j.block(b * n, b * n, n, n) = x.jacobian(Point(p.segment(b * n, n)));
    return j;
  };
  const std::string name = x.name() + "^(" + std::to_string(copies) + ")";
  if (x.has_analytic_jacobian()) return VectorField(name, big, eval, jac);
  return VectorField(name, big, eval);
}

// --- probes -------------------------------------------------------------------

ProbeSampler::ProbeSampler(int dimension, double box, double guard_band)
    : dimension_(dimension), box_(box), band_(guard_band) {
  if (dimension <= 0) throw DimensionError("probe sampler needs a positive dimension");
  if (!(guard_band >= 0.0 && guard_band < box)) throw DomainError("guard band must lie in [0, box)", guard_band);
}

ProbeSampler& ProbeSampler::guard(int index, int sign) {
  if (index < 0 || index >= dimension_) throw DimensionError("guarded coordinate out of range");
  guards_.push_back({index, sign});
  return *this;
}

Point ProbeSampler::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> full(-box_, box_);
  std::uniform_real_distribution<double> side(band_, box_);
  std::bernoulli_distribution coin(0.5);
  Point p(dimension_);
  for (int i = 0; i < dimension_; ++i) p(i) = full(rng);
  for (const auto& g : guards_) {
    const double mag = side(rng);
    int s = g.sign;
    if (s == 0) s = coin(rng) ? 1 : -1;
    p(g.index) = s * mag;
  }
  return p;
}

std::vector<Point> ProbeSampler::sample(std::size_t count, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::vector<Point> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample(rng));
  return out;
}

ProbeSampler ProbeSampler::prolonged(int copies) const {
  ProbeSampler s(dimension_ * copies, box_, band_);
  for (int b = 0; b < copies; ++b)
    for (const auto& g : guards_) s.guard(b * dimension_ + g.index, g.sign);
  return s;
}

// --- rank test -----------------------------------------------------------------

int numerical_rank(std::span<const VectorField> fields, const Point& p, double rank_tol) {
  if (fields.empty()) return 0;
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(fields.size()), p.size());
  for (std::size_t a = 0; a < fields.size(); ++a) rows.row(static_cast<Eigen::Index>(a)) = fields[a](p).transpose();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rank_tol * s(0)) ++rank;
  return rank;
}

MinimalMResult minimal_m(std::span<const VectorField> fields, int max_copies, int probes_per_level,
                         double rank_tol, const ProbeSampler& base, std::uint64_t seed) {
  if (fields.empty()) throw DimensionError("minimal_m needs at least one field");
  if (max_copies < 1 || probes_per_level < 1) throw DomainError("minimal_m needs max_copies >= 1 and probes >= 1");
  for (const auto& f : fields) {
    if (f.dimension() != base.dimension()) throw DimensionError("minimal_m: sampler and field dimensions differ");
  }
  MinimalMResult result;
  result.algebra_dimension = static_cast<int>(fields.size());
  for (int k = 1; k <= max_copies; ++k) {
    std::vector<VectorField> prolonged;
    prolonged.reserve(fields.size());
    for (const auto& f : fields) prolonged.push_back(diagonal_prolongation(f, k));
    const auto probes = base.prolonged(k).sample(static_cast<std::size_t>(probes_per_level),
                                                 seed + static_cast<std::uint64_t>(k));
    std::map<int, int> votes;
    for (const auto& p : probes) ++votes[numerical_rank(prolonged, p, rank_tol)];
    // Majority; ties go to the larger rank (non-generic points only lower it).
    int best_rank = 0, best_votes = -1;
    for (const auto& [rank, count] : votes) {
      if (count >= best_votes) {
        best_rank = rank;
        best_votes = count;
      }
    }
    result.ranks.push_back(best_rank);
    if (best_rank == result.algebra_dimension) {
      result.m = k;
      break;
    }
  }
  return result;
}

}  // namespace liesys
