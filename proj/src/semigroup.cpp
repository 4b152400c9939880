#include "meanfp/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

namespace meanfp {

namespace {
constexpr double kLipschitzSlack = 1e-12;
constexpr double kCommutatorTol = 1e-9;
constexpr double kRatioTol = 1.0 + 1e-9;
constexpr double kDomainTol = 1e-9;
constexpr double kMembershipResidual = 1e-10;
constexpr double kGeomTol = 1e-8;

// Dykstra's alternating projections onto box and affine subspace.  Stops
// once the two projection outputs coincide and x is stationary; stopping on
// x alone is wrong, x can plateau while the correction terms still carry
// the iterate toward the intersection.
template <typename SubspaceProj>
VectorXd dykstra_box_subspace(const SubspaceProj& proj_sub, const VectorXd& lo,
                              const VectorXd& hi, const VectorXd& start,
                              int max_iters) {
  VectorXd x = start;
  VectorXd p = VectorXd::Zero(start.size());
  VectorXd q = VectorXd::Zero(start.size());
  for (int it = 0; it < max_iters; ++it) {
    const VectorXd y = (x + p).cwiseMax(lo).cwiseMin(hi);
    p += x - y;
    const VectorXd x_next = proj_sub(y + q);
    q += y - x_next;
    const double scale = 1.0 + x_next.norm();
    const double gap = (y - x_next).norm();
    const double change = (x_next - x).norm();
    x = x_next;
    if (gap <= 1e-12 * scale && change <= 1e-12 * scale) break;
  }
  return x;
}
}  // namespace

MultiIndex zero_index(int k) { return MultiIndex(static_cast<size_t>(k), 0); }

MultiIndex add_index(const MultiIndex& a, const MultiIndex& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("add_index: mismatched arity");
  MultiIndex out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

int index_total(const MultiIndex& s) {
  int t = 0;
  for (int v : s) t += v;
  return t;
}

std::string index_to_string(const MultiIndex& s) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ")";
  return os.str();
}

VectorXd NonexpansiveMap::apply(const VectorXd& x) const {
  VectorXd y(dim());
  apply_into(x, y);
  return y;
}

AffineMap::AffineMap(MatrixXd A, VectorXd b) : A_(std::move(A)), b_(std::move(b)) {
  if (A_.rows() != A_.cols() || A_.rows() != b_.size())
    throw std::invalid_argument("AffineMap: A must be d x d and b of length d");
  Eigen::JacobiSVD<MatrixXd> svd(A_);
  sigma_max_ = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  norm1_ = A_.cwiseAbs().colwise().sum().maxCoeff();
  norm_inf_ = A_.cwiseAbs().rowwise().sum().maxCoeff();
}

void AffineMap::apply_into(Eigen::Ref<const VectorXd> x,
                           Eigen::Ref<VectorXd> y) const {
  y.noalias() = A_ * x;
  y += b_;
}

double AffineMap::lipschitz_bound(double p) const {
  if (p == 2.0) return sigma_max_;
  // Riesz-Thorin between l1 and linf: ||A||_p <= ||A||_1^(1/p) ||A||_inf^(1-1/p).
  return std::pow(norm1_, 1.0 / p) * std::pow(norm_inf_, 1.0 - 1.0 / p);
}

std::string AffineMap::describe() const {
  std::ostringstream os;
  os << "affine(d=" << dim() << ")";
  return os.str();
}

ClampMap::ClampMap(VectorXd lo, VectorXd hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() != hi_.size())
    throw std::invalid_argument("ClampMap: lo/hi dimension mismatch");
  if ((lo_.array() > hi_.array()).any())
    throw std::invalid_argument("ClampMap: needs lo <= hi componentwise");
}

void ClampMap::apply_into(Eigen::Ref<const VectorXd> x,
                          Eigen::Ref<VectorXd> y) const {
  y = x.cwiseMax(lo_).cwiseMin(hi_);
}

std::string ClampMap::describe() const {
  std::ostringstream os;
  os << "clamp(d=" << dim() << ")";
  return os.str();
}

ComposedMap::ComposedMap(std::vector<MapPtr> parts) : parts_(std::move(parts)) {
  if (parts_.empty())
    throw std::invalid_argument("ComposedMap: needs at least one part");
  for (const auto& m : parts_)
    if (m->dim() != parts_[0]->dim())
      throw std::invalid_argument("ComposedMap: mixed dimensions");
}

int ComposedMap::dim() const { return parts_[0]->dim(); }

void ComposedMap::apply_into(Eigen::Ref<const VectorXd> x,
                             Eigen::Ref<VectorXd> y) const {
  VectorXd cur = x;
  VectorXd nxt(dim());
  for (const auto& m : parts_) {
    m->apply_into(cur, nxt);
    cur.swap(nxt);
  }
  y = cur;
}

double ComposedMap::lipschitz_bound(double p) const {
  double b = 1.0;
  for (const auto& m : parts_) b *= m->lipschitz_bound(p);
  return b;
}

std::string ComposedMap::describe() const {
  std::ostringstream os;
  os << "compose[";
  for (size_t i = 0; i < parts_.size(); ++i)
    os << (i ? " " : "") << parts_[i]->describe();
  os << "]";
  return os.str();
}

MapPtr make_affine(MatrixXd A, VectorXd b) {
  return std::make_shared<AffineMap>(std::move(A), std::move(b));
}

MapPtr make_clamp(VectorXd lo, VectorXd hi) {
  return std::make_shared<ClampMap>(std::move(lo), std::move(hi));
}

MapPtr make_composed(std::vector<MapPtr> parts) {
  return std::make_shared<ComposedMap>(std::move(parts));
}

MapPtr make_identity(int dim) {
  return make_affine(MatrixXd::Identity(dim, dim), VectorXd::Zero(dim));
}

Domain Domain::all() { return Domain{}; }

Domain Domain::box(VectorXd lo, VectorXd hi) {
  if (lo.size() != hi.size() || (lo.array() > hi.array()).any())
    throw std::invalid_argument("Domain::box: needs lo <= hi componentwise");
  Domain d;
  d.kind = Kind::Box;
  d.lo = std::move(lo);
  d.hi = std::move(hi);
  return d;
}

Domain Domain::ball(VectorXd center, double radius) {
  if (!(radius > 0))
    throw std::invalid_argument("Domain::ball: radius must be positive");
  Domain d;
  d.kind = Kind::Ball;
  d.center = std::move(center);
  d.radius = radius;
  return d;
}

bool Domain::contains(const LpSpace& space, const VectorXd& x,
                      double tol) const {
  return escape(space, x) <= tol;
}

double Domain::escape(const LpSpace& space, const VectorXd& x) const {
  switch (kind) {
    case Kind::All:
      return 0.0;
    case Kind::Box: {
      double e = 0.0;
      for (int i = 0; i < x.size(); ++i) {
        e = std::max(e, lo[i] - x[i]);
        e = std::max(e, x[i] - hi[i]);
      }
      return e;
    }
    case Kind::Ball:
      return std::max(0.0, lp_norm(x - center, space.p()) - radius);
  }
  return 0.0;
}

VectorXd Domain::pull_inside(const LpSpace& space, const VectorXd& x) const {
  switch (kind) {
    case Kind::All:
      return x;
    case Kind::Box:
      return x.cwiseMax(lo).cwiseMin(hi);
    case Kind::Ball: {
      const double r = lp_norm(x - center, space.p());
      if (r <= radius) return x;
      return center + (radius / r) * (x - center);
    }
  }
  return x;
}

Representation::Representation(LpSpace space, std::vector<MapPtr> generators,
                               Domain domain)
    : space_(space), generators_(std::move(generators)), domain_(std::move(domain)) {
  if (generators_.empty())
    throw std::invalid_argument("Representation: needs k >= 1 generators");
  for (const auto& g : generators_) {
    if (!g) throw std::invalid_argument("Representation: null generator");
    if (g->dim() != space_.dim())
      throw std::invalid_argument("Representation: generator dimension " +
                                  std::to_string(g->dim()) +
                                  " does not match space dimension " +
                                  std::to_string(space_.dim()));
    const double bound = g->lipschitz_bound(space_.p());
    if (!(bound <= 1.0 + kLipschitzSlack))
      throw CertificationError("generator " + g->describe() +
                               " failed the nonexpansiveness certificate: "
                               "Lipschitz bound " +
                               std::to_string(bound));
  }
  if (domain_.kind == Domain::Kind::Box && domain_.lo.size() != space_.dim())
    throw std::invalid_argument("Representation: domain box dimension mismatch");
  if (domain_.kind == Domain::Kind::Ball && domain_.center.size() != space_.dim())
    throw std::invalid_argument("Representation: domain ball dimension mismatch");
}

void Representation::check_index(const MultiIndex& s) const {
  if (static_cast<int>(s.size()) != k())
    throw std::invalid_argument("semigroup element has arity " +
                                std::to_string(s.size()) + ", expected " +
                                std::to_string(k()));
  for (int v : s)
    if (v < 0)
      throw std::invalid_argument("semigroup element has a negative entry");
}

void Representation::check_in_domain(const VectorXd& x) const {
  space_.check_dim(x);
  if (!domain_.contains(space_, x, kDomainTol))
    throw std::domain_error("point lies outside the constraint set C");
}

VectorXd Representation::apply(const MultiIndex& s, const VectorXd& x) const {
  check_index(s);
  check_in_domain(x);
  VectorXd cur = x;
  VectorXd nxt(dim());
  for (int i = 0; i < k(); ++i) {
    for (int rep = 0; rep < s[static_cast<size_t>(i)]; ++rep) {
      generators_[static_cast<size_t>(i)]->apply_into(cur, nxt);
      cur.swap(nxt);
    }
  }
  return cur;
}

double Representation::max_generator_residual(const VectorXd& x) const {
  double worst = 0.0;
  VectorXd y(dim());
  for (int i = 0; i < k(); ++i) {
    generators_[static_cast<size_t>(i)]->apply_into(x, y);
    worst = std::max(worst, lp_norm(y - x, space_.p()));
  }
  return worst;
}

VectorXd sample_point(const LpSpace& space, const Domain& domain,
                      std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int d = space.dim();
  VectorXd x(d);
  switch (domain.kind) {
    case Domain::Kind::Box:
      for (int i = 0; i < d; ++i)
        x[i] = domain.lo[i] + (domain.hi[i] - domain.lo[i]) * unit(rng);
      return x;
    case Domain::Kind::Ball: {
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (int i = 0; i < d; ++i) x[i] = gauss(rng);
      const double n = lp_norm(x, space.p());
      const double r =
          domain.radius * std::pow(unit(rng), 1.0 / static_cast<double>(d));
      if (n > 0) x *= r / n;
      return domain.center + x;
    }
    case Domain::Kind::All:
    default:
      for (int i = 0; i < d; ++i) x[i] = -5.0 + 10.0 * unit(rng);
      return x;
  }
}

CertificationReport certify(const Representation& rep, int samples,
                            std::uint64_t seed) {
  if (samples < 1)
    throw std::invalid_argument("certify: samples must be >= 1");
  std::mt19937_64 rng(seed);
  CertificationReport report;
  report.samples = samples;
  report.commutator_tol = kCommutatorTol;
  report.ratio_tol = kRatioTol;

  const int k = rep.k();
  const int d = rep.dim();
  VectorXd gi(d), gj(d), gij(d), gji(d), ty(d);
  for (int n = 0; n < samples; ++n) {
    const VectorXd x = sample_point(rep.space(), rep.domain(), rng);
    const VectorXd y = sample_point(rep.space(), rep.domain(), rng);
    const double dxy = lp_norm(x - y, rep.space().p());
    for (int i = 0; i < k; ++i) {
      rep.generator(i).apply_into(x, gi);
      rep.generator(i).apply_into(y, ty);
      if (dxy > 1e-12) {
        const double ratio = lp_norm(gi - ty, rep.space().p()) / dxy;
        report.max_expansive_ratio = std::max(report.max_expansive_ratio, ratio);
      }
      report.max_domain_escape = std::max(
          report.max_domain_escape, rep.domain().escape(rep.space(), gi));
      for (int j = i + 1; j < k; ++j) {
        rep.generator(j).apply_into(x, gj);
        rep.generator(j).apply_into(gi, gji);
        rep.generator(i).apply_into(gj, gij);
        const double defect = lp_norm(gji - gij, rep.space().p());
        if (defect > report.max_commutator_defect) {
          report.max_commutator_defect = defect;
          report.witness_i = i;
          report.witness_j = j;
          report.witness_point = x;
        }
      }
    }
  }
  report.pass = report.max_commutator_defect <= kCommutatorTol &&
                report.max_expansive_ratio <= kRatioTol &&
                report.max_domain_escape <= kDomainTol;
  return report;
}

std::string CertificationReport::summary() const {
  std::ostringstream os;
  os << (pass ? "PASS" : "FAIL") << " certification over " << samples
     << " samples: commutator defect " << max_commutator_defect << " (tol "
     << commutator_tol << ")";
  if (!pass && witness_i >= 0 && witness_point.size() > 0) {
    os << ", witness generators (" << witness_i << "," << witness_j
       << ") at point [";
    for (int i = 0; i < witness_point.size(); ++i)
      os << (i ? ", " : "") << witness_point[i];
    os << "]";
  }
  os << ", expansive ratio " << max_expansive_ratio << " (tol " << ratio_tol
     << "), domain escape " << max_domain_escape;
  return os.str();
}

FixedSetDescription::FixedSetDescription(Representation rep, VectorXd point,
                                         MatrixXd basis, bool has_box,
                                         VectorXd lo, VectorXd hi)
    : rep_(std::move(rep)),
      point_(std::move(point)),
      basis_(std::move(basis)),
      has_box_(has_box),
      lo_(std::move(lo)),
      hi_(std::move(hi)) {}

double FixedSetDescription::max_generator_residual(const VectorXd& x) const {
  return rep_.max_generator_residual(x);
}

bool FixedSetDescription::contains(const VectorXd& x) const {
  if (static_cast<int>(x.size()) != rep_.dim()) return false;
  if (!rep_.domain().contains(rep_.space(), x, kDomainTol)) return false;
  return max_generator_residual(x) <= kMembershipResidual;
}

VectorXd FixedSetDescription::project_subspace(const VectorXd& u) const {
  if (basis_.cols() == 0) return point_;
  return point_ + basis_ * (basis_.transpose() * (u - point_));
}

VectorXd FixedSetDescription::project(const VectorXd& u) const {
  if (rep_.space().p() != 2.0)
    throw UnsupportedError(
        "metric projection onto Fix(S) is only available for p = 2");
  rep_.space().check_dim(u);
  if (!has_box_) return project_subspace(u);
  const bool whole_space = basis_.cols() == rep_.dim();
  if (whole_space) return u.cwiseMax(lo_).cwiseMin(hi_);

  const VectorXd x = dykstra_box_subspace(
      [this](const VectorXd& v) { return project_subspace(v); }, lo_, hi_, u,
      100000);
  const double box_escape =
      std::max(0.0, std::max((lo_ - x).maxCoeff(), (x - hi_).maxCoeff()));
  if (box_escape > kGeomTol)
    throw InfeasibleError("Dykstra projection did not reach the intersection");
  return x;
}

VectorXd FixedSetDescription::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int r = subspace_dim();
  if (r == 0) return point_;

  if (has_box_ && r == 1) {
    // Exact parameter interval of { point + basis t } inside the box.
    double t_lo = -std::numeric_limits<double>::infinity();
    double t_hi = std::numeric_limits<double>::infinity();
    for (int i = 0; i < point_.size(); ++i) {
      const double dir = basis_(i, 0);
      if (std::abs(dir) < 1e-14) continue;
      double a = (lo_[i] - point_[i]) / dir;
      double b = (hi_[i] - point_[i]) / dir;
      if (a > b) std::swap(a, b);
      t_lo = std::max(t_lo, a);
      t_hi = std::min(t_hi, b);
    }
    if (!(t_lo <= t_hi))
      throw InfeasibleError("fixed-point segment has empty box intersection");
    const double t = t_lo + (t_hi - t_lo) * unit(rng);
    return point_ + basis_.col(0) * t;
  }

  if (!has_box_) {
    VectorXd t(r);
    for (int i = 0; i < r; ++i) t[i] = -5.0 + 10.0 * unit(rng);
    return point_ + basis_ * t;
  }

  // r >= 2 with a box: draw in the box, land on the subspace, repair with
  // Dykstra when the landing leaves the box (Euclidean machinery; the set
  // itself does not depend on p).
  for (int attempt = 0; attempt < 64; ++attempt) {
    VectorXd x(point_.size());
    for (int i = 0; i < x.size(); ++i)
      x[i] = lo_[i] + (hi_[i] - lo_[i]) * unit(rng);
    VectorXd y = project_subspace(x);
    const double escape =
        std::max(0.0, std::max((lo_ - y).maxCoeff(), (y - hi_).maxCoeff()));
    if (escape <= 1e-12) return y;
    const VectorXd z = dykstra_box_subspace(
        [this](const VectorXd& v) { return project_subspace(v); }, lo_, hi_, y,
        50000);
    if (max_generator_residual(z) <= kMembershipResidual) return z;
  }
  throw InfeasibleError("could not sample the fixed-point set");
}

std::vector<VectorXd> FixedSetDescription::sample_many(
    int count, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::vector<VectorXd> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(sample(rng));
  return out;
}

FixedSetDescription fixed_set_oracle(const Representation& rep) {
  const int d = rep.dim();
  if (rep.domain().kind == Domain::Kind::Ball)
    throw UnsupportedError("fixed_set_oracle: ball domains are not supported");

  bool has_box = false;
  VectorXd lo = VectorXd::Constant(d, -std::numeric_limits<double>::infinity());
  VectorXd hi = VectorXd::Constant(d, std::numeric_limits<double>::infinity());
  std::vector<const AffineMap*> affine;
  for (int i = 0; i < rep.k(); ++i) {
    const NonexpansiveMap* g = &rep.generator(i);
    if (const auto* a = dynamic_cast<const AffineMap*>(g)) {
      affine.push_back(a);
    } else if (const auto* c = dynamic_cast<const ClampMap*>(g)) {
      has_box = true;
      lo = lo.cwiseMax(c->lo());
      hi = hi.cwiseMin(c->hi());
    } else {
      throw UnsupportedError(
          "fixed_set_oracle supports affine and clamp generators only");
    }
  }
  if (rep.domain().kind == Domain::Kind::Box) {
    has_box = true;
    lo = lo.cwiseMax(rep.domain().lo);
    hi = hi.cwiseMin(rep.domain().hi);
  }
  if (has_box && (lo.array() > hi.array()).any())
    throw InfeasibleError("fixed_set_oracle: clamp boxes do not intersect");

  VectorXd x0 = VectorXd::Zero(d);
  MatrixXd basis = MatrixXd::Identity(d, d);
  if (!affine.empty()) {
    MatrixXd M(static_cast<int>(affine.size()) * d, d);
    VectorXd c(static_cast<int>(affine.size()) * d);
    for (size_t i = 0; i < affine.size(); ++i) {
      M.middleRows(static_cast<int>(i) * d, d) =
          MatrixXd::Identity(d, d) - affine[i]->A();
      c.segment(static_cast<int>(i) * d, d) = affine[i]->b();
    }
    Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() ? sv(0) : 0.0;
    const double rank_tol = 1e-9 * std::max(1.0, smax);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > rank_tol) ++rank;
    // Minimum-norm particular solution.
    VectorXd ut_c = svd.matrixU().transpose() * c;
    VectorXd t = VectorXd::Zero(sv.size());
    for (int i = 0; i < rank; ++i) t(i) = ut_c(i) / sv(i);
    x0 = svd.matrixV() * t;
    if ((M * x0 - c).norm() > kGeomTol * (1.0 + c.norm()))
      throw InfeasibleError(
          "fixed_set_oracle: affine generators have no common fixed point");
    basis = svd.matrixV().rightCols(d - rank);
  }

  FixedSetDescription desc(rep, x0, basis, has_box, lo, hi);

  // Feasibility of the intersection.
  if (has_box) {
    VectorXd probe = 0.5 * (lo + hi);
    for (int i = 0; i < d; ++i)
      if (!std::isfinite(probe[i])) probe[i] = std::isfinite(lo[i]) ? lo[i] : (std::isfinite(hi[i]) ? hi[i] : 0.0);
    if (desc.subspace_dim() == 0) {
      if ((x0.array() < lo.array() - kGeomTol).any() ||
          (x0.array() > hi.array() + kGeomTol).any())
        throw InfeasibleError("fixed_set_oracle: empty intersection");
    } else if (desc.subspace_dim() < d) {
      auto proj_sub = [&](const VectorXd& v) -> VectorXd {
        return x0 + basis * (basis.transpose() * (v - x0));
      };
      const VectorXd z =
          dykstra_box_subspace(proj_sub, lo, hi, proj_sub(probe), 50000);
      const double escape =
          std::max(0.0, std::max((lo - z).maxCoeff(), (z - hi).maxCoeff()));
      if (escape > kGeomTol)
        throw InfeasibleError("fixed_set_oracle: empty intersection");
    }
  }
  return desc;
}

}  // namespace meanfp
