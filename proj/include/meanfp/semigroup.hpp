#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "meanfp/errors.hpp"
#include "meanfp/lp_space.hpp"

namespace meanfp {

using Eigen::MatrixXd;

/// Element of the commutative semigroup S = N^k, written additively.
/// The all-zeros index acts as the identity (T_0 = id).
using MultiIndex = std::vector<int>;

MultiIndex zero_index(int k);
MultiIndex add_index(const MultiIndex& a, const MultiIndex& b);
int index_total(const MultiIndex& s);
std::string index_to_string(const MultiIndex& s);

/// A nonexpansive self-map of R^d: ||Tx - Ty||_p <= ||x - y||_p.
class NonexpansiveMap {
 public:
  virtual ~NonexpansiveMap() = default;
  virtual int dim() const = 0;
  /// y <- T(x).  x and y must not alias.
  virtual void apply_into(Eigen::Ref<const VectorXd> x,
                          Eigen::Ref<VectorXd> y) const = 0;
  /// Upper bound on the Lipschitz constant of T with respect to ||.||_p.
  virtual double lipschitz_bound(double p) const = 0;
  virtual std::string describe() const = 0;
  VectorXd apply(const VectorXd& x) const;
};

using MapPtr = std::shared_ptr<const NonexpansiveMap>;

/// x -> A x + b.  lipschitz_bound uses the largest singular value for
/// p = 2 and the interpolation bound ||A||_1^(1/p) ||A||_inf^(1-1/p)
/// otherwise.
class AffineMap final : public NonexpansiveMap {
 public:
  AffineMap(MatrixXd A, VectorXd b);

  int dim() const override { return static_cast<int>(b_.size()); }
  void apply_into(Eigen::Ref<const VectorXd> x,
                  Eigen::Ref<VectorXd> y) const override;
  double lipschitz_bound(double p) const override;
  std::string describe() const override;

  const MatrixXd& A() const { return A_; }
  const VectorXd& b() const { return b_; }

 private:
  MatrixXd A_;
  VectorXd b_;
  double sigma_max_;
  double norm1_;
  double norm_inf_;
};

/// Componentwise clamp onto the box [lo, hi]; nonexpansive for every p.
class ClampMap final : public NonexpansiveMap {
 public:
  ClampMap(VectorXd lo, VectorXd hi);

  int dim() const override { return static_cast<int>(lo_.size()); }
  void apply_into(Eigen::Ref<const VectorXd> x,
                  Eigen::Ref<VectorXd> y) const override;
  double lipschitz_bound(double) const override { return 1.0; }
  std::string describe() const override;

  const VectorXd& lo() const { return lo_; }
  const VectorXd& hi() const { return hi_; }

 private:
  VectorXd lo_, hi_;
};

/// Composition, parts applied first-to-last.
class ComposedMap final : public NonexpansiveMap {
 public:
  explicit ComposedMap(std::vector<MapPtr> parts);

  int dim() const override;
  void apply_into(Eigen::Ref<const VectorXd> x,
                  Eigen::Ref<VectorXd> y) const override;
  double lipschitz_bound(double p) const override;
  std::string describe() const override;

  const std::vector<MapPtr>& parts() const { return parts_; }

 private:
  std::vector<MapPtr> parts_;
};

MapPtr make_affine(MatrixXd A, VectorXd b);
MapPtr make_clamp(VectorXd lo, VectorXd hi);
MapPtr make_composed(std::vector<MapPtr> parts);
MapPtr make_identity(int dim);

/// The closed convex set C the representation acts on.
struct Domain {
  enum class Kind { All, Box, Ball };

  Kind kind = Kind::All;
  VectorXd lo, hi;      // Box
  VectorXd center;      // Ball
  double radius = 0.0;  // Ball

  static Domain all();
  static Domain box(VectorXd lo, VectorXd hi);
  static Domain ball(VectorXd center, double radius);

  bool contains(const LpSpace& space, const VectorXd& x,
                double tol = 0.0) const;
  /// How far x sits outside C (0 when inside).
  double escape(const LpSpace& space, const VectorXd& x) const;
  /// Cheap pull of x into C (clamp / radial scaling); used for default
  /// start points only.
  VectorXd pull_inside(const LpSpace& space, const VectorXd& x) const;
};

/// Representation of S = N^k on C by k commuting nonexpansive generators:
/// T_s = G_k^{s_k} o ... o G_1^{s_1} (generator 1 applied first).
/// Construction certifies each generator's Lipschitz bound (<= 1 + 1e-12,
/// conservatively rejecting anything the bound cannot certify); the sampled
/// properties -- pairwise commutation, nonexpansiveness along sampled
/// pairs, invariance of C -- are checked by certify().
class Representation {
 public:
  Representation(LpSpace space, std::vector<MapPtr> generators,
                 Domain domain = Domain::all());

  const LpSpace& space() const { return space_; }
  int dim() const { return space_.dim(); }
  int k() const { return static_cast<int>(generators_.size()); }
  const NonexpansiveMap& generator(int i) const { return *generators_[i]; }
  MapPtr generator_ptr(int i) const { return generators_[i]; }
  const Domain& domain() const { return domain_; }

  /// T_s x; throws std::domain_error when x lies outside C.
  VectorXd apply(const MultiIndex& s, const VectorXd& x) const;

  void check_index(const MultiIndex& s) const;
  void check_in_domain(const VectorXd& x) const;

  /// Largest ||G_i x - x||_p over the generators.
  double max_generator_residual(const VectorXd& x) const;

 private:
  LpSpace space_;
  std::vector<MapPtr> generators_;
  Domain domain_;
};

struct CertificationReport {
  int samples = 0;
  double max_commutator_defect = 0.0;
  int witness_i = -1, witness_j = -1;
  VectorXd witness_point;
  double max_expansive_ratio = 0.0;
  double max_domain_escape = 0.0;
  double commutator_tol = 0.0;
  double ratio_tol = 0.0;
  bool pass = false;

  std::string summary() const;
};

/// Randomized check of the representation properties: commutation defect
/// <= 1e-9, expansiveness ratio <= 1 + 1e-9, generators map C into C.
CertificationReport certify(const Representation& rep, int samples,
                            std::uint64_t seed);

/// Draw a point of C (uniform on boxes, radially corrected on balls,
/// uniform on [-5, 5]^d when C = E).
VectorXd sample_point(const LpSpace& space, const Domain& domain,
                      std::mt19937_64& rng);

/// Exact description of Fix(S) for affine/clamp generators: an affine
/// subspace { point + basis t } intersected with an optional box.
/// Membership is residual based (every generator moves the point by at
/// most 1e-10); project() is the metric projection, available for p = 2.
class FixedSetDescription {
 public:
  FixedSetDescription(Representation rep, VectorXd point, MatrixXd basis,
                      bool has_box, VectorXd lo, VectorXd hi);

  const VectorXd& point() const { return point_; }
  const MatrixXd& basis() const { return basis_; }
  int subspace_dim() const { return static_cast<int>(basis_.cols()); }
  bool has_box() const { return has_box_; }
  const VectorXd& lo() const { return lo_; }
  const VectorXd& hi() const { return hi_; }

  double max_generator_residual(const VectorXd& x) const;
  bool contains(const VectorXd& x) const;

  /// Metric projection onto Fix(S); exact for a lone subspace or box,
  /// Dykstra's alternating scheme for the intersection.  p = 2 only.
  VectorXd project(const VectorXd& u) const;

  VectorXd sample(std::mt19937_64& rng) const;
  std::vector<VectorXd> sample_many(int count, std::uint64_t seed) const;

 private:
  VectorXd project_subspace(const VectorXd& u) const;

  Representation rep_;
  VectorXd point_;
  MatrixXd basis_;  // d x r, orthonormal columns
  bool has_box_;
  VectorXd lo_, hi_;
};

/// Builds the Fix(S) description.  Affine generators contribute the
/// solution space of (I - A)x = b, clamp generators their boxes; a box
/// domain is intersected in.  Throws UnsupportedError for composed
/// generators or ball domains, InfeasibleError when the intersection is
/// empty.
FixedSetDescription fixed_set_oracle(const Representation& rep);

}  // namespace meanfp
