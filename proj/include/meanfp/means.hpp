#pragma once

#include <optional>
#include <vector>

#include "meanfp/semigroup.hpp"

namespace meanfp {

/// Finitely supported probability weights on S = N^k.  The support is kept
/// sorted lexicographically and the weights are nonnegative and sum to 1
/// (within 1e-12).  Uniform box means remember their box size so that
/// defect computations can run in exact integer arithmetic and T_mu can
/// take the folded box path.
class FiniteMean {
 public:
  struct Entry {
    MultiIndex s;
    double w;
  };

  FiniteMean(int k, std::vector<Entry> support);

  int k() const { return k_; }
  const std::vector<Entry>& support() const { return support_; }
  /// Set when the mean is uniform on {0..n-1}^k.
  std::optional<int> box_n() const { return box_n_; }

 private:
  friend FiniteMean cesaro_mean(int n, int k);
  friend FiniteMean point_mass(const MultiIndex& s);

  int k_;
  std::vector<Entry> support_;
  std::optional<int> box_n_;
};

/// Cesaro box mean mu_n: uniform weights 1/n^k on {0..n-1}^k.  These form
/// the canonical left regular sequence; the defect of the unit shift e_i
/// is exactly 2/n.
FiniteMean cesaro_mean(int n, int k);

/// Point mass at s (so T_mu = T_s).
FiniteMean point_mass(const MultiIndex& s);

/// Total-variation norm || l_s^* mu - mu || in [0, 2]; zero iff the
/// shifted mean equals mu.  Exact (integer counting) for box means.
double regularity_defect(const FiniteMean& mu, const MultiIndex& shift);

/// Materialized orbit {T_s x : s in {0..n-1}^k}, computed by dynamic
/// programming along the axes so that entry s reproduces apply(rep, s, x)
/// bit for bit (same composition order).
class OrbitTable {
 public:
  OrbitTable(int k, int n, MatrixXd values);

  int k() const { return k_; }
  int n() const { return n_; }
  long total() const { return values_.cols(); }
  const MatrixXd& values() const { return values_; }

  long index_of(const MultiIndex& s) const;
  Eigen::Ref<const VectorXd> entry(const MultiIndex& s) const;

 private:
  int k_, n_;
  MatrixXd values_;  // d x n^k, lexicographic column order
};

OrbitTable mean_orbit_cache(const Representation& rep, int n,
                            const VectorXd& x);

/// T_mu x = sum_s w_s T_s x, compensated (Kahan) summation in
/// lexicographic support order.
VectorXd apply_mean(const Representation& rep, const FiniteMean& mu,
                    const VectorXd& x);

/// T_mu evaluator for the uniform mean on {0..n-1}^k that never
/// materializes the support.  It walks the orbit one axis at a time and
/// folds a ray as soon as a generator stops moving the point, which keeps
/// the cost near n*k instead of n^k on orbits that collapse; the value
/// agrees with apply_mean(cesaro_mean(n, k)) to roundoff.  Holds scratch
/// buffers, so each thread needs its own instance.
class BoxMeanApplier {
 public:
  BoxMeanApplier(const Representation& rep, int n);

  int n() const { return n_; }
  void apply(const VectorXd& x, VectorXd& out);
  VectorXd operator()(const VectorXd& x);

 private:
  struct Level {
    VectorXd cur, nxt, sub, acc, comp, kah_y, kah_t;
  };
  void recurse(int axis, const VectorXd& y, VectorXd& out);

  const Representation* rep_;
  int n_;
  std::vector<Level> levels_;
};

/// Reusable T_mu evaluator for an arbitrary finite mean: box means take
/// the folded BoxMeanApplier path, everything else falls back to
/// apply_mean.
class MeanApplier {
 public:
  MeanApplier(const Representation& rep, const FiniteMean& mu);

  void apply(const VectorXd& x, VectorXd& out);
  VectorXd operator()(const VectorXd& x);

 private:
  const Representation* rep_;
  const FiniteMean* mu_;
  std::optional<BoxMeanApplier> box_;
};

/// One-shot convenience around MeanApplier.
VectorXd apply_mean_fast(const Representation& rep, const FiniteMean& mu,
                         const VectorXd& x);

}  // namespace meanfp
