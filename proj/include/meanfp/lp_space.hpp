#pragma once

#include <Eigen/Core>
#include <cmath>

namespace meanfp {

using Eigen::VectorXd;

/// (sum_i |x_i|^p)^(1/p) for any dense Eigen expression.
template <typename Derived>
double lp_norm(const Eigen::MatrixBase<Derived>& x, double p) {
  if (p == 2.0) return x.norm();
  return std::pow(x.derived().array().abs().pow(p).sum(), 1.0 / p);
}

/// Pairing <x, f> between E and E* (both live in R^d coordinates).
double pairing(const VectorXd& x, const VectorXd& f);

/// Ambient space E = (R^d, ||.||_p) with 1 < p < infinity.  These spaces
/// are smooth and uniformly convex, so the normalized duality mapping is
/// single valued; in finite dimension it is also weak-to-weak continuous,
/// which is all the convergence statements need.
class LpSpace {
 public:
  LpSpace(int dim, double p);

  int dim() const { return dim_; }
  double p() const { return p_; }
  /// Dual exponent q = p/(p-1).
  double q() const { return p_ / (p_ - 1.0); }

  double norm(const VectorXd& x) const;
  /// Norm of a dual vector, ||.||_q.
  double dual_norm(const VectorXd& f) const;

  /// Normalized duality mapping J(x), the gradient of x -> ||x||_p^2 / 2:
  /// coordinates ||x||^(2-p) |x_i|^(p-1) sign(x_i), with J(0) = 0.
  /// For p = 2 this is the identity.
  VectorXd duality_map(const VectorXd& x) const;

  void check_dim(const VectorXd& x) const;

 private:
  int dim_;
  double p_;
};

}  // namespace meanfp
