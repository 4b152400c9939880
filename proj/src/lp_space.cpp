#include "meanfp/lp_space.hpp"

#include <stdexcept>
#include <string>

namespace meanfp {

double pairing(const VectorXd& x, const VectorXd& f) {
  if (x.size() != f.size())
    throw std::invalid_argument("pairing: dimension mismatch (" +
                                std::to_string(x.size()) + " vs " +
                                std::to_string(f.size()) + ")");
  return x.dot(f);
}

LpSpace::LpSpace(int dim, double p) : dim_(dim), p_(p) {
  if (dim < 1) throw std::invalid_argument("LpSpace: dimension must be >= 1");
  if (!(p > 1.0) || !std::isfinite(p))
    throw std::invalid_argument("LpSpace: exponent p must lie in (1, inf)");
}

void LpSpace::check_dim(const VectorXd& x) const {
  if (x.size() != dim_)
    throw std::invalid_argument("LpSpace: expected dimension " +
                                std::to_string(dim_) + ", got " +
                                std::to_string(x.size()));
}

double LpSpace::norm(const VectorXd& x) const {
  check_dim(x);
  return lp_norm(x, p_);
}

double LpSpace::dual_norm(const VectorXd& f) const {
  check_dim(f);
  return lp_norm(f, q());
}

VectorXd LpSpace::duality_map(const VectorXd& x) const {
  check_dim(x);
  if (p_ == 2.0) return x;
  const double nx = lp_norm(x, p_);
  if (nx == 0.0) return VectorXd::Zero(dim_);
  const double scale = std::pow(nx, 2.0 - p_);
  VectorXd j(dim_);
  for (int i = 0; i < dim_; ++i) {
    const double t = x[i];
    const double mag = std::pow(std::abs(t), p_ - 1.0);
    j[i] = scale * (t > 0.0 ? mag : (t < 0.0 ? -mag : 0.0));
  }
  return j;
}

}  // namespace meanfp
