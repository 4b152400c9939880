#include "meanfp/verify.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace meanfp {

void DiagnosticReport::add(const std::string& name, double value,
                           double threshold) {
  if (!std::isfinite(value) || !std::isfinite(threshold))
    throw std::invalid_argument("DiagnosticReport: non-finite check '" + name +
                                "'");
  checks.push_back({name, value, threshold, value <= threshold});
}

bool DiagnosticReport::verdict() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

const CheckResult* DiagnosticReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string DiagnosticReport::to_text() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.pass ? "  [ok]   " : "  [FAIL] ") << c.name << " = " << c.value
       << " (<= " << c.threshold << ")\n";
  }
  os << (verdict() ? "verdict: pass" : "verdict: FAIL") << "\n";
  return os.str();
}

bool approx_fixed_membership(const Representation& rep, const MultiIndex& t,
                             const Domain& D, double eps, const VectorXd& x) {
  if (!(eps > 0.0))
    throw std::invalid_argument("approx_fixed_membership: eps must be > 0");
  rep.space().check_dim(x);
  if (!D.contains(rep.space(), x, 0.0)) return false;
  const VectorXd tx = rep.apply(t, x);
  return lp_norm(x - tx, rep.space().p()) <= eps;
}

DiagnosticReport variational_inequality(const LpSpace& space,
                                        const VectorXd& Px, const VectorXd& x,
                                        std::span<const VectorXd> fixed_samples,
                                        double vi_tol) {
  if (fixed_samples.empty())
    throw std::invalid_argument("variational_inequality: no fixed points given");
  space.check_dim(Px);
  space.check_dim(x);
  double worst = -std::numeric_limits<double>::infinity();
  for (const VectorXd& z : fixed_samples) {
    const double v = pairing(x - Px, space.duality_map(z - Px));
    worst = std::max(worst, v);
  }
  DiagnosticReport report;
  report.add("vi_max", worst, vi_tol);
  return report;
}

DiagnosticReport variational_inequality(const Representation& rep,
                                        const VectorXd& Px, const VectorXd& x,
                                        std::span<const VectorXd> fixed_samples,
                                        double vi_tol, double membership_tol) {
  DiagnosticReport report =
      variational_inequality(rep.space(), Px, x, fixed_samples, vi_tol);
  report.add("retraction_in_fixed_set", rep.max_generator_residual(Px),
             membership_tol);
  return report;
}

double gamma_estimate(const LpSpace& space, const Trace& trace,
                      const VectorXd& x, const VectorXd& Px, int tail) {
  if (trace.empty())
    throw std::invalid_argument("gamma_estimate: empty trace");
  if (tail < 1 || tail > static_cast<int>(trace.rows.size()))
    throw std::invalid_argument("gamma_estimate: tail outside the trace");
  double worst = -std::numeric_limits<double>::infinity();
  for (size_t i = trace.rows.size() - static_cast<size_t>(tail);
       i < trace.rows.size(); ++i) {
    const VectorXd& z = trace.rows[i].z;
    worst = std::max(worst, pairing(x - Px, space.duality_map(z - Px)));
  }
  return worst;
}

DiagnosticReport final_bound_check(const LpSpace& space, const Trace& trace,
                                   const VectorXd& x, const VectorXd& Px,
                                   double alpha, double inner_tol) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& row : trace.rows) {
    const VectorXd diff = row.z - Px;
    const double dist = space.norm(diff);
    const double rhs =
        (2.0 / (1.0 - alpha)) * pairing(x - Px, space.duality_map(diff));
    const double slack = 10.0 * inner_tol * (1.0 + dist);
    worst = std::max(worst, dist * dist - rhs - slack);
  }
  DiagnosticReport report;
  report.add("gbh_violation_max", worst, 0.0);
  return report;
}

DiagnosticReport quadratic_bound_check(const LpSpace& space, const Trace& trace,
                                       const Contraction& f,
                                       std::span<const VectorXd> fixed_samples,
                                       double inner_tol) {
  if (fixed_samples.empty())
    throw std::invalid_argument("quadratic_bound_check: no fixed points given");
  const double alpha = f.alpha();
  double worst_quad = -std::numeric_limits<double>::infinity();
  double worst_bound = -std::numeric_limits<double>::infinity();
  for (const VectorXd& p : fixed_samples) {
    const VectorXd fp = f(p);
    const double radius = lp_norm(fp - p, space.p()) / (1.0 - alpha);
    for (const auto& row : trace.rows) {
      const VectorXd diff = row.z - p;
      const double dist = space.norm(diff);
      const double rhs =
          pairing(fp - p, space.duality_map(diff)) / (1.0 - alpha);
      const double slack = 10.0 * inner_tol * (1.0 + dist);
      worst_quad = std::max(worst_quad, dist * dist - rhs - slack);
      worst_bound = std::max(worst_bound, dist - radius - 10.0 * inner_tol);
    }
  }
  DiagnosticReport report;
  report.add("bound6_violation_max", worst_quad, 0.0);
  report.add("boundedness_violation_max", worst_bound, 0.0);
  return report;
}

DiagnosticReport anchor_inequality_check(const LpSpace& space,
                                         const Trace& trace, const VectorXd& x,
                                         std::span<const VectorXd> fixed_samples,
                                         double inner_tol) {
  if (fixed_samples.empty())
    throw std::invalid_argument("anchor_inequality_check: no fixed points");
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& row : trace.rows) {
    for (const VectorXd& z : fixed_samples) {
      const VectorXd diff = row.z - z;
      const double v = pairing(row.z - x, space.duality_map(diff));
      const double slack =
          10.0 * row.n * inner_tol * (1.0 + space.norm(diff));
      worst = std::max(worst, v - slack);
    }
  }
  DiagnosticReport report;
  report.add("anchor_vi_violation_max", worst, 0.0);
  return report;
}

VectorXd projection_oracle(const LpSpace& space,
                           const FixedSetDescription& fixed_set,
                           const VectorXd& u) {
  if (space.p() != 2.0)
    throw UnsupportedError("projection_oracle requires p = 2");
  space.check_dim(u);
  return fixed_set.project(u);
}

void enrich_trace(const LpSpace& space, Trace& trace, const VectorXd& x,
                  const VectorXd& Px, const Contraction& f,
                  std::span<const VectorXd> fixed_samples, double inner_tol) {
  const double alpha = f.alpha();
  std::vector<VectorXd> f_of_p;
  f_of_p.reserve(fixed_samples.size());
  for (const VectorXd& p : fixed_samples) f_of_p.push_back(f(p));

  for (auto& row : trace.rows) {
    const VectorXd diff_px = row.z - Px;
    const double dist_px = space.norm(diff_px);
    row.vi_value = pairing(x - Px, space.duality_map(diff_px));
    row.gbh_violation = dist_px * dist_px -
                        (2.0 / (1.0 - alpha)) * row.vi_value -
                        10.0 * inner_tol * (1.0 + dist_px);
    double worst = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < fixed_samples.size(); ++i) {
      const VectorXd diff = row.z - fixed_samples[i];
      const double dist = space.norm(diff);
      const double rhs =
          pairing(f_of_p[i] - fixed_samples[i], space.duality_map(diff)) /
          (1.0 - alpha);
      worst = std::max(worst,
                       dist * dist - rhs - 10.0 * inner_tol * (1.0 + dist));
    }
    row.bound6_violation = worst;
  }
}

}  // namespace meanfp
