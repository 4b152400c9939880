#pragma once

#include <span>
#include <string>
#include <vector>

#include "meanfp/scheme.hpp"

namespace meanfp {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct DiagnosticReport {
  std::vector<CheckResult> checks;

  /// pass iff value <= threshold; both must be finite.
  void add(const std::string& name, double value, double threshold);
  bool verdict() const;
  const CheckResult* find(const std::string& name) const;
  std::string to_text() const;
};

/// x in F_eps(T_t; D): x lies in D and ||x - T_t x|| <= eps.
bool approx_fixed_membership(const Representation& rep, const MultiIndex& t,
                             const Domain& D, double eps, const VectorXd& x);

/// Sunny-retraction inequality at the candidate value Px: reports
/// max_z <x - Px, J(z - Px)> over the supplied fixed points; pass iff
/// <= vi_tol.
DiagnosticReport variational_inequality(const LpSpace& space,
                                        const VectorXd& Px, const VectorXd& x,
                                        std::span<const VectorXd> fixed_samples,
                                        double vi_tol = 1e-6);

/// Same, plus the definitional requirement that a retraction value lands in
/// the set it retracts onto: max_i ||Px - G_i Px|| <= membership_tol.
DiagnosticReport variational_inequality(const Representation& rep,
                                        const VectorXd& Px, const VectorXd& x,
                                        std::span<const VectorXd> fixed_samples,
                                        double vi_tol = 1e-6,
                                        double membership_tol = 2e-2);

/// max over the last `tail` trace entries of <x - Px, J(z_n - Px)>; the
/// limsup of this quantity is <= 0 for the exact scheme.
double gamma_estimate(const LpSpace& space, const Trace& trace,
                      const VectorXd& x, const VectorXd& Px, int tail);

/// Per-step check of ||z_n - Px||^2 <= 2/(1-alpha) <x - Px, J(z_n - Px)>
/// with slack 10 inner_tol (1 + ||z_n - Px||); reports the worst signed
/// violation (<= 0 passes).
DiagnosticReport final_bound_check(const LpSpace& space, const Trace& trace,
                                   const VectorXd& x, const VectorXd& Px,
                                   double alpha, double inner_tol);

/// Per-step quadratic bound ||z_n - p||^2 <= 1/(1-alpha) <f(p)-p, J(z_n-p)>
/// and the linear boundedness bound ||z_n - p|| <= ||f(p)-p||/(1-alpha),
/// over the supplied fixed points, with inner_tol-proportional slack.
DiagnosticReport quadratic_bound_check(const LpSpace& space, const Trace& trace,
                                       const Contraction& f,
                                       std::span<const VectorXd> fixed_samples,
                                       double inner_tol);

/// <z_n - x, J(z_n - z)> <= 0 for anchor traces (slack grows with n since
/// z_n - x = (n-1)(T_mu z_n - z_n) amplifies the inner residual).
DiagnosticReport anchor_inequality_check(const LpSpace& space,
                                         const Trace& trace, const VectorXd& x,
                                         std::span<const VectorXd> fixed_samples,
                                         double inner_tol);

/// Metric projection onto the described fixed-point set; ground truth for
/// scheme limits in the Hilbert case (p = 2 only).
VectorXd projection_oracle(const LpSpace& space,
                           const FixedSetDescription& fixed_set,
                           const VectorXd& u);

/// Fills the per-row diagnostics: vi_value = <x - Px, J(z_n - Px)>,
/// bound6_violation = worst sample violation of the quadratic bound, and
/// gbh_violation for the final bound, all including their slacks.
void enrich_trace(const LpSpace& space, Trace& trace, const VectorXd& x,
                  const VectorXd& Px, const Contraction& f,
                  std::span<const VectorXd> fixed_samples, double inner_tol);

}  // namespace meanfp
