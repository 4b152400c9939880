#pragma once

#include <utility>
#include <vector>

#include "meanfp/means.hpp"

namespace meanfp {

/// An alpha-contraction f on E, 0 <= alpha < 1.
class Contraction {
 public:
  enum class Kind { Constant, ScaledTowardPoint, Affine };

  /// f(x) = u, alpha = 0.
  static Contraction constant(VectorXd u);
  /// f(x) = u + alpha (x - u), alpha in [0, 1).
  static Contraction scaled_toward(double alpha, VectorXd u);
  /// f(x) = F x + b; the contraction constant is certified as the
  /// operator-norm bound of F in ||.||_p and must come out < 1.
  static Contraction affine(MatrixXd F, VectorXd b, const LpSpace& space);

  Kind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  int dim() const;

  void apply_into(Eigen::Ref<const VectorXd> x, Eigen::Ref<VectorXd> y) const;
  VectorXd operator()(const VectorXd& x) const;

 private:
  Contraction(Kind kind, double alpha) : kind_(kind), alpha_(alpha) {}

  Kind kind_;
  double alpha_;
  VectorXd u_;
  MatrixXd F_;
  VectorXd b_;
};

/// epsilon_n in (0, 1), nonincreasing, -> 0.
class EpsilonSchedule {
 public:
  enum class Rule { InverseN, Power, LogDecay };

  /// 1/(n+1).
  static EpsilonSchedule inverse_n();
  /// 1/(n+1)^gamma, gamma in (0, 1].
  static EpsilonSchedule power(double gamma);
  /// c/log(n+2), c in (0, log 3) so that eps_1 < 1.
  static EpsilonSchedule log_decay(double c);

  double operator()(int n) const;
  Rule rule() const { return rule_; }

 private:
  EpsilonSchedule(Rule rule, double param) : rule_(rule), param_(param) {}

  Rule rule_;
  double param_;
};

struct SchemeConfig {
  EpsilonSchedule epsilon = EpsilonSchedule::inverse_n();
  int n_outer = 200;
  double inner_tol = 1e-10;
  long inner_max = 1000000;
  /// Early stop once ||z_n - z_{n-1}|| stays <= outer_tol for
  /// `outer_stall` consecutive steps; 0 disables.
  double outer_tol = 0.0;
  int outer_stall = 5;
  /// Warm start for the first outer step; when empty the constraint-set
  /// pull of the origin is used.
  VectorXd start;
};

struct InnerReport {
  int iterations = 0;
  bool converged = false;
  double q = 0.0;               // contraction factor eps*alpha + (1-eps)
  double final_residual = 0.0;  // ||z - (eps f(z) + (1-eps) T_mu z)||
  double first_step = 0.0;
  long apriori_iterations = 0;  // Banach-principle iteration bound
  double max_step_ratio = 0.0;  // observed geometric rate
};

struct InnerSolveResult {
  VectorXd z;
  VectorXd t_mu_z;  // T_mu evaluated at the returned z
  InnerReport report;
};

struct TraceRow {
  int n = 0;
  double epsilon = 0.0;
  InnerReport inner;
  VectorXd z;
  VectorXd generator_residuals;  // ||z - G_i z|| per generator
  double mean_residual = 0.0;    // ||z - T_{mu_n} z||
  // Diagnostics filled by verify::enrich_trace (0 until then).
  double vi_value = 0.0;
  double bound6_violation = 0.0;
  double gbh_violation = 0.0;
};

struct Trace {
  std::vector<TraceRow> rows;
  bool failed = false;     // an inner solve hit its iteration cap
  int failed_step = 0;
  bool early_stopped = false;

  const VectorXd& final_z() const;
  bool empty() const { return rows.empty(); }
};

/// Solves z = eps f(z) + (1-eps) T_mu z by Picard iteration; the map is a
/// q-contraction with q = eps alpha + (1-eps).  Returns once the step size
/// drops to inner_tol, which leaves the fixed-point residual of the
/// returned iterate below inner_tol as well.  eps may be 1 (pure f step,
/// used by the anchor scheme at n = 1).
InnerSolveResult solve_implicit(const Representation& rep,
                                const FiniteMean& mu, const Contraction& f,
                                double eps, const VectorXd& warm_start,
                                double inner_tol, long inner_max);

/// z_n = eps_n f(z_n) + (1-eps_n) T_{mu_n} z_n with mu_n the n-th Cesaro
/// box mean, warm starting each step at z_{n-1}.  The last iterate is the
/// scheme's limit estimate.
Trace run_viscosity(const Representation& rep, const SchemeConfig& cfg,
                    const Contraction& f);

/// z_n = (1/n) x + (1 - 1/n) T_mu z_n for a fixed mean mu.  Records
/// ||z_n - T_mu z_n||, which decays like ||x - T_mu z_n||/n.
Trace run_anchor(const Representation& rep, const FiniteMean& mu,
                 const VectorXd& anchor_x, int n_max, double inner_tol,
                 long inner_max = 1000000);

}  // namespace meanfp
