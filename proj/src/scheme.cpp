#include "meanfp/scheme.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace meanfp {

namespace {
constexpr double kContractionSlack = 1e-12;
}

Contraction Contraction::constant(VectorXd u) {
  Contraction f(Kind::Constant, 0.0);
  f.u_ = std::move(u);
  return f;
}

Contraction Contraction::scaled_toward(double alpha, VectorXd u) {
  if (!(alpha >= 0.0) || !(alpha < 1.0))
    throw std::invalid_argument("Contraction: alpha must lie in [0, 1)");
  Contraction f(Kind::ScaledTowardPoint, alpha);
  f.u_ = std::move(u);
  return f;
}

Contraction Contraction::affine(MatrixXd F, VectorXd b, const LpSpace& space) {
  AffineMap probe(F, b);  // reuses the operator-norm certificates
  const double bound = probe.lipschitz_bound(space.p());
  if (!(bound < 1.0 - kContractionSlack))
    throw CertificationError(
        "affine contraction failed its certificate: ||F||_p bound " +
        std::to_string(bound) + " is not < 1");
  Contraction f(Kind::Affine, bound);
  f.F_ = std::move(F);
  f.b_ = std::move(b);
  return f;
}

int Contraction::dim() const {
  switch (kind_) {
    case Kind::Constant:
    case Kind::ScaledTowardPoint:
      return static_cast<int>(u_.size());
    case Kind::Affine:
      return static_cast<int>(b_.size());
  }
  return 0;
}

void Contraction::apply_into(Eigen::Ref<const VectorXd> x,
                             Eigen::Ref<VectorXd> y) const {
  switch (kind_) {
    case Kind::Constant:
      y = u_;
      return;
    case Kind::ScaledTowardPoint:
      y = u_ + alpha_ * (x - u_);
      return;
    case Kind::Affine:
      y.noalias() = F_ * x;
      y += b_;
      return;
  }
}

VectorXd Contraction::operator()(const VectorXd& x) const {
  VectorXd y(dim());
  apply_into(x, y);
  return y;
}

EpsilonSchedule EpsilonSchedule::inverse_n() {
  return EpsilonSchedule(Rule::InverseN, 0.0);
}

EpsilonSchedule EpsilonSchedule::power(double gamma) {
  if (!(gamma > 0.0) || !(gamma <= 1.0))
    throw std::invalid_argument(
        "EpsilonSchedule::power: gamma must lie in (0, 1]");
  return EpsilonSchedule(Rule::Power, gamma);
}

EpsilonSchedule EpsilonSchedule::log_decay(double c) {
  if (!(c > 0.0) || !(c < std::log(3.0)))
    throw std::invalid_argument(
        "EpsilonSchedule::log_decay: c must lie in (0, log 3)");
  return EpsilonSchedule(Rule::LogDecay, c);
}

double EpsilonSchedule::operator()(int n) const {
  if (n < 1) throw std::invalid_argument("EpsilonSchedule: n must be >= 1");
  switch (rule_) {
    case Rule::InverseN:
      return 1.0 / (n + 1.0);
    case Rule::Power:
      return std::pow(n + 1.0, -param_);
    case Rule::LogDecay:
      return param_ / std::log(n + 2.0);
  }
  return 0.0;
}

const VectorXd& Trace::final_z() const {
  if (rows.empty()) throw std::logic_error("Trace::final_z on empty trace");
  return rows.back().z;
}

namespace {

template <typename TMu>
InnerSolveResult picard_solve(const Representation& rep, TMu& t_mu,
                              const Contraction& f, double eps,
                              const VectorXd& warm_start, double inner_tol,
                              long inner_max) {
  if (!(eps > 0.0) || !(eps <= 1.0))
    throw std::invalid_argument("solve_implicit: eps must lie in (0, 1]");
  if (!(inner_tol > 0.0))
    throw std::invalid_argument("solve_implicit: inner_tol must be positive");
  if (f.dim() != rep.dim())
    throw std::invalid_argument("solve_implicit: contraction dimension mismatch");
  rep.check_in_domain(warm_start);

  const double p = rep.space().p();
  const double q = eps * f.alpha() + (1.0 - eps);

  const int d = rep.dim();
  VectorXd z = warm_start;
  VectorXd tz(d), fz(d), znext(d);

  InnerReport report;
  report.q = q;
  double prev_step = -1.0;
  long m = 0;
  for (m = 1; m <= inner_max; ++m) {
    t_mu.apply(z, tz);
    f.apply_into(z, fz);
    znext = eps * fz + (1.0 - eps) * tz;
    const double step = lp_norm(znext - z, p);
    if (m == 1) report.first_step = step;
    const double noise = 100.0 * std::numeric_limits<double>::epsilon() *
                         (1.0 + znext.norm());
    if (prev_step > noise && step > 0.0)
      report.max_step_ratio = std::max(report.max_step_ratio, step / prev_step);
    prev_step = step;
    z.swap(znext);
    if (step <= inner_tol) {
      report.converged = true;
      break;
    }
  }
  report.iterations = static_cast<int>(std::min(m, inner_max));

  // Banach-principle bound: q^m ||z1 - z0|| / (1-q) <= tol.
  if (report.first_step > 0.0 && q > 0.0 && q < 1.0) {
    const double lhs = inner_tol * (1.0 - q) / report.first_step;
    if (lhs < 1.0)
      report.apriori_iterations = static_cast<long>(
          std::ceil(std::log(lhs) / std::log(q)));
    else
      report.apriori_iterations = 1;
  } else {
    report.apriori_iterations = 1;
  }

  t_mu.apply(z, tz);
  f.apply_into(z, fz);
  report.final_residual = lp_norm(eps * fz + (1.0 - eps) * tz - z, p);

  InnerSolveResult result;
  result.z = std::move(z);
  result.t_mu_z = std::move(tz);
  result.report = report;
  return result;
}

}  // namespace

InnerSolveResult solve_implicit(const Representation& rep,
                                const FiniteMean& mu, const Contraction& f,
                                double eps, const VectorXd& warm_start,
                                double inner_tol, long inner_max) {
  MeanApplier t_mu(rep, mu);
  return picard_solve(rep, t_mu, f, eps, warm_start, inner_tol, inner_max);
}

namespace {

TraceRow make_row(const Representation& rep, int n, double eps,
                  InnerSolveResult&& solved) {
  TraceRow row;
  row.n = n;
  row.epsilon = eps;
  row.inner = solved.report;
  row.z = std::move(solved.z);
  row.mean_residual = lp_norm(row.z - solved.t_mu_z, rep.space().p());
  row.generator_residuals.resize(rep.k());
  VectorXd gz(rep.dim());
  for (int i = 0; i < rep.k(); ++i) {
    rep.generator(i).apply_into(row.z, gz);
    row.generator_residuals[i] = lp_norm(row.z - gz, rep.space().p());
  }
  return row;
}

}  // namespace

Trace run_viscosity(const Representation& rep, const SchemeConfig& cfg,
                    const Contraction& f) {
  if (cfg.n_outer < 1)
    throw std::invalid_argument("run_viscosity: n_outer must be >= 1");
  VectorXd z = cfg.start.size()
                   ? cfg.start
                   : rep.domain().pull_inside(rep.space(),
                                              VectorXd::Zero(rep.dim()));
  rep.check_in_domain(z);

  Trace trace;
  trace.rows.reserve(static_cast<size_t>(cfg.n_outer));
  int stall = 0;
  for (int n = 1; n <= cfg.n_outer; ++n) {
    const double eps = cfg.epsilon(n);
    if (!(eps > 0.0) || !(eps < 1.0))
      throw std::invalid_argument("run_viscosity: schedule left (0, 1)");
    BoxMeanApplier t_mu(rep, n);
    InnerSolveResult solved =
        picard_solve(rep, t_mu, f, eps, z, cfg.inner_tol, cfg.inner_max);
    const bool converged = solved.report.converged;
    const double change = lp_norm(solved.z - z, rep.space().p());
    z = solved.z;
    trace.rows.push_back(make_row(rep, n, eps, std::move(solved)));
    if (!converged) {
      trace.failed = true;
      trace.failed_step = n;
      break;
    }
    if (cfg.outer_tol > 0.0) {
      stall = change <= cfg.outer_tol ? stall + 1 : 0;
      if (stall >= cfg.outer_stall) {
        trace.early_stopped = true;
        break;
      }
    }
  }
  return trace;
}

Trace run_anchor(const Representation& rep, const FiniteMean& mu,
                 const VectorXd& anchor_x, int n_max, double inner_tol,
                 long inner_max) {
  if (n_max < 1)
    throw std::invalid_argument("run_anchor: n_max must be >= 1");
  rep.check_in_domain(anchor_x);
  const Contraction f = Contraction::constant(anchor_x);

  Trace trace;
  trace.rows.reserve(static_cast<size_t>(n_max));
  MeanApplier t_mu(rep, mu);
  VectorXd z = anchor_x;
  for (int n = 1; n <= n_max; ++n) {
    const double eps = 1.0 / n;
    InnerSolveResult solved =
        picard_solve(rep, t_mu, f, eps, z, inner_tol, inner_max);
    const bool converged = solved.report.converged;
    z = solved.z;
    trace.rows.push_back(make_row(rep, n, eps, std::move(solved)));
    if (!converged) {
      trace.failed = true;
      trace.failed_step = n;
      break;
    }
  }
  return trace;
}

}  // namespace meanfp
