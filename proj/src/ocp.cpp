#include "fleetcast/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>
#include <tuple>

#include "fleetcast/choice.hpp"

namespace fleetcast {
namespace ocp {

namespace {

// Forward sweep cache.  Index k refers to control year t0+1+k; states has one
// extra leading entry for the initial year.
struct Forward {
  std::vector<FleetState> states;
  Eigen::ArrayXd p1, p2, demand, dp1_du;
  Eigen::ArrayXd active;  // 0 when demand was clamped, else 1
  double I = 0.0;
  double E = 0.0;
};

Forward run_forward(const Eigen::ArrayXd& u, const OcpProblem& prob) {
  const int t0 = prob.initial.year;
  const int n = prob.T - t0;
  Forward f;
  f.states.reserve(n + 1);
  f.states.push_back(prob.initial);
  f.p1.resize(n);
  f.p2.resize(n);
  f.demand.resize(n);
  f.dp1_du.resize(n);
  f.active = Eigen::ArrayXd::Ones(n);

  for (int k = 0; k < n; ++k) {
    const int t = t0 + 1 + k;
    const FleetState& prev = f.states.back();
    const Eigen::Array2Xd surv = survivors(prev, prob.params.survival);
    double demand = new_vehicle_demand(prob.inputs, t, surv);
    if (demand < 0.0) {
      demand = 0.0;
      f.active(k) = 0.0;
    }
    const double u1 =
        utility(VehicleType::Thermal, t, prob.inputs, prob.params.logit, 0.0);
    const double u2 =
        utility(VehicleType::Electric, t, prob.inputs, prob.params.logit, u(k));
    const auto [p1, p2] = logit_split(u1, u2, prob.params.logit.mu);
    const double slope =
        ev_utility_slope(t, prob.inputs, prob.params.logit);

    FleetState next;
    next.stock = surv;
    next.stock(0, 0) = p1 * demand;
    next.stock(1, 0) = p2 * demand;
    next.year = t;

    f.p1(k) = p1;
    f.p2(k) = p2;
    f.demand(k) = demand;
    f.dp1_du(k) = -prob.params.logit.mu * p1 * p2 * slope;
    f.I += u(k) * p2 * demand * 1e-6;
    f.states.push_back(std::move(next));
  }
  f.E = emissions(f.states.back(), prob.params.emission_factors,
                  prob.inputs.M(prob.T));
  return f;
}

// Backward sweep.  The seed encodes the objective: zero for the budget pass
// (whose running cost enters through dl), terminal emission sensitivities for
// the emission pass.  The recursion for the costate at year t is
//   lambda_va(t) = -h_a * [ P1 l10 + P2 l20 + dl ](t+1)
//                  + eta_{a+1} lambda_{v,a+1}(t+1)            (a < A)
//                  + eta_A     lambda_{v,A}(t+1)              (a = A)
// where h_a = eta_{min(a+1, A)} is the survival weight through which one
// vehicle at age a reduces next year's demand.
AdjointState run_backward(const Forward& f, const Eigen::ArrayXd& u,
                          const OcpProblem& prob, bool budget_pass) {
  const int t0 = prob.initial.year;
  const int n = prob.T - t0;
  const int A = prob.initial.max_age();
  const Eigen::ArrayXd& eta = prob.params.survival.eta;

  Eigen::ArrayXd h(A + 1);
  for (int a = 0; a <= A; ++a) h(a) = eta(std::min(a, A - 1));

  AdjointState adj;
  adj.t0 = t0;
  adj.lambda.assign(n + 1, Eigen::Array2Xd::Zero(kNumTypes, A + 1));
  if (!budget_pass) {
    const double m_T = prob.inputs.M(prob.T) * 1e-12;
    for (int a = 0; a <= A; ++a)
      adj.lambda[n](0, a) =
          prob.params.emission_factors.at(prob.T - a) * m_T;
  }

  for (int k = n - 1; k >= 0; --k) {
    const Eigen::Array2Xd& next = adj.lambda[k + 1];
    // Forward index of the transition into year t0+1+k is k itself.
    const double dl = budget_pass ? u(k) * f.p2(k) * 1e-6 : 0.0;
    const double mix =
        f.active(k) *
        (f.p1(k) * next(0, 0) + f.p2(k) * next(1, 0) + dl);
    Eigen::Array2Xd cur(kNumTypes, A + 1);
    for (int v = 0; v < kNumTypes; ++v) {
      cur.row(v) = -mix * h.transpose();
      cur.row(v).segment(0, A - 1) +=
          eta.head(A - 1).transpose() * next.row(v).segment(1, A - 1);
      cur(v, A - 1) += eta(A - 1) * next(v, A);
      cur(v, A) += eta(A - 1) * next(v, A);
    }
    adj.lambda[k] = cur;
  }
  return adj;
}

}  // namespace

double objective(const ControlTrajectory& u, const OcpProblem& prob) {
  return run_forward(u.u_keur, prob).I;
}

double terminal_emission(const ControlTrajectory& u, const OcpProblem& prob) {
  return run_forward(u.u_keur, prob).E;
}

double hamiltonian(int year, double u_t, const FleetState& prev,
                   const Eigen::Array2Xd& lambda_next, const OcpProblem& prob) {
  if (year != prev.year + 1)
    throw ValidationError("hamiltonian year must follow the given state");
  const Eigen::Array2Xd surv = survivors(prev, prob.params.survival);
  const double demand =
      std::max(0.0, new_vehicle_demand(prob.inputs, year, surv));
  const double u1 =
      utility(VehicleType::Thermal, year, prob.inputs, prob.params.logit, 0.0);
  const double u2 =
      utility(VehicleType::Electric, year, prob.inputs, prob.params.logit, u_t);
  const auto [p1, p2] = logit_split(u1, u2, prob.params.logit.mu);
  double value = u_t * (1.0 - p1) * demand;
  value += lambda_next(0, 0) * p1 * demand + lambda_next(1, 0) * p2 * demand;
  const int A = prev.max_age();
  for (int v = 0; v < kNumTypes; ++v)
    for (int a = 1; a <= A; ++a) value += lambda_next(v, a) * surv(v, a);
  return value;
}

AdjointGradient adjoint_gradient(const ControlTrajectory& u,
                                 const OcpProblem& prob) {
  const int t0 = prob.initial.year;
  if (u.first_year != t0 + 1)
    throw ValidationError("control must start the year after the initial state");
  if (u.size() != prob.horizon())
    throw ValidationError("control length does not match the horizon");

  const Forward f = run_forward(u.u_keur, prob);
  AdjointGradient g;
  g.I_Geur = f.I;
  g.E_terminal_Mt = f.E;
  g.lambda_budget = run_backward(f, u.u_keur, prob, true);
  g.lambda_emission = run_backward(f, u.u_keur, prob, false);

  const int n = prob.horizon();
  g.dI_du.resize(n);
  g.dE_du.resize(n);
  for (int k = 0; k < n; ++k) {
    const Eigen::Array2Xd& lI = g.lambda_budget.lambda[k + 1];
    const Eigen::Array2Xd& lE = g.lambda_emission.lambda[k + 1];
    const double d = f.demand(k);
    g.dI_du(k) =
        d * (f.p2(k) * 1e-6 +
             f.dp1_du(k) * ((lI(0, 0) - lI(1, 0)) - u.u_keur(k) * 1e-6));
    g.dE_du(k) = d * f.dp1_du(k) * (lE(0, 0) - lE(1, 0));
  }
  return g;
}

// ---- augmented-Lagrangian solver -------------------------------------------

namespace {

struct AlEval {
  double L = 0.0;
  double I = 0.0;
  double E = 0.0;
  Eigen::ArrayXd grad;
};

AlEval eval_al(const Eigen::ArrayXd& u, const OcpProblem& prob, double mu,
               double rho) {
  ControlTrajectory traj{prob.initial.year + 1, u};
  const AdjointGradient g = adjoint_gradient(traj, prob);
  AlEval out;
  out.I = g.I_Geur;
  out.E = g.E_terminal_Mt;
  const double c = g.E_terminal_Mt - prob.E_bar_Mt;
  const double t = mu + rho * c;
  if (t > 0.0) {
    out.L = g.I_Geur + c * (mu + 0.5 * rho * c);
    out.grad = g.dI_du + t * g.dE_du;
  } else {
    out.L = g.I_Geur - mu * mu / (2.0 * rho);
    out.grad = g.dI_du;
  }
  return out;
}

Eigen::ArrayXd project(const Eigen::ArrayXd& u, double lo, double hi) {
  return u.max(lo).min(hi);
}

// Projected L-BFGS with backtracking line search; returns iterations used.
int minimize_al(Eigen::ArrayXd& u, const OcpProblem& prob, double mu,
                double rho, int max_iter, double pg_tol, AlEval& last) {
  const double lo = 0.0, hi = prob.u_max_keur;
  const int memory = 10;
  std::deque<std::pair<Eigen::ArrayXd, Eigen::ArrayXd>> pairs;  // (s, y)

  last = eval_al(u, prob, mu, rho);
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    const Eigen::ArrayXd pg = project(u - last.grad, lo, hi) - u;
    if (pg.abs().maxCoeff() < pg_tol) break;

    // Two-loop recursion for the quasi-Newton direction.
    Eigen::ArrayXd d = -last.grad;
    if (!pairs.empty()) {
      std::vector<double> alpha(pairs.size());
      for (int i = static_cast<int>(pairs.size()) - 1; i >= 0; --i) {
        const auto& [s, y] = pairs[i];
        const double inv_sy = 1.0 / (s * y).sum();
        alpha[i] = inv_sy * (s * d).sum();
        d -= alpha[i] * y;
      }
      const auto& [s_last, y_last] = pairs.back();
      d *= (s_last * y_last).sum() / (y_last * y_last).sum();
      for (size_t i = 0; i < pairs.size(); ++i) {
        const auto& [s, y] = pairs[i];
        const double inv_sy = 1.0 / (s * y).sum();
        const double beta = inv_sy * (y * d).sum();
        d += (alpha[i] - beta) * s;
      }
      // Seeded with -grad, the recursion returns -H*grad directly.
    }
    if ((d * last.grad).sum() > -1e-14) d = -last.grad;

    bool accepted = false;
    Eigen::ArrayXd u_new;
    AlEval next;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      double step = 1.0;
      for (int ls = 0; ls < 60; ++ls) {
        u_new = project(u + step * d, lo, hi);
        const double pred = (last.grad * (u_new - u)).sum();
        if (pred >= 0.0 && ls == 0 && (u_new - u).abs().maxCoeff() == 0.0)
          break;  // direction leaves the feasible box
        next = eval_al(u_new, prob, mu, rho);
        const double bound =
            pred < 0.0 ? last.L + 1e-4 * pred : last.L - 1e-16 * std::abs(last.L);
        if (next.L <= bound) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) d = -last.grad;  // retry once along steepest descent
    }
    if (!accepted) break;

    const Eigen::ArrayXd s = u_new - u;
    const Eigen::ArrayXd y = next.grad - last.grad;
    const double sy = (s * y).sum();
    if (sy > 1e-10 * std::sqrt((s * s).sum() * (y * y).sum())) {
      pairs.emplace_back(s, y);
      if (static_cast<int>(pairs.size()) > memory) pairs.pop_front();
    }
    u = u_new;
    last = next;
  }
  return iter;
}

}  // namespace

OcpSolution solve(const OcpProblem& prob, const ControlTrajectory& init,
                  const SolveOptions& opts) {
  const int t0 = prob.initial.year;
  const int n = prob.horizon();
  if (init.first_year != t0 + 1 || init.size() != n)
    throw ValidationError("initial control does not match the horizon");

  // The cap is out of reach if even the maximal incentive misses it.
  {
    const Eigen::ArrayXd full = Eigen::ArrayXd::Constant(n, prob.u_max_keur);
    const double e_best = run_forward(full, prob).E;
    if (e_best > prob.E_bar_Mt + 1e-6)
      throw InfeasibleProblem(
          "terminal emission cap " + std::to_string(prob.E_bar_Mt) +
          " Mt unreachable: minimum attainable is " + std::to_string(e_best) +
          " Mt at u = u_max");
  }

  Eigen::ArrayXd u = project(init.u_keur, 0.0, prob.u_max_keur);
  double mu = opts.mu0;
  double rho = opts.rho0;
  double prev_abs_c = std::numeric_limits<double>::infinity();

  OcpSolution sol;
  const double inner_tol = std::min(1e-9, 0.1 * opts.tol_stationarity);

  int outer = 0;
  for (outer = 1; outer <= opts.max_outer; ++outer) {
    AlEval last;
    const int inner =
        minimize_al(u, prob, mu, rho, opts.max_inner, inner_tol, last);

    const ControlTrajectory traj{t0 + 1, u};
    const AdjointGradient g = adjoint_gradient(traj, prob);
    const double c = g.E_terminal_Mt - prob.E_bar_Mt;
    const double mu_hat = std::max(0.0, mu + rho * c);
    const Eigen::ArrayXd kkt_grad = g.dI_du + mu_hat * g.dE_du;
    const double stat =
        (project(u - kkt_grad, 0.0, prob.u_max_keur) - u).abs().maxCoeff();

    sol.trace.push_back({outer, inner, g.I_Geur, g.E_terminal_Mt, c, mu_hat,
                         rho, stat});

    mu = mu_hat;
    if (c <= opts.tol_feasibility_Mt &&
        std::abs(mu * c) <= opts.tol_complementarity &&
        stat <= opts.tol_stationarity) {
      sol.status = SolveStatus::Converged;
      sol.kkt = {stat, std::max(c, 0.0), std::abs(mu * c)};
      break;
    }
    // Escalate the penalty only while the residual both stagnates and still
    // matters; once |c| is below threshold the multiplier updates finish the
    // job and a larger rho would only poison the inner conditioning.
    if (std::abs(c) > 0.25 * prev_abs_c &&
        std::abs(c) > 10.0 * opts.tol_feasibility_Mt)
      rho = std::min(rho * opts.rho_growth, opts.rho_max);
    prev_abs_c = std::abs(c);
    if (outer == opts.max_outer) {
      sol.status = SolveStatus::MaxIterations;
      sol.kkt = {stat, std::max(c, 0.0), std::abs(mu * c)};
    }
  }

  sol.u_star = ControlTrajectory{t0 + 1, u};
  sol.multiplier = mu;
  sol.outer_iterations = std::min(outer, opts.max_outer);

  // Report the budget and emissions from a fresh forward run of the final
  // control, not from solver internals.
  const Forward f = run_forward(u, prob);
  sol.I_total_Geur = f.I;
  sol.E_terminal_Mt = f.E;
  return sol;
}

}  // namespace ocp
}  // namespace fleetcast
