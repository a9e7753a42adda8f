#pragma once

#include <vector>

#include "fleetcast/fleet.hpp"
#include "fleetcast/types.hpp"

namespace fleetcast {
namespace ocp {

// Backcasting problem: choose the yearly EV purchase incentive u(t) over
// t0+1..T, bounded in [0, u_max], to minimize the cumulative incentive
// budget subject to a cap on terminal-year fleet emissions.

struct ControlTrajectory {
  int first_year = 0;  // t0 + 1
  Eigen::ArrayXd u_keur;

  int size() const { return static_cast<int>(u_keur.size()); }
  int last_year() const { return first_year + size() - 1; }
};

struct OcpProblem {
  FleetState initial;
  ExogenousInputs inputs;
  ModelParams params;
  double E_bar_Mt = 0.0;
  double u_max_keur = 50.0;
  int T = 2050;

  int horizon() const { return T - initial.year; }
};

// Costate per year t0..T; lambda[t - t0](v, a) is the sensitivity of the
// objective to one extra vehicle of type v and age a at the end of year t.
struct AdjointState {
  int t0 = 0;
  std::vector<Eigen::Array2Xd> lambda;
};

struct AdjointGradient {
  Eigen::ArrayXd dI_du;  // G EUR per k EUR, one entry per control year
  Eigen::ArrayXd dE_du;  // Mt per k EUR
  AdjointState lambda_budget;
  AdjointState lambda_emission;
  double I_Geur = 0.0;
  double E_terminal_Mt = 0.0;
};

struct KktResiduals {
  double stationarity = 0.0;
  double feasibility = 0.0;
  double complementarity = 0.0;
};

enum class SolveStatus { Converged, MaxIterations };

struct TraceRow {
  int outer = 0;
  int inner_iterations = 0;
  double objective_Geur = 0.0;
  double emissions_Mt = 0.0;
  double violation_Mt = 0.0;
  double multiplier = 0.0;
  double penalty = 0.0;
  double stationarity = 0.0;
};

struct OcpSolution {
  ControlTrajectory u_star;
  double I_total_Geur = 0.0;
  double E_terminal_Mt = 0.0;
  double multiplier = 0.0;
  int outer_iterations = 0;
  KktResiduals kkt;
  SolveStatus status = SolveStatus::Converged;
  std::vector<TraceRow> trace;
};

struct SolveOptions {
  double tol_stationarity = 5e-7;
  double tol_feasibility_Mt = 1e-8;
  double tol_complementarity = 5e-7;
  int max_outer = 500;
  int max_inner = 400;
  double mu0 = 0.0;
  double rho0 = 10.0;
  double rho_growth = 10.0;
  double rho_max = 1e8;
};

// Cumulative incentive budget I(T) in G EUR under the given control.
double objective(const ControlTrajectory& u, const OcpProblem& prob);

// Fleet emissions E(T) in Mt in the final year under the given control.
double terminal_emission(const ControlTrajectory& u, const OcpProblem& prob);

// Diagnostic Hamiltonian of the transition into `year`: running cost
// u*(1 - P_thermal)*N plus the costate-weighted next state.  Native units
// (k EUR * vehicles plus lambda-weighted vehicle counts); used for
// verification tables, not inside the solver.
double hamiltonian(int year, double u_t, const FleetState& prev,
                   const Eigen::Array2Xd& lambda_next, const OcpProblem& prob);

// Exact discrete gradients of budget and terminal emissions via one forward
// sweep and two backward sweeps (see docs/gradients.md).
AdjointGradient adjoint_gradient(const ControlTrajectory& u,
                                 const OcpProblem& prob);

// Augmented-Lagrangian outer loop with a projected L-BFGS inner solver.
// Throws InfeasibleProblem when even u = u_max misses the cap.
OcpSolution solve(const OcpProblem& prob, const ControlTrajectory& init,
                  const SolveOptions& opts = {});

}  // namespace ocp
}  // namespace fleetcast
