#include <doctest.h>

#include <random>

#include "common.hpp"
#include "fleetcast/fleet.hpp"
#include "fleetcast/ocp.hpp"

using namespace fleetcast;
using fleetcast::ocp::ControlTrajectory;
using fleetcast::ocp::OcpProblem;

namespace {

OcpProblem case_study(double cap_Mt) {
  const auto& d = testutil::dataset();
  return OcpProblem{d.initial, d.inputs, testutil::params(), cap_Mt, 50.0,
                    2050};
}

constexpr double kCapIc = 12.333330373586207;  // E(2050) under IC at 5 kEUR

double fd_worst_rel(const OcpProblem& prob, const Eigen::ArrayXd& u0,
                    double h) {
  const ControlTrajectory u{2023, u0};
  const auto g = ocp::adjoint_gradient(u, prob);
  double worst = 0.0;
  for (int k = 0; k < u0.size(); ++k) {
    Eigen::ArrayXd up = u0, dn = u0;
    up(k) += h;
    dn(k) -= h;
    const ControlTrajectory tp{2023, up}, td{2023, dn};
    const double fi =
        (ocp::objective(tp, prob) - ocp::objective(td, prob)) / (2 * h);
    const double fe = (ocp::terminal_emission(tp, prob) -
                       ocp::terminal_emission(td, prob)) /
                      (2 * h);
    worst = std::max(worst, testutil::rel_err(g.dI_du(k), fi));
    worst = std::max(worst, testutil::rel_err(g.dE_du(k), fe));
  }
  return worst;
}

}  // namespace

TEST_SUITE_BEGIN("ocp");

TEST_CASE("objective and terminal emission agree with plain simulation") {
  const OcpProblem prob = case_study(kCapIc);
  const ControlTrajectory zero{2023, Eigen::ArrayXd::Zero(28)};
  const ControlTrajectory five{2023, Eigen::ArrayXd::Constant(28, 5.0)};
  CHECK(ocp::objective(zero, prob) == 0.0);
  CHECK(ocp::terminal_emission(zero, prob) ==
        doctest::Approx(15.387119476867559).epsilon(1e-9));
  CHECK(ocp::objective(five, prob) ==
        doctest::Approx(214.938277003647).epsilon(1e-9));
  CHECK(ocp::terminal_emission(five, prob) ==
        doctest::Approx(kCapIc).epsilon(1e-9));
}

TEST_CASE("adjoint gradients pass the finite-difference gate") {
  const OcpProblem prob = case_study(kCapIc);
  CHECK(fd_worst_rel(prob, Eigen::ArrayXd::Zero(28), 1e-3) < 1e-6);
  CHECK(fd_worst_rel(prob, Eigen::ArrayXd::Constant(28, 5.0), 1e-3) < 1e-6);
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> dist(0.0, 20.0);
  for (int trial = 0; trial < 3; ++trial) {
    Eigen::ArrayXd u(28);
    for (int k = 0; k < 28; ++k) u(k) = dist(rng);
    CHECK(fd_worst_rel(prob, u, 1e-3) < 1e-6);
  }
}

TEST_CASE("with no incentive the budget gradient is the electric uptake") {
  const auto& d = testutil::dataset();
  const OcpProblem prob = case_study(kCapIc);
  const ControlTrajectory zero{2023, Eigen::ArrayXd::Zero(28)};
  const auto g = ocp::adjoint_gradient(zero, prob);

  SimulatePolicy pol{2023, Eigen::ArrayXd::Zero(28), false};
  const ScenarioResult r = simulate(d.initial, pol, d.inputs, testutil::params());
  for (int k = 0; k < 28; ++k)
    CHECK(g.dI_du(k) ==
          doctest::Approx(r.sales_ev(k + 1) * 1e-6).epsilon(1e-12));
}

TEST_CASE("budget costates cannot tell the powertrains apart") {
  // Survival is type-blind, so with a zero terminal seed the two rows of
  // every budget costate matrix coincide; the budget effect of an incentive
  // is purely local in time.
  const OcpProblem prob = case_study(kCapIc);
  const ControlTrajectory five{2023, Eigen::ArrayXd::Constant(28, 5.0)};
  const auto g = ocp::adjoint_gradient(five, prob);
  for (const auto& lam : g.lambda_budget.lambda)
    CHECK((lam.row(0) - lam.row(1)).abs().maxCoeff() == 0.0);
}

TEST_CASE("hamiltonian reduces to its two reference forms") {
  const auto& d = testutil::dataset();
  const OcpProblem prob = case_study(kCapIc);
  const int A = d.initial.max_age();

  const Eigen::Array2Xd zero = Eigen::Array2Xd::Zero(kNumTypes, A + 1);
  const Eigen::Array2Xd ones = Eigen::Array2Xd::Ones(kNumTypes, A + 1);

  // All constants below re-derived from the frozen 2022->2023 transition.
  const double demand = 2715965.776831925;
  const double surv_total = 33357922.021877706;
  const double p2_at_5 = 0.23022009017962763;

  const double h0 = ocp::hamiltonian(2023, 5.0, d.initial, zero, prob);
  CHECK(h0 == doctest::Approx(5.0 * p2_at_5 * demand).epsilon(1e-9));

  const double h1 = ocp::hamiltonian(2023, 5.0, d.initial, ones, prob);
  CHECK(h1 ==
        doctest::Approx(5.0 * p2_at_5 * demand + demand + surv_total)
            .epsilon(1e-9));

  CHECK_THROWS_AS(ocp::hamiltonian(2025, 5.0, d.initial, zero, prob),
                  ValidationError);
}

TEST_CASE("control validation in the adjoint") {
  const OcpProblem prob = case_study(kCapIc);
  CHECK_THROWS_AS(
      ocp::adjoint_gradient({2024, Eigen::ArrayXd::Zero(27)}, prob),
      ValidationError);
  CHECK_THROWS_AS(
      ocp::adjoint_gradient({2023, Eigen::ArrayXd::Zero(10)}, prob),
      ValidationError);
}

TEST_CASE("backcasting the constant-incentive cap undercuts its budget") {
  const OcpProblem prob = case_study(kCapIc);
  const ControlTrajectory init{2023, Eigen::ArrayXd::Constant(28, 5.0)};
  const auto sol = ocp::solve(prob, init);

  REQUIRE(sol.status == ocp::SolveStatus::Converged);
  CHECK(sol.I_total_Geur == doctest::Approx(195.7727).epsilon(1e-4));
  CHECK(sol.I_total_Geur < 214.938277003647);
  CHECK(sol.E_terminal_Mt <= kCapIc + 1e-3);
  CHECK(sol.kkt.stationarity < 1e-6);
  CHECK(sol.kkt.feasibility < 1e-6);
  CHECK(sol.kkt.complementarity < 1e-6);
  CHECK(sol.multiplier > 0.0);
  CHECK((sol.u_star.u_keur >= 0.0).all());
  CHECK((sol.u_star.u_keur <= prob.u_max_keur).all());

  // The reported budget comes from a fresh forward run of u*.
  CHECK(ocp::objective(sol.u_star, prob) == sol.I_total_Geur);
}

TEST_CASE("solving is bit-deterministic") {
  const OcpProblem prob = case_study(kCapIc);
  const ControlTrajectory init{2023, Eigen::ArrayXd::Constant(28, 5.0)};
  const auto a = ocp::solve(prob, init);
  const auto b = ocp::solve(prob, init);
  CHECK((a.u_star.u_keur == b.u_star.u_keur).all());
  CHECK(a.I_total_Geur == b.I_total_Geur);
  CHECK(a.outer_iterations == b.outer_iterations);
}

TEST_CASE("an unreachable cap is reported as infeasible") {
  const OcpProblem prob = case_study(0.1);
  const ControlTrajectory init{2023, Eigen::ArrayXd::Constant(28, 5.0)};
  CHECK_THROWS_AS(ocp::solve(prob, init), InfeasibleProblem);
}

TEST_CASE("a slack cap needs no incentive at all") {
  const OcpProblem prob = case_study(20.0);  // above the no-incentive level
  const ControlTrajectory init{2023, Eigen::ArrayXd::Constant(28, 5.0)};
  const auto sol = ocp::solve(prob, init);
  REQUIRE(sol.status == ocp::SolveStatus::Converged);
  // The inner loop may leave sub-tolerance dust on the lower bound.
  CHECK(sol.u_star.u_keur.abs().maxCoeff() < 1e-8);
  CHECK(sol.I_total_Geur < 1e-6);
  CHECK(sol.multiplier == 0.0);
  CHECK(sol.kkt.complementarity == 0.0);
}

TEST_CASE("an exhausted iteration budget is flagged, not hidden") {
  const OcpProblem prob = case_study(kCapIc);
  const ControlTrajectory init{2023, Eigen::ArrayXd::Constant(28, 5.0)};
  ocp::SolveOptions opts;
  opts.max_outer = 1;
  const auto sol = ocp::solve(prob, init, opts);
  CHECK(sol.status == ocp::SolveStatus::MaxIterations);
  CHECK(sol.outer_iterations == 1);
  CHECK(sol.trace.size() == 1);
}

TEST_SUITE_END();
