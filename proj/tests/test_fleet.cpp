#include <doctest.h>

#include <random>

#include "common.hpp"
#include "fleetcast/fleet.hpp"
#include "fleetcast/scenarios.hpp"

using namespace fleetcast;

namespace {

// Small synthetic inputs covering [first, last] with constant values.
ExogenousInputs flat_inputs(int first, int last, double g_vkm, double m_km) {
  const int n = last - first + 1;
  ExogenousInputs in;
  in.first_year = first;
  in.G_vkm = Eigen::ArrayXd::Constant(n, g_vkm);
  in.M_km = Eigen::ArrayXd::Constant(n, m_km);
  in.cp_thermal_keur = Eigen::ArrayXd::Constant(n, 28.0);
  in.cp_ev_keur = Eigen::ArrayXd::Constant(n, 32.0);
  in.co_thermal_eur = Eigen::ArrayXd::Constant(n, 550.0);
  in.co_ev_eur = Eigen::ArrayXd::Constant(n, 650.0);
  in.ci_ev = Eigen::ArrayXd::Constant(n, 0.5);
  in.ca_ev = Eigen::ArrayXd::Constant(n, 0.1);
  return in;
}

FleetState random_state(std::mt19937& rng, int year, int max_age = 12) {
  std::uniform_real_distribution<double> d(0.0, 1e6);
  FleetState s = FleetState::zero(year, max_age);
  for (int v = 0; v < kNumTypes; ++v)
    for (int a = 0; a <= max_age; ++a) s.stock(v, a) = d(rng);
  return s;
}

SurvivalSchedule random_schedule(std::mt19937& rng, int max_age = 12) {
  std::uniform_real_distribution<double> d(0.3, 1.0);
  SurvivalSchedule eta;
  eta.eta.resize(max_age);
  for (int a = 0; a < max_age; ++a) eta.eta(a) = d(rng);
  return eta;
}

}  // namespace

TEST_SUITE_BEGIN("fleet");

TEST_CASE("survivors of the 2022 fleet match the reference totals") {
  const auto& d = testutil::dataset();
  const Eigen::Array2Xd surv = survivors(d.initial, d.survival);
  CHECK(surv.col(0).sum() == 0.0);
  CHECK(surv.sum() == doctest::Approx(33357922.021877706).epsilon(1e-12));
  CHECK(surv.row(0).sum() ==
        doctest::Approx(33081039.021877706).epsilon(1e-12));
  CHECK(surv.row(1).sum() == doctest::Approx(276883.0).epsilon(1e-12));
  CHECK(surv.col(30).sum() ==
        doctest::Approx(549371.6556565854).epsilon(1e-12));
}

TEST_CASE("demand tops the surviving fleet up to the traffic requirement") {
  const auto& d = testutil::dataset();
  const Eigen::Array2Xd none =
      Eigen::Array2Xd::Zero(kNumTypes, d.initial.max_age() + 1);
  CHECK(new_vehicle_demand(d.inputs, 2022, none) ==
        doctest::Approx(d.inputs.G(2022) / d.inputs.M(2022)).epsilon(1e-15));
  const Eigen::Array2Xd surv = survivors(d.initial, d.survival);
  CHECK(new_vehicle_demand(d.inputs, 2023, surv) ==
        doctest::Approx(2715965.776831925).epsilon(1e-12));
}

TEST_CASE("one step conserves vehicles and is bit-deterministic") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const FleetState s = random_state(rng, 2000);
    const SurvivalSchedule eta = random_schedule(rng);
    // Keep demand positive: traffic always above the surviving stock.
    const ExogenousInputs in =
        flat_inputs(2000, 2002, 4.0e11, 12000.0);
    const FleetState next = step(s, 0.7, 0.3, in, eta, 2001);
    const Eigen::Array2Xd surv = survivors(s, eta);
    const double demand = new_vehicle_demand(in, 2001, surv);
    CHECK(testutil::rel_err(next.total(), surv.sum() + demand) < 1e-12);

    const FleetState again = step(s, 0.7, 0.3, in, eta, 2001);
    CHECK((next.stock == again.stock).all());
  }
}

TEST_CASE("ageing is monotone under survival factors at most one") {
  std::mt19937 rng(13);
  const FleetState s = random_state(rng, 2000);
  const SurvivalSchedule eta = random_schedule(rng);
  const ExogenousInputs in = flat_inputs(2000, 2001, 4.0e11, 12000.0);
  const FleetState next = step(s, 0.5, 0.5, in, eta, 2001);
  for (int v = 0; v < kNumTypes; ++v)
    for (int a = 1; a < s.max_age(); ++a)
      CHECK(next.stock(v, a) <= s.stock(v, a - 1));
}

TEST_CASE("step rejects inconsistent arguments") {
  const auto& d = testutil::dataset();
  CHECK_THROWS_AS(step(d.initial, 0.5, 0.5, d.inputs, d.survival, 2025),
                  ValidationError);
  CHECK_THROWS_AS(step(d.initial, 0.6, 0.6, d.inputs, d.survival, 2023),
                  std::invalid_argument);
  CHECK_THROWS_AS(step(d.initial, -0.1, 1.1, d.inputs, d.survival, 2023),
                  std::invalid_argument);
}

TEST_CASE("a shrinking market raises NegativeDemand in step but a warning in simulate") {
  std::mt19937 rng(17);
  FleetState s = random_state(rng, 2000, 5);
  s.stock += 1e6;
  SurvivalSchedule eta;
  eta.eta = Eigen::ArrayXd::Ones(5);
  const ExogenousInputs in = flat_inputs(2000, 2002, 1.0e9, 10000.0);
  CHECK_THROWS_AS(step(s, 0.5, 0.5, in, eta, 2001), NegativeDemand);

  ModelParams p;
  p.survival = eta;
  p.emission_factors.first_year = 1990;
  p.emission_factors.eps = Eigen::ArrayXd::Constant(120, 100.0);
  SimulatePolicy pol{2001, Eigen::ArrayXd::Zero(2), false};
  const ScenarioResult res = simulate(s, pol, in, p);
  REQUIRE(res.warnings.size() == 2);
  CHECK(res.warnings[0].find("2001") != std::string::npos);
  CHECK(res.sales_thermal(1) == 0.0);
  CHECK(res.sales_ev(1) == 0.0);
}

TEST_CASE("emissions weigh each cohort by its registration-year factor") {
  EmissionFactorTable t;
  t.first_year = 1995;
  t.eps = Eigen::ArrayXd::LinSpaced(60, 150.0, 91.0);  // 1 g/km per year
  FleetState s = FleetState::zero(2000, 3);
  s.stock(0, 0) = 1000.0;  // cohort 2000 -> 145
  s.stock(0, 2) = 500.0;   // cohort 1998 -> 147
  s.stock(1, 1) = 2000.0;  // electric: no contribution
  const double expected = (145.0 * 1000.0 + 147.0 * 500.0) * 12000.0 * 1e-12;
  CHECK(emissions(s, t, 12000.0) == doctest::Approx(expected).epsilon(1e-15));

  SUBCASE("doubling the stock doubles emissions") {
    FleetState s2 = s;
    s2.stock *= 2.0;
    CHECK(emissions(s2, t, 12000.0) ==
          doctest::Approx(2.0 * emissions(s, t, 12000.0)).epsilon(1e-15));
  }
  SUBCASE("an all-electric fleet emits nothing") {
    FleetState ev = FleetState::zero(2000, 3);
    ev.stock.row(1).setConstant(5e6);
    CHECK(emissions(ev, t, 12000.0) == 0.0);
  }
  SUBCASE("cohorts before 1995 use the constant factor") {
    FleetState old = FleetState::zero(1996, 3);
    old.stock(0, 3) = 100.0;  // cohort 1993
    CHECK(emissions(old, t, 10000.0) ==
          doctest::Approx(176.0 * 100.0 * 10000.0 * 1e-12).epsilon(1e-15));
  }
  SUBCASE("cohorts after the table end are an error") {
    FleetState future = FleetState::zero(2060, 3);
    future.stock(0, 0) = 1.0;
    CHECK_THROWS_AS(emissions(future, t, 10000.0), MissingCohortFactor);
  }
}

TEST_CASE("the 2022 fleet emits the reference amount") {
  const auto& d = testutil::dataset();
  CHECK(emissions(d.initial, d.emission_factors, d.inputs.M(2022)) ==
        doctest::Approx(62.08806045582664).epsilon(1e-12));
}

TEST_CASE("full-horizon runs hit the reference endpoints") {
  const auto& d = testutil::dataset();
  const auto& p = testutil::params();

  SUBCASE("no incentive") {
    SimulatePolicy pol{2023, Eigen::ArrayXd::Zero(28), false};
    const ScenarioResult r = simulate(d.initial, pol, d.inputs, p);
    CHECK(r.terminal_emissions() ==
          doctest::Approx(15.387119476867559).epsilon(1e-9));
    CHECK(r.budget_Geur == 0.0);
    CHECK(r.stock_ev(28) ==
          doctest::Approx(27482525.898206435).epsilon(1e-9));
    CHECK(r.stock_ev(8) == doctest::Approx(6565490.642143324).epsilon(1e-9));
    CHECK(r.sales_thermal(1) + r.sales_ev(1) ==
          doctest::Approx(2715965.776831925).epsilon(1e-9));
    CHECK(r.warnings.empty());
  }
  SUBCASE("constant 5 kEUR incentive") {
    SimulatePolicy pol{2023, Eigen::ArrayXd::Constant(28, 5.0), false};
    const ScenarioResult r = simulate(d.initial, pol, d.inputs, p);
    CHECK(r.terminal_emissions() ==
          doctest::Approx(12.333330373586207).epsilon(1e-9));
    CHECK(r.budget_Geur == doctest::Approx(214.938277003647).epsilon(1e-9));
    CHECK(r.stock_ev(28) == doctest::Approx(30007977.8796291).epsilon(1e-9));
    CHECK(r.sales_ev(1) == doctest::Approx(625269.8860670282).epsilon(1e-9));
  }
}

TEST_CASE("a one-step horizon produces exactly two records") {
  const auto& d = testutil::dataset();
  SimulatePolicy pol{2023, Eigen::ArrayXd::Zero(1), false};
  const ScenarioResult r = simulate(d.initial, pol, d.inputs, testutil::params());
  REQUIRE(r.years.size() == 2);
  CHECK(r.years[0] == 2022);
  CHECK(r.years[1] == 2023);
  CHECK(r.u_keur(0) == 0.0);
  CHECK(r.sales_ev(0) == 0.0);
  CHECK(r.states.size() == 2);
}

TEST_SUITE_END();
