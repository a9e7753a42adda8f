#include "fleetcast/fleet.hpp"

#include <cmath>

#include "fleetcast/choice.hpp"

namespace fleetcast {

Eigen::Array2Xd survivors(const FleetState& state,
                          const SurvivalSchedule& eta) {
  const int A = state.max_age();
  if (eta.max_age() != A)
    throw ValidationError("survival schedule covers " +
                          std::to_string(eta.max_age()) + " ages, fleet has " +
                          std::to_string(A));
  Eigen::Array2Xd out = Eigen::Array2Xd::Zero(kNumTypes, A + 1);
  for (int a = 1; a < A; ++a) out.col(a) = eta.at(a) * state.stock.col(a - 1);
  out.col(A) = eta.at(A) * (state.stock.col(A - 1) + state.stock.col(A));
  return out;
}

double new_vehicle_demand(const ExogenousInputs& inputs, int year,
                          const Eigen::Array2Xd& survivors) {
  return inputs.G(year) / inputs.M(year) - survivors.sum();
}

namespace {

FleetState assemble(const Eigen::Array2Xd& surv, double share_thermal,
                    double share_ev, double demand, int year) {
  FleetState next;
  next.stock = surv;
  next.stock(0, 0) = share_thermal * demand;
  next.stock(1, 0) = share_ev * demand;
  next.year = year;
  return next;
}

void check_shares(double share_thermal, double share_ev) {
  if (share_thermal < -1e-12 || share_ev < -1e-12 ||
      std::abs(share_thermal + share_ev - 1.0) > 1e-9)
    throw std::invalid_argument("sales shares must be non-negative and sum to 1");
}

}  // namespace

FleetState step(const FleetState& state, double share_thermal, double share_ev,
                const ExogenousInputs& inputs, const SurvivalSchedule& eta,
                int year) {
  if (year != state.year + 1)
    throw ValidationError("step target year " + std::to_string(year) +
                          " is not consecutive to " +
                          std::to_string(state.year));
  check_shares(share_thermal, share_ev);
  const Eigen::Array2Xd surv = survivors(state, eta);
  double demand = new_vehicle_demand(inputs, year, surv);
  if (demand < -kDemandTolerance) throw NegativeDemand(year, demand);
  if (demand < 0.0) demand = 0.0;
  return assemble(surv, share_thermal, share_ev, demand, year);
}

double emissions(const FleetState& state, const EmissionFactorTable& factors,
                 double mileage_km) {
  const int A = state.max_age();
  double grams = 0.0;
  for (int a = 0; a <= A; ++a)
    grams += factors.at(state.year - a) * state.stock(0, a);
  return grams * mileage_km * 1e-12;  // g -> Mt
}

ScenarioResult simulate(const FleetState& initial,
                        const SimulatePolicy& policy,
                        const ExogenousInputs& inputs,
                        const ModelParams& params) {
  if (policy.first_year != initial.year + 1)
    throw ValidationError("policy must start the year after the initial state");
  const int t0 = initial.year;
  const int T = policy.first_year + static_cast<int>(policy.u_keur.size()) - 1;
  const int n = T - t0 + 1;

  ScenarioResult res;
  res.t0 = t0;
  res.T = T;
  res.years.resize(n);
  res.u_keur = Eigen::ArrayXd::Zero(n);
  res.sales_thermal = Eigen::ArrayXd::Zero(n);
  res.sales_ev = Eigen::ArrayXd::Zero(n);
  res.stock_thermal = Eigen::ArrayXd::Zero(n);
  res.stock_ev = Eigen::ArrayXd::Zero(n);
  res.emissions_Mt = Eigen::ArrayXd::Zero(n);
  res.spend_Geur = Eigen::ArrayXd::Zero(n);
  res.states.reserve(n);

  FleetState state = initial;
  for (int t = t0; t <= T; ++t) {
    const int k = t - t0;
    if (t > t0) {
      const Eigen::Array2Xd surv = survivors(state, params.survival);
      double demand = new_vehicle_demand(inputs, t, surv);
      if (demand < -kDemandTolerance) {
        res.warnings.push_back("demand shortfall in " + std::to_string(t) +
                               ": " + std::to_string(demand) +
                               " vehicles, clamped to zero");
        demand = 0.0;
      } else if (demand < 0.0) {
        demand = 0.0;
      }
      double p1 = 0.0, p2 = 1.0, u = 0.0;
      if (!policy.ban_thermal) {
        u = policy.u_keur(t - policy.first_year);
        const double u1 =
            utility(VehicleType::Thermal, t, inputs, params.logit, 0.0);
        const double u2 =
            utility(VehicleType::Electric, t, inputs, params.logit, u);
        std::tie(p1, p2) = logit_split(u1, u2, params.logit.mu);
      }
      state = assemble(surv, p1, p2, demand, t);
      res.u_keur(k) = u;
      res.sales_thermal(k) = p1 * demand;
      res.sales_ev(k) = p2 * demand;
      res.spend_Geur(k) = u * p2 * demand * 1e-6;  // k EUR -> G EUR
    }
    res.years[k] = t;
    res.stock_thermal(k) = state.stock.row(0).sum();
    res.stock_ev(k) = state.stock.row(1).sum();
    res.emissions_Mt(k) =
        emissions(state, params.emission_factors, inputs.M(t));
    res.states.push_back(state);
  }
  res.budget_Geur = res.spend_Geur.sum();
  return res;
}

}  // namespace fleetcast
