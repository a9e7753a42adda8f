#pragma once

#include <string>
#include <vector>

#include "fleetcast/types.hpp"

namespace fleetcast {

// Demand smaller than this (in vehicles) is treated as roundoff and clamped
// silently; anything more negative is a genuine shortfall.
constexpr double kDemandTolerance = 1e-3;

// Survivors of one ageing step, same shape as the stock with age 0 empty.
// Ages 1..A-1 carry the previous cohort forward; age A pools its own
// survivors with those of age A-1.
Eigen::Array2Xd survivors(const FleetState& state, const SurvivalSchedule& eta);

// Vehicles needed on top of the survivors to serve the traffic demand of
// `year`.  May be negative; callers decide how to react.
double new_vehicle_demand(const ExogenousInputs& inputs, int year,
                          const Eigen::Array2Xd& survivors);

// One transition `state.year` -> `year` (must be consecutive) with the given
// sales split.  Throws NegativeDemand when the surviving fleet already
// exceeds demand beyond tolerance.
FleetState step(const FleetState& state, double share_thermal, double share_ev,
                const ExogenousInputs& inputs, const SurvivalSchedule& eta,
                int year);

// Fleet CO2 of one year in Mt: thermal stock weighted by the factor of each
// cohort's first-registration year and the common mileage.
double emissions(const FleetState& state, const EmissionFactorTable& factors,
                 double mileage_km);

// Control law for a simulation run.  first_year is the first transition year
// (initial year + 1); with ban_thermal the split is forced fully electric
// and u is ignored.
struct SimulatePolicy {
  int first_year = 0;
  Eigen::ArrayXd u_keur;
  bool ban_thermal = false;
};

struct ScenarioResult {
  std::string label;
  int t0 = 0;
  int T = 0;
  std::vector<int> years;
  Eigen::ArrayXd u_keur;
  Eigen::ArrayXd sales_thermal;
  Eigen::ArrayXd sales_ev;
  Eigen::ArrayXd stock_thermal;
  Eigen::ArrayXd stock_ev;
  Eigen::ArrayXd emissions_Mt;
  Eigen::ArrayXd spend_Geur;    // u * EV sales, per year
  double budget_Geur = 0.0;     // cumulative spend over the horizon
  std::vector<std::string> warnings;
  std::vector<FleetState> states;

  double terminal_emissions() const {
    return emissions_Mt(emissions_Mt.size() - 1);
  }
};

// Full run from the initial state through the policy horizon.  Negative
// demand is clamped to zero here, with a warning record per year affected.
ScenarioResult simulate(const FleetState& initial, const SimulatePolicy& policy,
                        const ExogenousInputs& inputs,
                        const ModelParams& params);

}  // namespace fleetcast
