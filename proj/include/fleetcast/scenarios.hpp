#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fleetcast/fleet.hpp"
#include "fleetcast/ocp.hpp"

namespace fleetcast {
namespace scenarios {

// Reference policies: no incentive (I0), constant incentive (IC), incentive
// equal to the full EV purchase price (IP), thermal sales ban (BI), or an
// explicit yearly trajectory.
struct PolicyLaw {
  enum class Kind { ZeroIncentive, ConstantIncentive, FullPrice, BanThermal, Custom };

  Kind kind = Kind::ZeroIncentive;
  double level_keur = 0.0;          // ConstantIncentive only
  ocp::ControlTrajectory custom;    // Custom only

  std::string label() const;
  SimulatePolicy materialize(const ExogenousInputs& inputs, int t0,
                             int T) const;

  static PolicyLaw zero() { return {}; }
  static PolicyLaw constant(double level) {
    return {Kind::ConstantIncentive, level, {}};
  }
  static PolicyLaw full_price() { return {Kind::FullPrice, 0.0, {}}; }
  static PolicyLaw ban_thermal() { return {Kind::BanThermal, 0.0, {}}; }
  static PolicyLaw custom_law(ocp::ControlTrajectory u) {
    return {Kind::Custom, 0.0, std::move(u)};
  }
};

ScenarioResult run_scenario(const PolicyLaw& law, const FleetState& initial,
                            const ExogenousInputs& inputs,
                            const ModelParams& params, int T);

struct ComparisonRow {
  std::string scenario;
  double terminal_emissions_Mt = 0.0;
  std::optional<double> budget_Geur;  // empty when spending is not defined
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
};

// Rows in canonical order (I0, IC, IP, BI, Optimal, then the rest as given).
// The ban scenario carries no budget: it mandates instead of subsidizing.
ComparisonTable compare(const std::vector<ScenarioResult>& results);

std::string format_comparison(const ComparisonTable& table);

}  // namespace scenarios
}  // namespace fleetcast
