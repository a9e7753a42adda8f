#include "fleetcast/scenarios.hpp"

#include <algorithm>
#include <cstdio>

namespace fleetcast {
namespace scenarios {

std::string PolicyLaw::label() const {
  switch (kind) {
    case Kind::ZeroIncentive: return "I0";
    case Kind::ConstantIncentive: return "IC";
    case Kind::FullPrice: return "IP";
    case Kind::BanThermal: return "BI";
    case Kind::Custom: return "Custom";
  }
  return "?";
}

SimulatePolicy PolicyLaw::materialize(const ExogenousInputs& inputs, int t0,
                                      int T) const {
  const int n = T - t0;
  if (n <= 0) throw ValidationError("empty policy horizon");
  SimulatePolicy pol;
  pol.first_year = t0 + 1;
  pol.u_keur = Eigen::ArrayXd::Zero(n);
  switch (kind) {
    case Kind::ZeroIncentive:
      break;
    case Kind::ConstantIncentive:
      pol.u_keur.setConstant(level_keur);
      break;
    case Kind::FullPrice:
      for (int k = 0; k < n; ++k)
        pol.u_keur(k) = inputs.cp(VehicleType::Electric, t0 + 1 + k);
      break;
    case Kind::BanThermal:
      pol.ban_thermal = true;
      break;
    case Kind::Custom:
      if (custom.first_year != t0 + 1 || custom.size() != n)
        throw ValidationError("custom control does not cover " +
                              std::to_string(t0 + 1) + ".." +
                              std::to_string(T));
      pol.u_keur = custom.u_keur;
      break;
  }
  return pol;
}

ScenarioResult run_scenario(const PolicyLaw& law, const FleetState& initial,
                            const ExogenousInputs& inputs,
                            const ModelParams& params, int T) {
  ScenarioResult res =
      simulate(initial, law.materialize(inputs, initial.year, T), inputs,
               params);
  res.label = law.label();
  return res;
}

namespace {

int rank(const std::string& label) {
  if (label == "I0") return 0;
  if (label == "IC") return 1;
  if (label == "IP") return 2;
  if (label == "BI") return 3;
  if (label == "Optimal") return 4;
  return 5;
}

}  // namespace

ComparisonTable compare(const std::vector<ScenarioResult>& results) {
  std::vector<const ScenarioResult*> order;
  order.reserve(results.size());
  for (const auto& r : results) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(),
                   [](const ScenarioResult* a, const ScenarioResult* b) {
                     return rank(a->label) < rank(b->label);
                   });
  ComparisonTable table;
  for (const ScenarioResult* r : order) {
    ComparisonRow row;
    row.scenario = r->label;
    row.terminal_emissions_Mt = r->terminal_emissions();
    if (r->label != "BI") row.budget_Geur = r->budget_Geur;
    table.rows.push_back(row);
  }
  return table;
}

std::string format_comparison(const ComparisonTable& table) {
  // snprintf with the default "C" locale keeps the output byte-stable; the
  // program never calls setlocale.
  std::string out = "scenario  E(T) [Mt]  budget [G EUR]\n";
  char buf[96];
  for (const auto& row : table.rows) {
    if (row.budget_Geur) {
      std::snprintf(buf, sizeof buf, "%-8s  %9.3f  %14.3f\n",
                    row.scenario.c_str(), row.terminal_emissions_Mt,
                    *row.budget_Geur);
    } else {
      std::snprintf(buf, sizeof buf, "%-8s  %9.3f  %14s\n",
                    row.scenario.c_str(), row.terminal_emissions_Mt, "-");
    }
    out += buf;
  }
  return out;
}

}  // namespace scenarios
}  // namespace fleetcast
