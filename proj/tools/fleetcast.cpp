#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fleetcast/calibration.hpp"
#include "fleetcast/choice.hpp"
#include "fleetcast/io.hpp"
#include "fleetcast/ocp.hpp"
#include "fleetcast/scenarios.hpp"

namespace fs = std::filesystem;
using namespace fleetcast;

namespace {

double parse_number(const std::string& s, const std::string& what) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end)
    throw ValidationError("cannot parse '" + s + "' as " + what);
  return v;
}

scenarios::PolicyLaw parse_law(const std::string& text,
                               const io::RunConfig& cfg) {
  if (text == "i0") return scenarios::PolicyLaw::zero();
  if (text == "ic") return scenarios::PolicyLaw::constant(cfg.ic_level_keur);
  if (text.rfind("ic:", 0) == 0)
    return scenarios::PolicyLaw::constant(
        parse_number(text.substr(3), "an incentive level"));
  if (text == "ip") return scenarios::PolicyLaw::full_price();
  if (text == "bi") return scenarios::PolicyLaw::ban_thermal();
  if (text.rfind("custom:", 0) == 0)
    return scenarios::PolicyLaw::custom_law(
        io::read_control(text.substr(7)));
  throw ValidationError("unknown law '" + text +
                        "' (expected i0, ic[:level], ip, bi, custom:<file>)");
}

std::string file_token(const std::string& label) {
  if (label == "Optimal") return "opt";
  std::string out;
  for (char c : label) out += static_cast<char>(std::tolower(c));
  return out;
}

ModelParams make_params(const io::Dataset& data, const io::RunConfig& cfg) {
  return ModelParams{cfg.logit, cfg.bass, data.survival,
                     data.emission_factors};
}

double resolve_target(const std::string& spec, const io::Dataset& data,
                      const io::RunConfig& cfg) {
  if (spec.rfind("from-scenario:", 0) == 0) {
    const auto law = parse_law(spec.substr(14), cfg);
    const auto res = scenarios::run_scenario(
        law, data.initial, data.inputs, make_params(data, cfg),
        cfg.horizon_end);
    return res.terminal_emissions();
  }
  return parse_number(spec, "a terminal emission target in Mt");
}

ocp::OcpProblem make_problem(const io::Dataset& data, const io::RunConfig& cfg,
                             double target_Mt) {
  return ocp::OcpProblem{data.initial,   data.inputs,
                         make_params(data, cfg), target_Mt,
                         cfg.u_max_keur, cfg.horizon_end};
}

ScenarioResult run_optimal(const io::Dataset& data, const io::RunConfig& cfg,
                           ocp::OcpSolution* solution_out,
                           double* target_out = nullptr) {
  const double target = resolve_target(cfg.target, data, cfg);
  const ocp::OcpProblem prob = make_problem(data, cfg, target);
  const ocp::ControlTrajectory init{
      cfg.t0 + 1, Eigen::ArrayXd::Constant(prob.horizon(), 5.0)};
  ocp::OcpSolution sol = ocp::solve(prob, init, cfg.solver);
  ScenarioResult res = scenarios::run_scenario(
      scenarios::PolicyLaw::custom_law(sol.u_star), data.initial, data.inputs,
      make_params(data, cfg), cfg.horizon_end);
  res.label = "Optimal";
  if (target_out) *target_out = target;
  if (solution_out) *solution_out = std::move(sol);
  return res;
}

void print_scenario_line(const ScenarioResult& res) {
  std::printf("%-8s E(%d) = %s Mt", res.label.c_str(), res.T,
              io::format_double(res.terminal_emissions()).c_str());
  if (res.label != "BI")
    std::printf(", budget = %s G EUR",
                io::format_double(res.budget_Geur).c_str());
  for (const auto& w : res.warnings)
    std::printf("\n  warning: %s", w.c_str());
  std::printf("\n");
}

int cmd_calibrate(const io::RunConfig& cfg, int pair_from) {
  const auto data = io::load_dataset(cfg.data_dir, cfg.t0);
  const auto& hist = data.history;
  if (pair_from == 0 && !hist.stock_panel.empty())
    pair_from = hist.stock_panel.rbegin()->first - 1;

  const auto fit = calibration::fit_survival(hist, pair_from, pair_from + 1);
  const auto factors = calibration::fit_emission_factor(hist, cfg.horizon_end);
  const auto mileage = calibration::estimate_mileage(hist, factors);
  const auto bass = calibration::tune_bass(hist);

  const fs::path out(cfg.out_dir);
  {
    std::string s = "age,raw_ratio,eta\n";
    for (int a = 1; a <= fit.saturated.max_age(); ++a) {
      s += std::to_string(a);
      s += ',' + io::format_double(fit.raw_ratio(a - 1));
      s += ',' + io::format_double(fit.saturated.at(a));
      s += '\n';
    }
    io::write_text(out / "survival_fit.csv", s);
  }
  {
    std::string s = "year,eps_gpkm\n";
    for (int y = factors.first_year; y <= factors.last_year(); ++y) {
      s += std::to_string(y);
      s += ',' + io::format_double(factors.at(y));
      s += '\n';
    }
    io::write_text(out / "emission_factors_fit.csv", s);
  }
  {
    std::string s = "year,M_km\n";
    for (const auto& [year, m] : mileage.per_year_km) {
      s += std::to_string(year);
      s += ',' + io::format_double(m);
      s += '\n';
    }
    io::write_text(out / "mileage.csv", s);
  }

  std::string rep;
  rep += "survival fit (" + std::to_string(pair_from) + " -> " +
         std::to_string(pair_from + 1) + ")\n";
  rep += "  slope      " + io::format_double(fit.slope) + "\n";
  rep += "  intercept  " + io::format_double(fit.intercept) + "\n";
  rep += "  mean vehicle life [years]: fitted " +
         io::format_double(calibration::mean_vehicle_life(fit.saturated)) +
         ", bundled " +
         io::format_double(calibration::mean_vehicle_life(data.survival)) +
         "\n";
  rep += "emission factors\n";
  rep += "  observed through " +
         std::to_string(hist.co2_new_sales_gkm.rbegin()->first) +
         ", quadratic projection to " + std::to_string(cfg.horizon_end) + "\n";
  rep += "  projection at 2035: " +
         io::format_double(calibration::quadratic_emission_factor(2035)) +
         " g/km (bundled series: " +
         io::format_double(data.emission_factors.at(2035)) + ")\n";
  rep += "mileage\n";
  rep += "  years estimated: " + std::to_string(mileage.per_year_km.size()) +
         "\n";
  rep += "  constant (median, rounded to 500): " +
         io::format_double(mileage.constant_km) + " km\n";
  rep += "adoption\n";
  rep += "  grid optimum p = " + io::format_double(bass.params.p) +
         ", q = " + io::format_double(bass.params.q) +
         ", rmse = " + io::format_double(bass.rmse) + "\n";
  io::write_text(out / "calibration_report.txt", rep);
  std::fputs(rep.c_str(), stdout);
  return 0;
}

int cmd_simulate(const io::RunConfig& cfg) {
  const auto data = io::load_dataset(cfg.data_dir, cfg.t0);
  const auto law = parse_law(cfg.law, cfg);
  const auto res = scenarios::run_scenario(
      law, data.initial, data.inputs, make_params(data, cfg),
      cfg.horizon_end);
  io::write_trajectory(
      fs::path(cfg.out_dir) / ("trajectory_" + file_token(res.label) + ".csv"),
      res);
  print_scenario_line(res);
  return 0;
}

int cmd_optimize(const io::RunConfig& cfg) {
  const auto data = io::load_dataset(cfg.data_dir, cfg.t0);
  ocp::OcpSolution sol;
  double target = 0.0;
  const ScenarioResult res = run_optimal(data, cfg, &sol, &target);

  const fs::path out(cfg.out_dir);
  io::write_control(out / "control_opt.csv", sol.u_star);
  io::write_trajectory(out / "trajectory_opt.csv", res);
  io::write_trace(out / "trace.csv", sol.trace);

  std::printf("optimal budget I = %s G EUR\n",
              io::format_double(sol.I_total_Geur).c_str());
  std::printf("terminal emissions E(%d) = %s Mt (cap %s)\n", cfg.horizon_end,
              io::format_double(sol.E_terminal_Mt).c_str(),
              io::format_double(target).c_str());
  std::printf("multiplier = %s, outer iterations = %d\n",
              io::format_double(sol.multiplier).c_str(),
              sol.outer_iterations);
  std::printf("kkt: stationarity %s, feasibility %s, complementarity %s\n",
              io::format_double(sol.kkt.stationarity).c_str(),
              io::format_double(sol.kkt.feasibility).c_str(),
              io::format_double(sol.kkt.complementarity).c_str());
  if (sol.status != ocp::SolveStatus::Converged) {
    std::fprintf(stderr, "error: not converged after %d outer iterations\n",
                 sol.outer_iterations);
    return 4;
  }
  return 0;
}

int cmd_compare(const io::RunConfig& cfg) {
  const auto data = io::load_dataset(cfg.data_dir, cfg.t0);
  std::vector<std::string> tokens;
  {
    std::string cur;
    for (char c : cfg.scenario_set) {
      if (c == ',') {
        if (!cur.empty()) tokens.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) tokens.push_back(cur);
  }
  if (tokens.empty()) throw ValidationError("empty scenario list");

  std::vector<ScenarioResult> results;
  for (const auto& tok : tokens) {
    if (tok == "opt") {
      results.push_back(run_optimal(data, cfg, nullptr));
    } else {
      results.push_back(scenarios::run_scenario(
          parse_law(tok, cfg), data.initial, data.inputs,
          make_params(data, cfg), cfg.horizon_end));
    }
  }

  const fs::path out(cfg.out_dir);
  std::map<std::string, int> used;
  for (const auto& res : results) {
    std::string token = file_token(res.label);
    const int n = ++used[token];
    if (n > 1) token += "_" + std::to_string(n);
    io::write_trajectory(out / ("trajectory_" + token + ".csv"), res);
  }

  const auto table = scenarios::compare(results);
  io::write_comparison_csv(out / "comparison.csv", table);
  const std::string text = scenarios::format_comparison(table);
  io::write_text(out / "comparison.txt", text);
  std::fputs(text.c_str(), stdout);
  return 0;
}

int run(int argc, char** argv) {
  // Load an explicit config before defining flags so flags override it.
  io::RunConfig cfg;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) {
      cfg = io::read_config(argv[i + 1]);
    } else if (arg.rfind("--config=", 0) == 0) {
      cfg = io::read_config(arg.substr(9));
    }
  }

  CLI::App app{
      "Age-structured two-powertrain fleet model: scenario simulation, "
      "calibration and incentive backcasting"};
  app.require_subcommand(1);
  std::string config_dummy;
  app.add_option("--config", config_dummy, "run configuration file");

  auto add_common = [&cfg](CLI::App* sub) {
    sub->add_option("--data", cfg.data_dir, "dataset directory");
    sub->add_option("--out", cfg.out_dir, "output directory");
    sub->add_option("--t0", cfg.t0, "initial year");
    sub->add_option("--T", cfg.horizon_end, "final year");
  };

  auto* cal = app.add_subcommand("calibrate", "fit model parameters from the "
                                              "historical series");
  int pair_from = 0;
  add_common(cal);
  cal->add_option("--pair", pair_from,
                  "first year of the survival panel pair (default: last two)");

  auto* sim = app.add_subcommand("simulate", "run one policy scenario");
  add_common(sim);
  sim->add_option("--law", cfg.law, "i0 | ic[:level] | ip | bi | custom:<file>");

  auto* opt = app.add_subcommand("optimize",
                                 "minimize the incentive budget under a "
                                 "terminal emission cap");
  add_common(opt);
  opt->add_option("--target", cfg.target,
                  "cap in Mt, or from-scenario:<law>");
  opt->add_option("--umax", cfg.u_max_keur, "incentive upper bound [k EUR]");

  auto* cmp = app.add_subcommand("compare", "run a scenario set and tabulate "
                                            "terminal emissions and budgets");
  add_common(cmp);
  cmp->add_option("--scenarios", cfg.scenario_set,
                  "comma-separated laws, plus 'opt' for the optimum");
  cmp->add_option("--target", cfg.target,
                  "emission cap used by the 'opt' entry");

  CLI11_PARSE(app, argc, argv);

  if (cal->parsed()) return cmd_calibrate(cfg, pair_from);
  if (sim->parsed()) return cmd_simulate(cfg);
  if (opt->parsed()) return cmd_optimize(cfg);
  return cmd_compare(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const InfeasibleProblem& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const InsufficientData& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const DivisionByZero& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const EmptyGrid& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const MissingCohortFactor& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NegativeDemand& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
}
