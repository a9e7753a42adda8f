#include <doctest.h>

#include <cctype>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "common.hpp"
#include "fleetcast/io.hpp"
#include "fleetcast/scenarios.hpp"

using namespace fleetcast;
using scenarios::PolicyLaw;

namespace {

const ScenarioResult& by_label(const std::string& label) {
  static const std::map<std::string, ScenarioResult> all = [] {
    const auto& d = testutil::dataset();
    const ModelParams p = testutil::params();
    std::map<std::string, ScenarioResult> m;
    for (const PolicyLaw& law :
         {PolicyLaw::zero(), PolicyLaw::constant(5.0), PolicyLaw::full_price(),
          PolicyLaw::ban_thermal()})
      m.emplace(law.label(),
                scenarios::run_scenario(law, d.initial, d.inputs, p, 2050));
    return m;
  }();
  return all.at(label);
}

// Compare one simulated series, indexed by calendar year, with a reference
// CSV column.  `scale` converts file units to model units.
void check_series(const ScenarioResult& r, const Eigen::ArrayXd& series,
                  const std::string& file, const std::string& col,
                  double scale, double tol) {
  namespace fs = std::filesystem;
  const auto t =
      io::read_table(fs::path(FLEETCAST_DATA_DIR) / "reference" / file);
  const int cy = t.column("year");
  const int cv = t.column(col);
  REQUIRE(!t.rows.empty());
  for (const auto& row : t.rows) {
    const int year = std::stoi(row[cy]);
    const double ref = std::stod(row[cv]) * scale;
    const int i = year - r.t0;
    REQUIRE(i >= 0);
    REQUIRE(i < static_cast<int>(series.size()));
    CAPTURE(file);
    CAPTURE(year);
    CHECK(testutil::rel_err(series(i), ref) <= tol);
  }
}

}  // namespace

TEST_SUITE_BEGIN("scenarios");

TEST_CASE("stronger policies end with lower emissions") {
  const double e_i0 = by_label("I0").terminal_emissions();
  const double e_ic = by_label("IC").terminal_emissions();
  const double e_ip = by_label("IP").terminal_emissions();
  const double e_bi = by_label("BI").terminal_emissions();
  CHECK(e_bi < e_ip);
  CHECK(e_ip < e_ic);
  CHECK(e_ic < e_i0);
}

TEST_CASE("the electric stock never shrinks") {
  for (const char* label : {"I0", "IC", "IP", "BI"}) {
    const auto& r = by_label(label);
    const auto n = r.stock_ev.size();
    CAPTURE(label);
    CHECK((r.stock_ev.tail(n - 1) - r.stock_ev.head(n - 1)).minCoeff() >= 0.0);
  }
}

TEST_CASE("the ban scenario sells no thermal cars and spends nothing") {
  const auto& r = by_label("BI");
  CHECK(r.sales_thermal.abs().maxCoeff() == 0.0);
  CHECK(r.u_keur.abs().maxCoeff() == 0.0);
  CHECK(r.spend_Geur.abs().maxCoeff() == 0.0);
  CHECK(r.budget_Geur == 0.0);
}

TEST_CASE("the full-price scenario tracks the EV purchase cost") {
  const auto& d = testutil::dataset();
  const auto& r = by_label("IP");
  CHECK(r.u_keur(0) == 0.0);  // no sales recorded at the initial year
  for (std::size_t i = 1; i < r.years.size(); ++i)
    CHECK(r.u_keur(i) == d.inputs.cp(VehicleType::Electric, r.years[i]));
}

TEST_CASE("a custom law with the right span reproduces the constant one") {
  const auto& d = testutil::dataset();
  const ModelParams p = testutil::params();
  const auto law = PolicyLaw::custom_law({2023, Eigen::ArrayXd::Constant(28, 5.0)});
  const ScenarioResult r =
      scenarios::run_scenario(law, d.initial, d.inputs, p, 2050);
  const auto& ic = by_label("IC");
  CHECK(r.label == "Custom");
  CHECK((r.emissions_Mt == ic.emissions_Mt).all());
  CHECK((r.stock_ev == ic.stock_ev).all());
  CHECK(r.budget_Geur == ic.budget_Geur);
}

TEST_CASE("a custom law with the wrong span is rejected") {
  const auto& d = testutil::dataset();
  const ModelParams p = testutil::params();
  const auto short_law =
      PolicyLaw::custom_law({2023, Eigen::ArrayXd::Zero(10)});
  const auto shifted_law =
      PolicyLaw::custom_law({2024, Eigen::ArrayXd::Zero(28)});
  CHECK_THROWS_AS(
      scenarios::run_scenario(short_law, d.initial, d.inputs, p, 2050),
      ValidationError);
  CHECK_THROWS_AS(
      scenarios::run_scenario(shifted_law, d.initial, d.inputs, p, 2050),
      ValidationError);
}

TEST_CASE("comparison rows come out in canonical order") {
  ScenarioResult opt = by_label("IC");
  opt.label = "Optimal";
  const std::vector<ScenarioResult> shuffled = {
      by_label("BI"), opt, by_label("IP"), by_label("I0"), by_label("IC")};
  const auto table = scenarios::compare(shuffled);
  REQUIRE(table.rows.size() == 5);
  CHECK(table.rows[0].scenario == "I0");
  CHECK(table.rows[1].scenario == "IC");
  CHECK(table.rows[2].scenario == "IP");
  CHECK(table.rows[3].scenario == "BI");
  CHECK(table.rows[4].scenario == "Optimal");

  CHECK(!table.rows[3].budget_Geur.has_value());
  CHECK(table.rows[1].budget_Geur.has_value());
  CHECK(*table.rows[1].budget_Geur ==
        doctest::Approx(214.938277003647).epsilon(1e-9));

  const std::string text = scenarios::format_comparison(table);
  CHECK(text.find("scenario") != std::string::npos);
  // The ban row shows a dash instead of a budget figure.
  const auto bi_pos = text.find("\nBI");
  REQUIRE(bi_pos != std::string::npos);
  const auto bi_line = text.substr(bi_pos + 1, text.find('\n', bi_pos + 1) -
                                                   bi_pos - 1);
  CHECK(bi_line.find('-') != std::string::npos);
}

TEST_CASE("simulated emissions stay within 3% of the published curves") {
  for (const char* label : {"i0", "ic", "ip", "bi"}) {
    std::string upper = label;
    for (auto& c : upper) c = static_cast<char>(std::toupper(c));
    const auto& r = by_label(upper);
    check_series(r, r.emissions_Mt,
                 "emissions_" + std::string(label) + ".csv", "E_Mt", 1.0,
                 0.03);
  }
}

TEST_CASE("simulated electric stocks stay within 3% of the published curves") {
  for (const char* label : {"i0", "ic", "ip", "bi"}) {
    std::string upper = label;
    for (auto& c : upper) c = static_cast<char>(std::toupper(c));
    const auto& r = by_label(upper);
    check_series(r, r.stock_ev, "ev_stock_" + std::string(label) + ".csv",
                 "S2_Mveh", 1e6, 0.03);
  }
}

TEST_CASE("constant-incentive electric sales stay within 3% of the published curve") {
  const auto& r = by_label("IC");
  check_series(r, r.sales_ev, "ev_sales_ic.csv", "N2_Mveh", 1e6, 0.03);
}

TEST_SUITE_END();
