#include "fleetcast/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace fleetcast {
namespace io {

namespace {

std::string loc(const std::filesystem::path& file, int line) {
  return file.string() + ":" + std::to_string(line);
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

double parse_double(const std::string& s, const std::filesystem::path& file,
                    int line, const std::string& col) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end)
    throw ValidationError(loc(file, line) + ": cannot parse '" + s +
                          "' as a number in column " + col);
  return v;
}

int parse_int(const std::string& s, const std::filesystem::path& file,
              int line, const std::string& col) {
  int v = 0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end)
    throw ValidationError(loc(file, line) + ": cannot parse '" + s +
                          "' as an integer in column " + col);
  return v;
}

// Column handles for one table, with the validation checks shared by all
// readers.
struct Reader {
  const Table& table;
  std::filesystem::path file;

  int col(const std::string& name) const {
    const int c = table.column(name);
    if (c < 0)
      throw ValidationError(file.string() + ": missing column(s): " + name);
    return c;
  }

  void require(std::initializer_list<const char*> names) const {
    std::string missing;
    for (const char* n : names) {
      if (table.column(n) < 0) {
        if (!missing.empty()) missing += ", ";
        missing += n;
      }
    }
    if (!missing.empty())
      throw ValidationError(file.string() + ": missing column(s): " + missing);
  }

  int line(size_t row) const { return static_cast<int>(row) + 2; }

  const std::string& field(size_t row, int c) const {
    const auto& r = table.rows[row];
    if (c >= static_cast<int>(r.size()))
      throw ValidationError(loc(file, line(row)) + ": too few fields");
    return r[c];
  }

  double num(size_t row, int c) const {
    return parse_double(field(row, c), file, line(row), table.header[c]);
  }

  int integer(size_t row, int c) const {
    return parse_int(field(row, c), file, line(row), table.header[c]);
  }

  double non_negative(size_t row, int c) const {
    const double v = num(row, c);
    if (v < 0.0)
      throw ValidationError(loc(file, line(row)) +
                            ": negative value in column " + table.header[c]);
    return v;
  }

  double unit_interval(size_t row, int c) const {
    const double v = non_negative(row, c);
    if (v > 1.0)
      throw ValidationError(loc(file, line(row)) + ": value in column " +
                            table.header[c] + " outside [0, 1]");
    return v;
  }

  // Years must ascend without gaps; returns the first year.
  int contiguous_years(int c) const {
    int first = 0;
    for (size_t i = 0; i < table.rows.size(); ++i) {
      const int y = integer(i, c);
      if (i == 0) {
        first = y;
      } else if (y != first + static_cast<int>(i)) {
        throw ValidationError(loc(file, line(i)) +
                              ": non-contiguous years: expected " +
                              std::to_string(first + static_cast<int>(i)) +
                              ", found " + std::to_string(y));
      }
    }
    return first;
  }
};

VehicleType parse_type(const std::string& s, const std::filesystem::path& file,
                       int line) {
  if (s == "thermal") return VehicleType::Thermal;
  if (s == "electric") return VehicleType::Electric;
  throw ValidationError(loc(file, line) + ": unknown vehicle type '" + s +
                        "' (expected thermal or electric)");
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

int Table::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

Table read_table(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open " + file.string());
  Table t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      t.header = split(line, ',');
      first = false;
      continue;
    }
    if (trim(line).empty()) continue;
    t.rows.push_back(split(line, ','));
  }
  if (first) throw ValidationError(file.string() + ": empty file");
  return t;
}

ExogenousInputs read_exogenous(const std::filesystem::path& file) {
  const Table t = read_table(file);
  const Reader r{t, file};
  r.require({"year", "G_Mvkm", "M_km", "CP_icev_keur", "CP_ev_keur",
             "CO_icev_eur", "CO_ev_eur", "cI_ev", "cA_ev"});
  ExogenousInputs in;
  in.first_year = r.contiguous_years(r.col("year"));
  const int n = static_cast<int>(t.rows.size());
  if (n == 0) throw ValidationError(file.string() + ": no data rows");
  in.G_vkm.resize(n);
  in.M_km.resize(n);
  in.cp_thermal_keur.resize(n);
  in.cp_ev_keur.resize(n);
  in.co_thermal_eur.resize(n);
  in.co_ev_eur.resize(n);
  in.ci_ev.resize(n);
  in.ca_ev.resize(n);
  for (int i = 0; i < n; ++i) {
    in.G_vkm(i) = r.non_negative(i, r.col("G_Mvkm")) * 1e6;  // Mvkm -> vkm
    in.M_km(i) = r.non_negative(i, r.col("M_km"));
    in.cp_thermal_keur(i) = r.non_negative(i, r.col("CP_icev_keur"));
    in.cp_ev_keur(i) = r.non_negative(i, r.col("CP_ev_keur"));
    in.co_thermal_eur(i) = r.non_negative(i, r.col("CO_icev_eur"));
    in.co_ev_eur(i) = r.non_negative(i, r.col("CO_ev_eur"));
    in.ci_ev(i) = r.unit_interval(i, r.col("cI_ev"));
    in.ca_ev(i) = r.unit_interval(i, r.col("cA_ev"));
  }
  return in;
}

FleetState read_initial_fleet(const std::filesystem::path& file, int year,
                              int max_age) {
  const Table t = read_table(file);
  const Reader r{t, file};
  r.require({"type", "age", "count"});
  FleetState state = FleetState::zero(year, max_age);
  std::set<std::pair<int, int>> seen;
  for (size_t i = 0; i < t.rows.size(); ++i) {
    const VehicleType v =
        parse_type(r.field(i, r.col("type")), file, r.line(i));
    const int age = r.integer(i, r.col("age"));
    if (age < 0 || age > max_age)
      throw ValidationError(loc(file, r.line(i)) + ": age " +
                            std::to_string(age) + " outside 0.." +
                            std::to_string(max_age));
    if (!seen.insert({type_index(v), age}).second)
      throw ValidationError(loc(file, r.line(i)) + ": duplicate entry for " +
                            r.field(i, r.col("type")) + " age " +
                            std::to_string(age));
    state.at(v, age) = r.non_negative(i, r.col("count"));
  }
  return state;
}

SurvivalSchedule read_survival(const std::filesystem::path& file) {
  const Table t = read_table(file);
  const Reader r{t, file};
  r.require({"age", "eta"});
  SurvivalSchedule s;
  s.eta.resize(t.rows.size());
  for (size_t i = 0; i < t.rows.size(); ++i) {
    const int age = r.integer(i, r.col("age"));
    if (age != static_cast<int>(i) + 1)
      throw ValidationError(loc(file, r.line(i)) + ": ages must run 1.." +
                            std::to_string(t.rows.size()) + " in order");
    const double eta = r.num(i, r.col("eta"));
    if (eta < 0.0 || eta > 1.0)
      throw ValidationError(loc(file, r.line(i)) +
                            ": survival factor outside [0, 1]");
    s.eta(i) = eta;
  }
  if (s.eta.size() == 0) throw ValidationError(file.string() + ": no data rows");
  return s;
}

EmissionFactorTable read_emission_factors(const std::filesystem::path& file) {
  const Table t = read_table(file);
  const Reader r{t, file};
  r.require({"year", "eps_gpkm"});
  EmissionFactorTable table;
  table.first_year = r.contiguous_years(r.col("year"));
  table.eps.resize(t.rows.size());
  for (size_t i = 0; i < t.rows.size(); ++i)
    table.eps(i) = r.non_negative(i, r.col("eps_gpkm"));
  if (table.eps.size() == 0)
    throw ValidationError(file.string() + ": no data rows");
  return table;
}

ocp::ControlTrajectory read_control(const std::filesystem::path& file) {
  const Table t = read_table(file);
  const Reader r{t, file};
  r.require({"year", "u_keur"});
  ocp::ControlTrajectory u;
  u.first_year = r.contiguous_years(r.col("year"));
  u.u_keur.resize(t.rows.size());
  for (size_t i = 0; i < t.rows.size(); ++i)
    u.u_keur(i) = r.non_negative(i, r.col("u_keur"));
  if (u.size() == 0) throw ValidationError(file.string() + ": no data rows");
  return u;
}

calibration::HistoricalSeries read_historical(
    const std::filesystem::path& dir) {
  calibration::HistoricalSeries hist;

  {
    const auto file = dir / "stock_by_age.csv";
    const Table t = read_table(file);
    const Reader r{t, file};
    r.require({"year", "type", "ownership", "age", "count"});
    int max_age = 0;
    for (size_t i = 0; i < t.rows.size(); ++i)
      max_age = std::max(max_age, r.integer(i, r.col("age")));
    for (size_t i = 0; i < t.rows.size(); ++i) {
      const int year = r.integer(i, r.col("year"));
      const VehicleType v =
          parse_type(r.field(i, r.col("type")), file, r.line(i));
      const std::string& own = r.field(i, r.col("ownership"));
      int own_idx;
      if (own == "private") {
        own_idx = 0;
      } else if (own == "professional") {
        own_idx = 1;
      } else {
        throw ValidationError(loc(file, r.line(i)) + ": unknown ownership '" +
                              own + "' (expected private or professional)");
      }
      const int age = r.integer(i, r.col("age"));
      if (age < 0)
        throw ValidationError(loc(file, r.line(i)) + ": negative age");
      auto [it, inserted] = hist.stock_panel.try_emplace(
          year, Eigen::ArrayXXd::Zero(2 * kNumTypes, max_age + 1));
      it->second(type_index(v) * 2 + own_idx, age) +=
          r.non_negative(i, r.col("count"));
    }
  }

  {
    const auto file = dir / "new_car_co2.csv";
    const Table t = read_table(file);
    const Reader r{t, file};
    r.require({"year", "eps_gpkm"});
    r.contiguous_years(r.col("year"));
    for (size_t i = 0; i < t.rows.size(); ++i)
      hist.co2_new_sales_gkm[r.integer(i, r.col("year"))] =
          r.non_negative(i, r.col("eps_gpkm"));
  }

  {
    const auto file = dir / "fleet_emissions.csv";
    const Table t = read_table(file);
    const Reader r{t, file};
    r.require({"year", "e1_Mt"});
    for (size_t i = 0; i < t.rows.size(); ++i)
      hist.thermal_emissions_Mt[r.integer(i, r.col("year"))] =
          r.non_negative(i, r.col("e1_Mt"));
  }

  {
    const auto file = dir / "ev_sales_share.csv";
    const Table t = read_table(file);
    const Reader r{t, file};
    r.require({"year", "share"});
    for (size_t i = 0; i < t.rows.size(); ++i)
      hist.ev_sales_share[r.integer(i, r.col("year"))] =
          r.unit_interval(i, r.col("share"));
  }

  return hist;
}

Dataset load_dataset(const std::filesystem::path& dir, int initial_year) {
  Dataset d;
  d.inputs = read_exogenous(dir / "exogenous.csv");
  d.initial = read_initial_fleet(dir / "initial_fleet.csv", initial_year);
  d.survival = read_survival(dir / "survival.csv");
  d.emission_factors = read_emission_factors(dir / "emission_factors.csv");
  d.history = read_historical(dir / "historical");
  return d;
}

// ---- writers ----------------------------------------------------------------

void write_text(const std::filesystem::path& file, const std::string& text) {
  if (file.has_parent_path())
    std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + file.string());
  out << text;
}

void write_trajectory(const std::filesystem::path& file,
                      const ScenarioResult& res) {
  std::string s =
      "year,u_keur,sales_icev,sales_ev,stock_icev,stock_ev,E_Mt,spend_Geur\n";
  for (size_t k = 0; k < res.years.size(); ++k) {
    s += std::to_string(res.years[k]);
    s += ',' + format_double(res.u_keur(k));
    s += ',' + format_double(res.sales_thermal(k));
    s += ',' + format_double(res.sales_ev(k));
    s += ',' + format_double(res.stock_thermal(k));
    s += ',' + format_double(res.stock_ev(k));
    s += ',' + format_double(res.emissions_Mt(k));
    s += ',' + format_double(res.spend_Geur(k));
    s += '\n';
  }
  write_text(file, s);
}

void write_control(const std::filesystem::path& file,
                   const ocp::ControlTrajectory& u) {
  std::string s = "year,u_keur\n";
  for (int k = 0; k < u.size(); ++k) {
    s += std::to_string(u.first_year + k);
    s += ',' + format_double(u.u_keur(k));
    s += '\n';
  }
  write_text(file, s);
}

void write_comparison_csv(const std::filesystem::path& file,
                          const scenarios::ComparisonTable& table) {
  std::string s = "scenario,E_Mt,I_Geur\n";
  for (const auto& row : table.rows) {
    s += row.scenario;
    s += ',' + format_double(row.terminal_emissions_Mt);
    s += ',';
    s += row.budget_Geur ? format_double(*row.budget_Geur) : "-";
    s += '\n';
  }
  write_text(file, s);
}

void write_trace(const std::filesystem::path& file,
                 const std::vector<ocp::TraceRow>& trace) {
  std::string s =
      "outer,inner_iterations,objective_Geur,emissions_Mt,violation_Mt,"
      "multiplier,penalty,stationarity\n";
  for (const auto& r : trace) {
    s += std::to_string(r.outer);
    s += ',' + std::to_string(r.inner_iterations);
    s += ',' + format_double(r.objective_Geur);
    s += ',' + format_double(r.emissions_Mt);
    s += ',' + format_double(r.violation_Mt);
    s += ',' + format_double(r.multiplier);
    s += ',' + format_double(r.penalty);
    s += ',' + format_double(r.stationarity);
    s += '\n';
  }
  write_text(file, s);
}

// ---- configuration ----------------------------------------------------------

RunConfig read_config(const std::filesystem::path& file) {
  RunConfig cfg;
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open " + file.string());
  std::string line;
  int lineno = 0;
  std::map<std::string, std::string> kv;
  std::vector<std::pair<std::string, int>> order;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(loc(file, lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ValidationError(loc(file, lineno) + ": empty key");
    kv[key] = value;
    order.emplace_back(key, lineno);
  }

  auto as_int = [&](const std::string& v, int line_no) {
    return parse_int(v, file, line_no, "config");
  };
  auto as_double = [&](const std::string& v, int line_no) {
    return parse_double(v, file, line_no, "config");
  };

  for (const auto& [key, line_no] : order) {
    const std::string& v = kv[key];
    if (key == "data_dir") cfg.data_dir = v;
    else if (key == "out_dir") cfg.out_dir = v;
    else if (key == "t0") cfg.t0 = as_int(v, line_no);
    else if (key == "horizon_end") cfg.horizon_end = as_int(v, line_no);
    else if (key == "u_max") cfg.u_max_keur = as_double(v, line_no);
    else if (key == "ic_level") cfg.ic_level_keur = as_double(v, line_no);
    else if (key == "target") cfg.target = v;
    else if (key == "law") cfg.law = v;
    else if (key == "scenarios") cfg.scenario_set = v;
    else if (key == "mu") cfg.logit.mu = as_double(v, line_no);
    else if (key == "p_purchase") cfg.logit.p_purchase = as_double(v, line_no);
    else if (key == "p_operating") cfg.logit.p_operating = as_double(v, line_no);
    else if (key == "p_infrastructure")
      cfg.logit.p_infrastructure = as_double(v, line_no);
    else if (key == "bass_p") cfg.bass.p = as_double(v, line_no);
    else if (key == "bass_q") cfg.bass.q = as_double(v, line_no);
    else if (key == "bass_chi0") cfg.bass.chi0 = as_double(v, line_no);
    else if (key == "solver_max_outer") cfg.solver.max_outer = as_int(v, line_no);
    else if (key == "solver_max_inner") cfg.solver.max_inner = as_int(v, line_no);
    else if (key == "solver_tol_stationarity")
      cfg.solver.tol_stationarity = as_double(v, line_no);
    else if (key == "solver_tol_feasibility")
      cfg.solver.tol_feasibility_Mt = as_double(v, line_no);
    else if (key == "solver_tol_complementarity")
      cfg.solver.tol_complementarity = as_double(v, line_no);
    else
      throw ValidationError(loc(file, line_no) + ": unknown key '" + key + "'");
  }
  return cfg;
}

}  // namespace io
}  // namespace fleetcast
