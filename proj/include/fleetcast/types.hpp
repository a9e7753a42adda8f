#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace fleetcast {

// Age-structured passenger-car fleet, two powertrains, ages 0..max_age.
// Units are fixed at the I/O boundary: traffic demand in vkm, mileage in
// km/year, purchase prices and incentives in k EUR, operating costs in EUR,
// emission factors in g/km, fleet emissions in Mt, budgets in G EUR.

enum class VehicleType : int { Thermal = 1, Electric = 2 };

constexpr int kNumTypes = 2;
constexpr int kDefaultMaxAge = 30;

// Emission factor applied to cohorts first registered before 1995.
constexpr double kPre1995Factor = 176.0;

inline int type_index(VehicleType v) { return static_cast<int>(v) - 1; }

// ---- errors -----------------------------------------------------------------

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Surviving fleet exceeds traffic demand; reported, never silently dropped.
struct NegativeDemand : std::runtime_error {
  NegativeDemand(int year, double demand)
      : std::runtime_error("negative new-vehicle demand in " +
                           std::to_string(year) + ": " +
                           std::to_string(demand)),
        year(year), demand(demand) {}
  int year;
  double demand;
};

struct MissingCohortFactor : std::runtime_error {
  explicit MissingCohortFactor(int cohort_year)
      : std::runtime_error("no emission factor for cohort year " +
                           std::to_string(cohort_year)),
        cohort_year(cohort_year) {}
  int cohort_year;
};

struct InsufficientData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DivisionByZero : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyGrid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InfeasibleProblem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- state ------------------------------------------------------------------

// stock(v, a): vehicles of type v (row 0 thermal, row 1 electric) aged a
// calendar years at the end of `year`.  Column count is max_age + 1.
struct FleetState {
  Eigen::Array2Xd stock;
  int year = 0;

  int max_age() const { return static_cast<int>(stock.cols()) - 1; }
  double total() const { return stock.sum(); }

  double& at(VehicleType v, int age) { return stock(type_index(v), age); }
  double at(VehicleType v, int age) const { return stock(type_index(v), age); }

  static FleetState zero(int year, int max_age = kDefaultMaxAge) {
    FleetState s;
    s.stock = Eigen::Array2Xd::Zero(kNumTypes, max_age + 1);
    s.year = year;
    return s;
  }
};

// eta[a-1] = fraction of age a-1 vehicles surviving into age a.  Values lie
// in [0, 1]; the last entry also governs retention of the terminal age pool.
struct SurvivalSchedule {
  Eigen::ArrayXd eta;

  int max_age() const { return static_cast<int>(eta.size()); }
  double at(int age) const {
    if (age < 1 || age > max_age())
      throw ValidationError("survival age out of range: " + std::to_string(age));
    return eta(age - 1);
  }
};

// Type-approval emission factor (g/km) per first-registration year.
// Cohorts older than the table fall back to the pre-1995 constant; cohorts
// newer than the table are an error.
struct EmissionFactorTable {
  int first_year = 0;
  Eigen::ArrayXd eps;

  int last_year() const { return first_year + static_cast<int>(eps.size()) - 1; }
  double at(int cohort_year) const {
    if (cohort_year < first_year) {
      if (cohort_year < 1995) return kPre1995Factor;
      throw MissingCohortFactor(cohort_year);
    }
    if (cohort_year > last_year()) throw MissingCohortFactor(cohort_year);
    return eps(cohort_year - first_year);
  }
};

// ---- exogenous drivers ------------------------------------------------------

// Yearly series over [first_year, first_year + size - 1].  G is total traffic
// demand in vkm (converted from Mvkm when read), M the common annual mileage.
struct ExogenousInputs {
  int first_year = 0;
  Eigen::ArrayXd G_vkm;
  Eigen::ArrayXd M_km;
  Eigen::ArrayXd cp_thermal_keur;
  Eigen::ArrayXd cp_ev_keur;
  Eigen::ArrayXd co_thermal_eur;
  Eigen::ArrayXd co_ev_eur;
  Eigen::ArrayXd ci_ev;
  Eigen::ArrayXd ca_ev;

  int size() const { return static_cast<int>(G_vkm.size()); }
  int last_year() const { return first_year + size() - 1; }
  bool covers(int year) const { return year >= first_year && year <= last_year(); }

  int idx(int year) const {
    if (!covers(year))
      throw ValidationError("exogenous inputs do not cover year " +
                            std::to_string(year));
    return year - first_year;
  }

  double G(int year) const { return G_vkm(idx(year)); }
  double M(int year) const { return M_km(idx(year)); }
  double cp(VehicleType v, int year) const {
    return v == VehicleType::Thermal ? cp_thermal_keur(idx(year))
                                     : cp_ev_keur(idx(year));
  }
  double co(VehicleType v, int year) const {
    return v == VehicleType::Thermal ? co_thermal_eur(idx(year))
                                     : co_ev_eur(idx(year));
  }
  double ci(int year) const { return ci_ev(idx(year)); }
  double ca(int year) const { return ca_ev(idx(year)); }
};

// ---- model parameters -------------------------------------------------------

struct LogitParams {
  double p_purchase = -0.3;
  double p_operating = -0.15;
  double p_infrastructure = -0.3;
  double mu = 6.75;
};

// Adoption-diffusion ODE parameters; chi0 is the installed base share at the
// epoch year.
struct BassParams {
  double p = 0.02;
  double q = 0.4;
  double chi0 = 0.0;
};

constexpr int kBassEpochYear = 2018;

struct ModelParams {
  LogitParams logit;
  BassParams bass;
  SurvivalSchedule survival;
  EmissionFactorTable emission_factors;
};

}  // namespace fleetcast
