#pragma once

#include <map>

#include "fleetcast/types.hpp"

namespace fleetcast {
namespace calibration {

// Observed series the model parameters are fitted against.  The stock panel
// rows are type x ownership: [thermal private, thermal professional,
// electric private, electric professional]; columns are ages 0..A.
struct HistoricalSeries {
  std::map<int, Eigen::ArrayXXd> stock_panel;
  std::map<int, double> co2_new_sales_gkm;      // sales-weighted type approval
  std::map<int, double> thermal_emissions_Mt;   // fleet total per year
  std::map<int, double> ev_sales_share;         // share of new registrations

  // Stock summed over ownership, rows thermal/electric.
  Eigen::Array2Xd stock_by_type(int year) const;
};

struct SurvivalFit {
  int year_from = 0;
  int year_to = 0;
  double slope = 0.0;
  double intercept = 0.0;
  Eigen::ArrayXd raw_ratio;     // cohort ratio per age 1..A; NaN if undefined
  SurvivalSchedule saturated;   // affine law clamped into [0, 1]
};

// Cohort survival from two consecutive panel years: the ratio of age-a stock
// in year_to to age-(a-1) stock in year_from, then an OLS line over the
// attrition range (ages fit_age_min..A).
SurvivalFit fit_survival(const HistoricalSeries& hist, int year_from,
                         int year_to, int fit_age_min = 6);

// Expected service life once attrition sets in: sum of cumulative survival
// products starting at the first age whose factor drops below one.
double mean_vehicle_life(const SurvivalSchedule& schedule);

// Published projection of new-sale emission intensity (g/km) past the
// observed range.
double quadratic_emission_factor(int year);

// Factor table: observed series over its own years, quadratic projection
// afterwards up to future_anchor.  Cohorts before the table start fall back
// to the pre-1995 constant via EmissionFactorTable::at.
EmissionFactorTable fit_emission_factor(const HistoricalSeries& hist,
                                        int future_anchor);

struct MileageEstimate {
  std::map<int, double> per_year_km;
  double constant_km = 0.0;  // median rounded to the nearest 500 km
};

// Annual mileage implied by observed fleet emissions and the factor-weighted
// thermal stock.
MileageEstimate estimate_mileage(const HistoricalSeries& hist,
                                 const EmissionFactorTable& factors);

struct BassGrid {
  double p_min = 0.005, p_max = 0.05, p_step = 0.005;
  double q_min = 0.1, q_max = 0.8, q_step = 0.05;
};

struct BassFit {
  BassParams params;
  double rmse = 0.0;
};

// Grid search minimizing the RMSE between the Euler-integrated adoption flow
// and the observed EV sales shares.  Ties break towards smaller p, then
// smaller q.
BassFit tune_bass(const HistoricalSeries& hist, const BassGrid& grid = {});

}  // namespace calibration
}  // namespace fleetcast
