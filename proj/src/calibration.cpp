#include "fleetcast/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "fleetcast/choice.hpp"

namespace fleetcast {
namespace calibration {

Eigen::Array2Xd HistoricalSeries::stock_by_type(int year) const {
  const auto it = stock_panel.find(year);
  if (it == stock_panel.end())
    throw InsufficientData("no stock panel for year " + std::to_string(year));
  const Eigen::ArrayXXd& p = it->second;
  Eigen::Array2Xd out(kNumTypes, p.cols());
  out.row(0) = p.row(0) + p.row(1);
  out.row(1) = p.row(2) + p.row(3);
  return out;
}

SurvivalFit fit_survival(const HistoricalSeries& hist, int year_from,
                         int year_to, int fit_age_min) {
  if (year_to != year_from + 1)
    throw ValidationError("survival fit needs two consecutive years");
  if (!hist.stock_panel.count(year_from) || !hist.stock_panel.count(year_to))
    throw InsufficientData("stock panel missing " + std::to_string(year_from) +
                           " or " + std::to_string(year_to));

  const Eigen::Array2Xd from = hist.stock_by_type(year_from);
  const Eigen::Array2Xd to = hist.stock_by_type(year_to);
  if (from.cols() != to.cols())
    throw InsufficientData("panel years have different age ranges");
  const int A = static_cast<int>(from.cols()) - 1;

  SurvivalFit fit;
  fit.year_from = year_from;
  fit.year_to = year_to;
  fit.raw_ratio =
      Eigen::ArrayXd::Constant(A, std::numeric_limits<double>::quiet_NaN());
  for (int a = 1; a <= A; ++a) {
    const double denom = from.col(a - 1).sum();
    if (denom > 0.0) fit.raw_ratio(a - 1) = to.col(a).sum() / denom;
  }

  // OLS of ratio against age over the attrition range.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int a = fit_age_min; a <= A; ++a) {
    const double r = fit.raw_ratio(a - 1);
    if (std::isnan(r)) continue;
    sx += a;
    sy += r;
    sxx += static_cast<double>(a) * a;
    sxy += a * r;
    ++m;
  }
  if (m < 2)
    throw InsufficientData("fewer than two usable cohort ratios in ages " +
                           std::to_string(fit_age_min) + ".." +
                           std::to_string(A));
  const double denom = m * sxx - sx * sx;
  fit.slope = (m * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / m;

  fit.saturated.eta.resize(A);
  for (int a = 1; a <= A; ++a)
    fit.saturated.eta(a - 1) =
        std::clamp(fit.intercept + fit.slope * a, 0.0, 1.0);
  return fit;
}

double mean_vehicle_life(const SurvivalSchedule& schedule) {
  const int A = schedule.max_age();
  // Skip the leading plateau (factors indistinguishable from one).
  int start = A + 1;
  for (int a = 1; a <= A; ++a) {
    if (schedule.at(a) < 1.0 - 1e-6) {
      start = a;
      break;
    }
  }
  double life = 0.0, survival = 1.0;
  for (int a = start; a <= A; ++a) {
    survival *= schedule.at(a);
    life += survival;
  }
  return life;
}

double quadratic_emission_factor(int year) {
  const double d = year - 2020;
  return 0.01 * d * d - 1.27 * d + 108.2;
}

EmissionFactorTable fit_emission_factor(const HistoricalSeries& hist,
                                        int future_anchor) {
  if (hist.co2_new_sales_gkm.empty())
    throw InsufficientData("no observed new-sale emission intensities");
  const int first = hist.co2_new_sales_gkm.begin()->first;
  const int last_obs = hist.co2_new_sales_gkm.rbegin()->first;
  if (static_cast<int>(hist.co2_new_sales_gkm.size()) != last_obs - first + 1)
    throw ValidationError("observed emission intensities are not contiguous");
  if (future_anchor < last_obs)
    throw ValidationError("projection anchor precedes the observed range");

  EmissionFactorTable table;
  table.first_year = first;
  table.eps.resize(future_anchor - first + 1);
  for (const auto& [year, value] : hist.co2_new_sales_gkm)
    table.eps(year - first) = value;
  for (int year = last_obs + 1; year <= future_anchor; ++year)
    table.eps(year - first) = quadratic_emission_factor(year);
  return table;
}

MileageEstimate estimate_mileage(const HistoricalSeries& hist,
                                 const EmissionFactorTable& factors) {
  MileageEstimate est;
  std::vector<double> values;
  for (const auto& [year, e1] : hist.thermal_emissions_Mt) {
    if (!hist.stock_panel.count(year)) continue;
    const Eigen::Array2Xd stock = hist.stock_by_type(year);
    const int A = static_cast<int>(stock.cols()) - 1;
    double weighted = 0.0;  // g/km * vehicles
    for (int a = 0; a <= A; ++a)
      weighted += factors.at(year - a) * stock(0, a);
    if (weighted <= 0.0)
      throw DivisionByZero("zero factor-weighted thermal stock in " +
                           std::to_string(year));
    const double m = e1 * 1e12 / weighted;
    est.per_year_km[year] = m;
    values.push_back(m);
  }
  if (values.empty())
    throw InsufficientData("no overlapping years of stocks and emissions");

  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  const double median = n % 2 == 1
                            ? values[n / 2]
                            : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  est.constant_km = 500.0 * std::round(median / 500.0);
  return est;
}

BassFit tune_bass(const HistoricalSeries& hist, const BassGrid& grid) {
  if (hist.ev_sales_share.empty())
    throw InsufficientData("no observed EV sales shares");
  const int first = hist.ev_sales_share.begin()->first;
  const int last = hist.ev_sales_share.rbegin()->first;
  if (first < kBassEpochYear)
    throw ValidationError("observations precede the diffusion epoch");

  std::vector<std::pair<double, double>> points;
  const int np =
      grid.p_step > 0 ? static_cast<int>(std::floor((grid.p_max - grid.p_min) /
                                                    grid.p_step + 1e-9)) + 1
                      : (grid.p_min <= grid.p_max ? 1 : 0);
  const int nq =
      grid.q_step > 0 ? static_cast<int>(std::floor((grid.q_max - grid.q_min) /
                                                    grid.q_step + 1e-9)) + 1
                      : (grid.q_min <= grid.q_max ? 1 : 0);
  for (int i = 0; i < np; ++i)
    for (int j = 0; j < nq; ++j)
      points.emplace_back(grid.p_min + i * grid.p_step,
                          grid.q_min + j * grid.q_step);
  if (points.empty()) throw EmptyGrid("empty (p, q) search grid");

  BassFit best;
  best.rmse = std::numeric_limits<double>::infinity();
  for (const auto& [p, q] : points) {
    const Eigen::ArrayXd flow = bass_adoption({p, q, 0.0}, first, last);
    double sq = 0.0;
    int m = 0;
    for (const auto& [year, obs] : hist.ev_sales_share) {
      const double d = flow(year - first) - obs;
      sq += d * d;
      ++m;
    }
    const double rmse = std::sqrt(sq / m);
    if (rmse < best.rmse) {
      best.rmse = rmse;
      best.params = {p, q, 0.0};
    }
  }
  return best;
}

}  // namespace calibration
}  // namespace fleetcast
