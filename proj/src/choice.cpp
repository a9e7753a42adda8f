#include "fleetcast/choice.hpp"

#include <cmath>

namespace fleetcast {

double utility(VehicleType v, int year, const ExogenousInputs& inputs,
               const LogitParams& params, double u) {
  const double cp_mean =
      0.5 * (inputs.cp(VehicleType::Thermal, year) +
             inputs.cp(VehicleType::Electric, year));
  const double co_mean =
      0.5 * (inputs.co(VehicleType::Thermal, year) +
             inputs.co(VehicleType::Electric, year));
  if (v == VehicleType::Thermal) {
    // Infrastructure coverage is complete and there is no availability
    // constraint, so only the cost terms remain.
    return params.p_purchase * inputs.cp(v, year) / cp_mean +
           params.p_operating * inputs.co(v, year) / co_mean;
  }
  const double base =
      params.p_purchase * (inputs.cp(v, year) - u) / cp_mean +
      params.p_operating * inputs.co(v, year) / co_mean +
      params.p_infrastructure * (1.0 - inputs.ci(year));
  return (1.0 - inputs.ca(year)) * base;
}

double ev_utility_slope(int year, const ExogenousInputs& inputs,
                        const LogitParams& params) {
  const double cp_mean =
      0.5 * (inputs.cp(VehicleType::Thermal, year) +
             inputs.cp(VehicleType::Electric, year));
  return -(1.0 - inputs.ca(year)) * params.p_purchase / cp_mean;
}

std::pair<double, double> logit_split(double u_thermal, double u_ev,
                                      double mu) {
  // Shift by the max scaled utility so the larger exponent is exactly 1.
  const double a = mu * u_thermal;
  const double b = mu * u_ev;
  const double m = a > b ? a : b;
  const double ea = std::exp(a - m);
  const double eb = std::exp(b - m);
  const double z = ea + eb;
  return {ea / z, eb / z};
}

double logit_split_gradient(double u_thermal, double u_ev, double mu,
                            double ev_slope) {
  const auto [p1, p2] = logit_split(u_thermal, u_ev, mu);
  return -mu * p1 * p2 * ev_slope;
}

Eigen::ArrayXd bass_adoption(const BassParams& params, int first_year,
                             int last_year) {
  if (first_year < kBassEpochYear)
    throw ValidationError("adoption series starts before the epoch year " +
                          std::to_string(kBassEpochYear));
  if (last_year < first_year)
    throw ValidationError("empty adoption year range");
  Eigen::ArrayXd flow(last_year - first_year + 1);
  double chi = params.chi0;
  for (int year = kBassEpochYear; year <= last_year; ++year) {
    const double f = (params.p + params.q * chi) * (1.0 - chi);
    if (year >= first_year) flow(year - first_year) = f;
    chi += f;  // explicit Euler, one-year step
  }
  return flow;
}

}  // namespace fleetcast
