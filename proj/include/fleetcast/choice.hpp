#pragma once

#include <utility>

#include "fleetcast/types.hpp"

namespace fleetcast {

// Binary purchase-choice model for new registrations.  Costs enter relative
// to the mean un-incentivized cost of both powertrains in the same year; the
// purchase incentive u (k EUR) lowers the electric purchase price only.

// Systematic utility of one alternative.  u is ignored for Thermal.
double utility(VehicleType v, int year, const ExogenousInputs& inputs,
               const LogitParams& params, double u);

// d U_ev / d u at the given year (does not depend on u itself).
double ev_utility_slope(int year, const ExogenousInputs& inputs,
                        const LogitParams& params);

// Overflow-safe logit shares (P_thermal, P_ev); exact simplex by construction.
std::pair<double, double> logit_split(double u_thermal, double u_ev, double mu);

// d P_thermal / d u given the utility slope of the electric alternative.
double logit_split_gradient(double u_thermal, double u_ev, double mu,
                            double ev_slope);

// Adoption share per year from the diffusion ODE, integrated with explicit
// Euler steps of one year starting at the epoch.  Requires
// first_year >= kBassEpochYear and returns the flow for
// [first_year, last_year] inclusive.
Eigen::ArrayXd bass_adoption(const BassParams& params, int first_year,
                             int last_year);

}  // namespace fleetcast
