#pragma once

#include <vector>

#include "hexb/frfft.hpp"
#include "hexb/model.hpp"

namespace hexb {

// Damped-Fourier transform of the call price in log-strike at maturity
// T_i (first `num_periods` periods), excluding the e^{-alpha k} unwind:
// S0 e^{-r T_i} Phi(v - (alpha+1)i) / ((alpha + iv)(alpha + 1 + iv)).
cplx call_fourier_transform(const PiecewiseModel& m, int num_periods, double v,
                            double alpha);

// Single-strike European call by adaptive quadrature of the damped-Fourier
// representation. Used where grid interpolation error is unwanted
// (calibration objective, oracle comparisons).
double carr_madan_call(const PiecewiseModel& m, int num_periods, double strike,
                       double alpha = 0.75);

// Full strike curve on the plan's log-strike lattice.
struct CallCurve {
    std::vector<double> log_strikes;  // k = log(K / S0)
    std::vector<double> prices;
};
CallCurve carr_madan_call_curve(const PiecewiseModel& m, int num_periods,
                                const FrfftPlan& plan);

}  // namespace hexb
