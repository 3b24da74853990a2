#pragma once

#include <vector>

#include "hexb/model.hpp"

namespace hexb {

// Fractional DFT G_m = sum_j x_j exp(-2 pi i j m nu), m = 0..N-1, for
// arbitrary real step nu, computed with the Bailey-Swarztrauber circular
// convolution over three length-2N FFTs. N must be a power of two.
std::vector<cplx> frfft(const std::vector<cplx>& x, double nu);

// Lattice bookkeeping for the damped-Fourier strike inversion: frequency
// grid v_j = delta*j, log-strike grid k_m = -x0 + m*lambda.
struct FrfftPlan {
    int N = 1024;          // grid size, power of two
    double delta = 0.25;   // frequency step
    double x0 = 0.5;       // log-strike half-range
    double alpha = 0.75;   // payoff dampening rate

    double lambda() const { return 2.0 * x0 / N; }
    double nu() const { return delta * x0 / (N * M_PI); }
    double strike_log(int m) const { return -x0 + m * lambda(); }
    double freq(int j) const { return delta * j; }
    double trapezoid_weight(int j) const {
        return (j == 0 || j == N - 1) ? 0.5 : 1.0;
    }
    void validate() const;
};

// Inverts a half-line damped Fourier transform on the plan's strike grid:
// out[m] = (e^{-alpha k_m} / pi) * Re sum_j w_j e^{-i v_j k_m} f(v_j) delta.
std::vector<double> invert_damped_fourier(const FrfftPlan& plan,
                                          const std::vector<cplx>& f_values);

}  // namespace hexb
