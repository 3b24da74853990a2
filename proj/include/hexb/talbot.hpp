#pragma once

#include <functional>
#include <vector>

#include "hexb/model.hpp"

namespace hexb {

// Fixed-contour Talbot quadrature nodes and weights for one dimension.
// Everything depends on M only; the per-dimension horizon enters through
// the q_k / T scaling at evaluation time.
struct TalbotGrid {
    int M = 0;
    std::vector<cplx> nodes;    // q_0 = 2M/5, q_k = (2 k pi / 5)(cot(k pi / M) + i)
    std::vector<cplx> weights;  // beta_0 = e^{q_0}/2, beta_k per the fixed-Talbot rule

    static const TalbotGrid& get(int M);  // cached, thread-safe
};

using TransformFn = std::function<cplx(const std::vector<cplx>& q)>;

// Multi-dimensional Talbot inversion of a Laplace transform at horizons T.
// The transform must be analytic to the right of (and on) the scaled Talbot
// contours. `invert` assumes a real-valued original and halves the work via
// conjugate pairing; `invert_complex` sums every conjugation pattern and is
// valid for complex-valued originals (Fourier slices).
//
// Expected relative accuracy is roughly 10^(-0.6 M) per the usual fixed-
// Talbot calibration.
double talbot_invert(const TransformFn& fhat, const std::vector<double>& T, int M);
cplx talbot_invert_complex(const TransformFn& fhat, const std::vector<double>& T, int M);

}  // namespace hexb
