#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hexb/model.hpp"
#include "hexb/pricing.hpp"

namespace hexb {

struct McConfig {
    std::int64_t paths = 200000;
    double dt = 1e-3;          // grid step, years
    std::uint64_t seed = 42;
    double bump = 0.01;        // relative spot bump for sensitivities
    bool antithetic = false;
    int threads = 1;
};

struct McEstimate {
    double mean = 0.0;
    double se = 0.0;
    double lo() const { return mean - 1.96 * se; }
    double hi() const { return mean + 1.96 * se; }
    bool covers(double v) const { return v >= lo() && v <= hi(); }
};

// Per-path summary of the log-price: grid-resolution running minimum and
// the terminal value. Path p is generated from its own substream, so the
// result is independent of the thread count.
struct PathStats {
    double min_x = 0.0;
    double x_end = 0.0;
};

std::vector<PathStats> simulate_min_and_terminal(const PiecewiseModel& m,
                                                 const McConfig& cfg);

McEstimate mc_did(const PiecewiseModel& m, const BarrierContract& c, const McConfig& cfg);
McEstimate mc_dic(const PiecewiseModel& m, const BarrierContract& c, const McConfig& cfg);
// European call at maturity T_i (first num_periods periods).
McEstimate mc_european(const PiecewiseModel& m, int num_periods, double strike,
                       const McConfig& cfg);

// Bump-and-revalue delta/gamma with common random numbers (the same path
// set is re-priced at bumped spots). Throws on a zero bump.
std::pair<McEstimate, McEstimate> mc_greeks(const PiecewiseModel& m,
                                            const BarrierContract& c,
                                            const McConfig& cfg);

}  // namespace hexb
