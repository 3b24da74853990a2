#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hexb/frfft.hpp"
#include "hexb/model.hpp"
#include "hexb/talbot.hpp"
#include "hexb/wiener_hopf.hpp"

namespace hexb {

struct BarrierContract {
    enum class Kind { DownInDigital, DownInCall };
    Kind kind = Kind::DownInDigital;
    double barrier = 0.0;          // H, must sit below the spot
    double strike = 0.0;           // down-and-in call only
    std::vector<double> schedule;  // period lengths, matching the model
};

struct NumericalParams {
    int talbot_m = 6;       // digital default; use 7 for down-and-in calls
    int fft_n = 1024;
    double fft_delta = 0.25;
    double fft_x0 = 0.5;
    double damp_alpha = 0.75;
    int threads = 1;

    FrfftPlan plan() const { return FrfftPlan{fft_n, fft_delta, fft_x0, damp_alpha}; }
};

struct PriceAndGreeks {
    double price = 0.0;
    double delta = 0.0;
    double gamma = 0.0;
    std::string method;
    NumericalParams params;
};

// ---------------------------------------------------------------------------
// down-and-in digital
// ---------------------------------------------------------------------------

// Semi-analytic digital pricer. Factorizations depend only on the contour
// nodes, so one instance prices any number of spot/barrier combinations and
// their sensitivities off the same cache.
class DidPricer {
  public:
    DidPricer(const PiecewiseModel& m, int talbot_m = 6, int threads = 1,
              WhOptions opts = {});

    double price(double spot, double barrier) const;
    PriceAndGreeks greeks(double spot, double barrier) const;

    // Discounted-digital Laplace transform at unshifted rates q:
    // power p gives  e1' (Q-)^p e^{Q- x} 1 / prod(q_i + r),  x = log(spot/H).
    cplx transform(const Eigen::VectorXcd& q, double spot, double barrier,
                   int power) const;

  private:
    struct Node;
    const Node& node_at(const std::vector<cplx>& q) const;
    double invert(double spot, double barrier, int power) const;
    void warm_cache() const;

    PiecewiseModel model_;
    int talbot_m_;
    int threads_;
    WhOptions opts_;
    mutable std::map<std::vector<double>, std::shared_ptr<const Node>> cache_;
};

// ---------------------------------------------------------------------------
// down-and-in call
// ---------------------------------------------------------------------------

class DicPricer {
  public:
    DicPricer(const PiecewiseModel& m, double barrier, NumericalParams params,
              WhOptions opts = {});
    ~DicPricer();
    DicPricer(DicPricer&&) noexcept;
    DicPricer& operator=(DicPricer&&) noexcept;

    struct Curve {
        std::vector<double> log_strikes;  // k = log(K / S0)
        std::vector<double> price, delta, gamma;
    };

    // Prices and sensitivities on the whole log-strike lattice.
    const Curve& curve(double spot) const;

    // Interpolated single-strike result (shape-preserving cubic in k).
    PriceAndGreeks at_strike(double spot, double strike) const;

  private:
    struct Tuple;
    void build_tuples() const;

    PiecewiseModel model_;
    double barrier_;
    NumericalParams params_;
    WhOptions opts_;
    mutable std::vector<Tuple> tuples_;
    mutable bool freq_cache_on_ = false;
    mutable std::map<double, Curve> curves_;
};

// ---------------------------------------------------------------------------
// vanilla wrapper
// ---------------------------------------------------------------------------

// European call at maturity T_i (first num_periods periods); single-strike
// quadrature path. Validates the model first.
double european_call(const PiecewiseModel& m, int num_periods, double strike,
                     double damp_alpha = 0.75);

void require_valid(const PiecewiseModel& m);

}  // namespace hexb
