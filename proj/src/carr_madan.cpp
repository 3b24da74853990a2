#include "hexb/carr_madan.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace hexb {

namespace {

void check_dampening(const PiecewiseModel& m, double alpha) {
    if (!(alpha > 0.0)) throw std::domain_error("dampening rate must be positive");
    for (const auto& p : m.periods)
        for (const auto& f : p.pos_jumps)
            if (alpha + 1.0 >= f.rate)
                throw std::domain_error(
                    "dampened payoff not integrable: alpha + 1 must be below the "
                    "smallest positive jump rate");
}

// Conservative truncation point: beyond it the Gaussian part alone damps
// the integrand under 1e-16 relative.
double truncation_frequency(const PiecewiseModel& m, int num_periods) {
    double var = 0.0;
    for (int j = 0; j < num_periods; ++j) {
        const auto& p = m.periods[j];
        var += p.sigma * p.sigma * p.duration;
    }
    const double v = std::sqrt(2.0 * 40.0 / var);
    return std::clamp(v, 100.0, 20000.0);
}

}  // namespace

cplx call_fourier_transform(const PiecewiseModel& m, int num_periods, double v,
                            double alpha) {
    const double T = m.maturity(num_periods);
    const cplx u(v, -(alpha + 1.0));
    const cplx phi = char_fn_cumulative(m, num_periods, u);
    const cplx den = cplx(alpha, v) * cplx(alpha + 1.0, v);
    return m.spot * std::exp(-m.r * T) * phi / den;
}

double carr_madan_call(const PiecewiseModel& m, int num_periods, double strike,
                       double alpha) {
    if (!(strike > 0.0)) throw std::domain_error("strike must be positive");
    check_dampening(m, alpha);
    const double k = std::log(strike / m.spot);
    const double vmax = truncation_frequency(m, num_periods);

    auto integrand = [&](double v) {
        const cplx kernel(std::cos(v * k), -std::sin(v * k));
        return (kernel * call_fourier_transform(m, num_periods, v, alpha)).real();
    };
    using boost::math::quadrature::gauss_kronrod;
    const double integral =
        gauss_kronrod<double, 15>::integrate(integrand, 0.0, vmax, 12, 1e-10);
    return std::exp(-alpha * k) * integral / M_PI;
}

CallCurve carr_madan_call_curve(const PiecewiseModel& m, int num_periods,
                                const FrfftPlan& plan) {
    check_dampening(m, plan.alpha);
    std::vector<cplx> f(plan.N);
    for (int j = 0; j < plan.N; ++j)
        f[j] = call_fourier_transform(m, num_periods, plan.freq(j), plan.alpha);

    CallCurve curve;
    curve.prices = invert_damped_fourier(plan, f);
    curve.log_strikes.resize(plan.N);
    for (int j = 0; j < plan.N; ++j) curve.log_strikes[j] = plan.strike_log(j);
    return curve;
}

}  // namespace hexb
