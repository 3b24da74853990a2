#pragma once

#include <cstdint>
#include <random>

#include "hexb/model.hpp"

namespace fixtures {

// The four-period additive model fitted in the reference experiments:
// alpha- = (3, 10), r = 3%, no dividends, spot 4150, negative jumps only.
inline hexb::PiecewiseModel table1_model() {
    hexb::PiecewiseModel m;
    m.r = 0.03;
    m.d = 0.0;
    m.spot = 4150.0;
    const double sig[] = {0.0995, 0.0759, 0.0786, 0.0858};
    const double pi1[] = {0.0371, 0.2091, 0.4738, 0.8084};
    const double pi2[] = {11.1819, 9.9540, 7.0322, 0.2361};
    const double dur[] = {0.5, 0.5, 2.0, 2.0};
    for (int i = 0; i < 4; ++i) {
        hexb::ModelPeriod p;
        p.duration = dur[i];
        p.sigma = sig[i];
        p.neg_jumps = {{pi1[i], 3.0}, {pi2[i], 10.0}};
        m.periods.push_back(p);
    }
    hexb::apply_risk_neutral_drift(m);
    return m;
}

// Single-period constant-parameter fit over the same five years.
inline hexb::PiecewiseModel levy_model() {
    hexb::PiecewiseModel m;
    m.r = 0.03;
    m.d = 0.0;
    m.spot = 4150.0;
    hexb::ModelPeriod p;
    p.duration = 5.0;
    p.sigma = 0.1171;
    p.neg_jumps = {{0.5693, 3.0}, {0.0165, 10.0}};
    m.periods.push_back(p);
    hexb::apply_risk_neutral_drift(m);
    return m;
}

inline hexb::PiecewiseModel brownian_model(double sigma, double T, double r,
                                           double d = 0.0, double spot = 100.0) {
    hexb::PiecewiseModel m;
    m.r = r;
    m.d = d;
    m.spot = spot;
    hexb::ModelPeriod p;
    p.duration = T;
    p.sigma = sigma;
    m.periods.push_back(p);
    hexb::apply_risk_neutral_drift(m);
    return m;
}

inline hexb::PiecewiseModel kou_model(double sigma, double T, double pi_up,
                                      double a_up, double pi_dn, double a_dn,
                                      double r = 0.03, double spot = 100.0) {
    hexb::PiecewiseModel m;
    m.r = r;
    m.d = 0.0;
    m.spot = spot;
    hexb::ModelPeriod p;
    p.duration = T;
    p.sigma = sigma;
    p.pos_jumps = {{pi_up, a_up}};
    p.neg_jumps = {{pi_dn, a_dn}};
    m.periods.push_back(p);
    hexb::apply_risk_neutral_drift(m);
    return m;
}

// Random valid model for property sweeps: N periods, n_plus/n_minus jump
// families with well-separated rates.
inline hexb::PiecewiseModel random_model(std::mt19937_64& rng, int N, int n_plus,
                                         int n_minus) {
    auto u = [&rng](double lo, double hi) {
        const double t = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
        return lo + t * (hi - lo);
    };
    hexb::PiecewiseModel m;
    m.r = u(0.0, 0.06);
    m.d = u(0.0, 0.03);
    m.spot = u(50.0, 5000.0);

    std::vector<double> a_plus, a_minus;
    for (int k = 0; k < n_plus; ++k)
        a_plus.push_back(1.5 + 2.5 * k + u(0.0, 1.5));
    for (int k = 0; k < n_minus; ++k)
        a_minus.push_back(0.8 + 2.5 * k + u(0.0, 1.5));

    for (int i = 0; i < N; ++i) {
        hexb::ModelPeriod p;
        p.duration = u(0.25, 2.0);
        p.sigma = u(0.08, 0.45);
        for (int k = 0; k < n_plus; ++k)
            p.pos_jumps.push_back({u(0.0, 3.0), a_plus[k]});
        for (int k = 0; k < n_minus; ++k)
            p.neg_jumps.push_back({u(0.0, 3.0), a_minus[k]});
        m.periods.push_back(p);
    }
    hexb::apply_risk_neutral_drift(m);
    return m;
}

inline std::vector<hexb::cplx> random_rates(std::mt19937_64& rng, int N,
                                            bool complex_ok) {
    auto u = [&rng](double lo, double hi) {
        const double t = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
        return lo + t * (hi - lo);
    };
    std::vector<hexb::cplx> q(N);
    for (int i = 0; i < N; ++i)
        q[i] = complex_ok ? hexb::cplx(u(-4.0, 8.0), u(0.5, 9.0))
                          : hexb::cplx(u(0.2, 10.0), 0.0);
    return q;
}

}  // namespace fixtures
