#include "hexb/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hexb/util.hpp"

namespace hexb {

namespace {

// --- random source ---------------------------------------------------------
// splitmix64-seeded xoshiro256++, one independent stream per path.

struct Rng {
    std::uint64_t s[4];

    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& si : s) {
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            si = z ^ (z >> 31);
        }
    }

    static std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }

    // uniform in (0, 1)
    double uniform() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    // Acklam's inverse-CDF approximation, |relative error| < 1.2e-9.
    double normal() {
        const double p = uniform();
        static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
        static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
        static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
        static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
        const double plow = 0.02425;
        if (p < plow) {
            const double q = std::sqrt(-2.0 * std::log(p));
            return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
                   ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
        }
        if (p > 1.0 - plow) {
            const double q = std::sqrt(-2.0 * std::log(1.0 - p));
            return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
                   ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
        }
        const double q = p - 0.5, r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }

    int poisson(double mean) {
        if (mean <= 0.0) return 0;
        const double limit = std::exp(-mean);
        int n = 0;
        double prod = uniform();
        while (prod > limit) {
            ++n;
            prod *= uniform();
        }
        return n;
    }
};

void check_config(const PiecewiseModel& m, const McConfig& cfg) {
    if (cfg.paths < 1) throw std::invalid_argument("need at least one path");
    double min_dur = m.periods.front().duration;
    for (const auto& p : m.periods) min_dur = std::min(min_dur, p.duration);
    if (!(cfg.dt > 0.0) || cfg.dt > min_dur)
        throw std::invalid_argument("grid step must lie in (0, min period duration]");
}

PathStats run_path(const PiecewiseModel& m, const McConfig& cfg, std::uint64_t path,
                   bool flip_gaussians) {
    Rng rng(cfg.seed ^ (0x5851f42d4c957f2dULL * (path + 1)));
    const double zsign = flip_gaussians ? -1.0 : 1.0;

    double x = 0.0, xmin = 0.0;
    for (const auto& p : m.periods) {
        const int steps = std::max<int>(1, static_cast<int>(std::lround(p.duration / cfg.dt)));
        const double dt = p.duration / steps;
        const double drift = p.mu * dt;
        const double vol = p.sigma * std::sqrt(dt);
        for (int s = 0; s < steps; ++s) {
            double dx = drift + vol * zsign * rng.normal();
            for (const auto& f : p.pos_jumps) {
                const int n = rng.poisson(f.intensity * dt);
                for (int j = 0; j < n; ++j) dx += rng.exponential(f.rate);
            }
            for (const auto& f : p.neg_jumps) {
                const int n = rng.poisson(f.intensity * dt);
                for (int j = 0; j < n; ++j) dx -= rng.exponential(f.rate);
            }
            x += dx;
            xmin = std::min(xmin, x);
        }
    }
    return {xmin, x};
}

McEstimate summarize(const std::vector<double>& payoffs) {
    const double n = static_cast<double>(payoffs.size());
    double sum = 0.0;
    for (double v : payoffs) sum += v;
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : payoffs) ss += (v - mean) * (v - mean);
    McEstimate e;
    e.mean = mean;
    e.se = payoffs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return e;
}

void check_contract(const PiecewiseModel& m, const BarrierContract& c) {
    if (c.schedule.size() != m.periods.size())
        throw std::invalid_argument("contract schedule must match the model periods");
    for (size_t i = 0; i < c.schedule.size(); ++i)
        if (std::abs(c.schedule[i] - m.periods[i].duration) > 1e-9)
            throw std::invalid_argument("contract schedule must match the model periods");
    if (!(c.barrier > 0.0) || !(c.barrier < m.spot))
        throw std::invalid_argument("down-type contract needs 0 < barrier < spot");
}

}  // namespace

std::vector<PathStats> simulate_min_and_terminal(const PiecewiseModel& m,
                                                 const McConfig& cfg) {
    require_valid(m);
    check_config(m, cfg);
    std::vector<PathStats> stats(cfg.paths);
    parallel_for(static_cast<size_t>(cfg.paths), cfg.threads, [&](size_t p) {
        if (cfg.antithetic) {
            // paths are mirrored in pairs off a shared substream
            stats[p] = run_path(m, cfg, static_cast<std::uint64_t>(p / 2), p % 2 == 1);
        } else {
            stats[p] = run_path(m, cfg, static_cast<std::uint64_t>(p), false);
        }
    });
    return stats;
}

McEstimate mc_did(const PiecewiseModel& m, const BarrierContract& c,
                  const McConfig& cfg) {
    check_contract(m, c);
    const auto stats = simulate_min_and_terminal(m, cfg);
    const double h = std::log(c.barrier / m.spot);
    const double disc = std::exp(-m.r * m.total_maturity());
    std::vector<double> payoff(stats.size());
    for (size_t i = 0; i < stats.size(); ++i)
        payoff[i] = stats[i].min_x < h ? disc : 0.0;
    return summarize(payoff);
}

McEstimate mc_dic(const PiecewiseModel& m, const BarrierContract& c,
                  const McConfig& cfg) {
    check_contract(m, c);
    if (!(c.strike > 0.0)) throw std::invalid_argument("strike must be positive");
    const auto stats = simulate_min_and_terminal(m, cfg);
    const double h = std::log(c.barrier / m.spot);
    const double k = std::log(c.strike / m.spot);
    const double disc = std::exp(-m.r * m.total_maturity());
    std::vector<double> payoff(stats.size());
    for (size_t i = 0; i < stats.size(); ++i) {
        const bool hit = stats[i].min_x < h;
        payoff[i] =
            hit ? disc * m.spot * std::max(std::exp(stats[i].x_end) - std::exp(k), 0.0)
                : 0.0;
    }
    return summarize(payoff);
}

McEstimate mc_european(const PiecewiseModel& m, int num_periods, double strike,
                       const McConfig& cfg) {
    if (num_periods < 1 || num_periods > m.num_periods())
        throw std::invalid_argument("maturity index out of range");
    if (!(strike > 0.0)) throw std::invalid_argument("strike must be positive");
    PiecewiseModel sub = m;
    sub.periods.resize(num_periods);
    const auto stats = simulate_min_and_terminal(sub, cfg);
    const double disc = std::exp(-m.r * sub.total_maturity());
    std::vector<double> payoff(stats.size());
    for (size_t i = 0; i < stats.size(); ++i)
        payoff[i] = disc * std::max(m.spot * std::exp(stats[i].x_end) - strike, 0.0);
    return summarize(payoff);
}

std::pair<McEstimate, McEstimate> mc_greeks(const PiecewiseModel& m,
                                            const BarrierContract& c,
                                            const McConfig& cfg) {
    check_contract(m, c);
    if (!(cfg.bump > 0.0))
        throw std::invalid_argument("sensitivity bump must be positive");
    const auto stats = simulate_min_and_terminal(m, cfg);
    const double disc = std::exp(-m.r * m.total_maturity());
    const double dS = cfg.bump * m.spot;

    // X does not depend on the spot, so bumped payoffs reuse the same paths:
    // only the log-barrier (and log-strike) move.
    auto payoff_at = [&](const PathStats& st, double spot) -> double {
        const double h = std::log(c.barrier / spot);
        if (!(st.min_x < h)) return 0.0;
        if (c.kind == BarrierContract::Kind::DownInDigital) return disc;
        return disc * std::max(spot * std::exp(st.x_end) - c.strike, 0.0);
    };

    std::vector<double> delta_s(stats.size()), gamma_s(stats.size());
    for (size_t i = 0; i < stats.size(); ++i) {
        const double up = payoff_at(stats[i], m.spot + dS);
        const double mid = payoff_at(stats[i], m.spot);
        const double dn = payoff_at(stats[i], m.spot - dS);
        delta_s[i] = (up - dn) / (2.0 * dS);
        gamma_s[i] = (up - 2.0 * mid + dn) / (dS * dS);
    }
    return {summarize(delta_s), summarize(gamma_s)};
}

}  // namespace hexb
