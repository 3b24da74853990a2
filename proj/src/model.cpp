#include "hexb/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hexb {

namespace {
constexpr double kAlphaPlusFloor = 1.0 + 1e-9;  // finiteness of E[exp(X)]
constexpr double kAlphaGap = 1e-9;              // distinct-roots requirement
constexpr double kMartingaleTol = 1e-12;
}  // namespace

double ModelPeriod::lambda_plus() const {
    double s = 0.0;
    for (const auto& f : pos_jumps) s += f.intensity;
    return s;
}

double ModelPeriod::lambda_minus() const {
    double s = 0.0;
    for (const auto& f : neg_jumps) s += f.intensity;
    return s;
}

int PiecewiseModel::n_plus() const {
    return periods.empty() ? 0 : static_cast<int>(periods.front().pos_jumps.size());
}

int PiecewiseModel::n_minus() const {
    return periods.empty() ? 0 : static_cast<int>(periods.front().neg_jumps.size());
}

double PiecewiseModel::maturity(int i) const {
    double t = 0.0;
    for (int j = 0; j < i && j < num_periods(); ++j) t += periods[j].duration;
    return t;
}

double PiecewiseModel::total_maturity() const { return maturity(num_periods()); }

std::vector<double> PiecewiseModel::schedule() const {
    std::vector<double> s;
    s.reserve(periods.size());
    for (const auto& p : periods) s.push_back(p.duration);
    return s;
}

ValidationReport validate_model(const PiecewiseModel& m) {
    ValidationReport rep;
    auto add = [&rep](const std::string& msg) { rep.violations.push_back(msg); };

    if (m.periods.empty()) {
        add("model must have at least one period");
        return rep;
    }
    if (!(m.spot > 0.0)) add("spot must be positive");

    const int np = m.n_plus();
    const int nm = m.n_minus();
    for (int i = 0; i < m.num_periods(); ++i) {
        const auto& p = m.periods[i];
        const std::string tag = "period " + std::to_string(i + 1) + ": ";
        if (!(p.duration > 0.0)) add(tag + "duration must be positive");
        if (!(p.sigma > 0.0)) add(tag + "sigma must be positive");
        if (static_cast<int>(p.pos_jumps.size()) != np ||
            static_cast<int>(p.neg_jumps.size()) != nm)
            add(tag + "jump family counts must match across periods");
        for (const auto& f : p.pos_jumps) {
            if (f.intensity < 0.0) add(tag + "negative jump intensity");
            if (!(f.rate > kAlphaPlusFloor))
                add(tag + "positive jump rates must exceed 1");
        }
        for (const auto& f : p.neg_jumps) {
            if (f.intensity < 0.0) add(tag + "negative jump intensity");
            if (!(f.rate > 0.0)) add(tag + "negative jump rates must be positive");
        }
        auto check_distinct = [&](const std::vector<JumpFamily>& fams, const char* side) {
            for (size_t a = 0; a < fams.size(); ++a)
                for (size_t b = a + 1; b < fams.size(); ++b)
                    if (std::abs(fams[a].rate - fams[b].rate) <= kAlphaGap)
                        add(tag + std::string("duplicate jump rates (") + side + ")");
        };
        check_distinct(p.pos_jumps, "positive");
        check_distinct(p.neg_jumps, "negative");

        // Martingale condition; only meaningful once the structure is sound.
        bool structurally_ok = p.sigma > 0.0;
        for (const auto& f : p.pos_jumps) structurally_ok &= f.rate > kAlphaPlusFloor;
        for (const auto& f : p.neg_jumps) structurally_ok &= f.rate > 0.0;
        if (structurally_ok) {
            const double mu = risk_neutral_drift(p, m.r, m.d);
            if (std::abs(p.mu - mu) > kMartingaleTol * (1.0 + std::abs(mu)))
                add(tag + "drift violates the martingale condition");
        }
    }
    return rep;
}

double risk_neutral_drift(const ModelPeriod& p, double r, double d) {
    double jump_comp = 0.0;
    for (const auto& f : p.pos_jumps) {
        if (f.rate <= 1.0)
            throw std::domain_error(
                "positive jump rate <= 1: exponential moment is infinite");
        jump_comp += f.intensity / (f.rate - 1.0);
    }
    for (const auto& f : p.neg_jumps) jump_comp -= f.intensity / (f.rate + 1.0);
    return r - d - 0.5 * p.sigma * p.sigma - jump_comp;
}

void apply_risk_neutral_drift(PiecewiseModel& m) {
    for (auto& p : m.periods) p.mu = risk_neutral_drift(p, m.r, m.d);
}

cplx char_exponent(const ModelPeriod& p, cplx u) {
    const cplx iu = cplx(0.0, 1.0) * u;
    cplx val = p.mu * iu + 0.5 * p.sigma * p.sigma * (iu * iu);
    for (const auto& f : p.pos_jumps) {
        const cplx den = f.rate - iu;
        if (std::abs(den) <= 1e-12 * (1.0 + f.rate))
            throw std::domain_error("characteristic exponent evaluated at a pole");
        val += f.intensity * iu / den;
    }
    for (const auto& f : p.neg_jumps) {
        const cplx den = f.rate + iu;
        if (std::abs(den) <= 1e-12 * (1.0 + f.rate))
            throw std::domain_error("characteristic exponent evaluated at a pole");
        val -= f.intensity * iu / den;
    }
    return val;
}

cplx laplace_exponent(const ModelPeriod& p, cplx s) {
    cplx val = p.mu * s + 0.5 * p.sigma * p.sigma * s * s;
    for (const auto& f : p.pos_jumps) {
        const cplx den = f.rate - s;
        if (std::abs(den) <= 1e-13 * (1.0 + f.rate))
            throw std::domain_error("exponent evaluated at a pole");
        val += f.intensity * s / den;
    }
    for (const auto& f : p.neg_jumps) {
        const cplx den = f.rate + s;
        if (std::abs(den) <= 1e-13 * (1.0 + f.rate))
            throw std::domain_error("exponent evaluated at a pole");
        val -= f.intensity * s / den;
    }
    return val;
}

double laplace_exponent(const ModelPeriod& p, double s) {
    double val = p.mu * s + 0.5 * p.sigma * p.sigma * s * s;
    for (const auto& f : p.pos_jumps) val += f.intensity * s / (f.rate - s);
    for (const auto& f : p.neg_jumps) val -= f.intensity * s / (f.rate + s);
    return val;
}

cplx laplace_exponent_deriv(const ModelPeriod& p, cplx s) {
    cplx val = p.mu + p.sigma * p.sigma * s;
    for (const auto& f : p.pos_jumps) {
        const cplx den = f.rate - s;
        val += f.intensity * f.rate / (den * den);
    }
    for (const auto& f : p.neg_jumps) {
        const cplx den = f.rate + s;
        val -= f.intensity * (-f.rate) / (den * den);
    }
    return val;
}

cplx char_fn_cumulative(const PiecewiseModel& m, int num_periods, cplx u) {
    if (num_periods < 1 || num_periods > m.num_periods())
        throw std::invalid_argument("maturity index out of range");
    cplx expo = 0.0;
    for (int j = 0; j < num_periods; ++j)
        expo += m.periods[j].duration * char_exponent(m.periods[j], u);
    return std::exp(expo);
}

double levy_density(const ModelPeriod& p, double x) {
    if (x == 0.0) throw std::domain_error("jump density undefined at 0");
    double g = 0.0;
    if (x > 0.0) {
        for (const auto& f : p.pos_jumps)
            g += f.intensity * f.rate * std::exp(-f.rate * x);
    } else {
        for (const auto& f : p.neg_jumps)
            g += f.intensity * f.rate * std::exp(-f.rate * (-x));
    }
    return g;
}

PiecewiseModel mirrored(const PiecewiseModel& m) {
    PiecewiseModel out = m;
    for (auto& p : out.periods) {
        p.mu = -p.mu;
        std::swap(p.pos_jumps, p.neg_jumps);
    }
    return out;
}

PiecewiseModel truncate_to_schedule(const PiecewiseModel& m,
                                    const std::vector<double>& schedule) {
    if (schedule.empty() || schedule.size() > m.periods.size())
        throw std::invalid_argument("schedule length must be in [1, model periods]");
    PiecewiseModel out = m;
    out.periods.resize(schedule.size());
    for (size_t i = 0; i < schedule.size(); ++i) {
        if (std::abs(out.periods[i].duration - schedule[i]) > 1e-9)
            throw std::invalid_argument(
                "schedule does not match the model period durations");
    }
    return out;
}

}  // namespace hexb
