#include "hexb/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "hexb/carr_madan.hpp"
#include "hexb/model_io.hpp"
#include "hexb/pricing.hpp"

namespace hexb {

namespace {

double uniform01(std::mt19937_64& g) {
    return (static_cast<double>(g() >> 11) + 0.5) * 0x1.0p-53;
}

// --- derivative-free local search -----------------------------------------
// Nelder-Mead on the unit box with clamping; convergence when a full cycle
// improves the best objective by less than `tol`.

struct SimplexResult {
    std::vector<double> x;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
};

template <typename F>
SimplexResult nelder_mead(const F& fn, std::vector<double> x0, int max_iter,
                          double tol) {
    const size_t d = x0.size();
    auto clamp01 = [](std::vector<double>& v) {
        for (double& t : v) t = std::clamp(t, 0.0, 1.0);
    };
    clamp01(x0);

    std::vector<std::vector<double>> pts(d + 1, x0);
    for (size_t j = 0; j < d; ++j) {
        pts[j + 1][j] += (x0[j] > 0.8 ? -0.15 : 0.15);
        clamp01(pts[j + 1]);
    }
    std::vector<double> fv(d + 1);
    for (size_t i = 0; i <= d; ++i) fv[i] = fn(pts[i]);

    SimplexResult res;
    double cycle_best = *std::min_element(fv.begin(), fv.end());
    const int cycle_len = static_cast<int>(2 * (d + 1));

    int it = 0;
    for (; it < max_iter; ++it) {
        // order
        std::vector<size_t> ord(d + 1);
        for (size_t i = 0; i <= d; ++i) ord[i] = i;
        std::sort(ord.begin(), ord.end(), [&](size_t a, size_t b) { return fv[a] < fv[b]; });
        const size_t best = ord[0], worst = ord[d], second = ord[d - 1];

        if (it % cycle_len == cycle_len - 1) {
            if (cycle_best - fv[best] < tol) {
                res.converged = true;
                break;
            }
            cycle_best = fv[best];
        }

        std::vector<double> centroid(d, 0.0);
        for (size_t i = 0; i <= d; ++i) {
            if (i == worst) continue;
            for (size_t j = 0; j < d; ++j) centroid[j] += pts[i][j];
        }
        for (double& c : centroid) c /= static_cast<double>(d);

        auto blend = [&](double t) {
            std::vector<double> p(d);
            for (size_t j = 0; j < d; ++j)
                p[j] = centroid[j] + t * (centroid[j] - pts[worst][j]);
            clamp01(p);
            return p;
        };

        auto refl = blend(1.0);
        const double f_refl = fn(refl);
        if (f_refl < fv[best]) {
            auto expa = blend(2.0);
            const double f_expa = fn(expa);
            if (f_expa < f_refl) {
                pts[worst] = expa;
                fv[worst] = f_expa;
            } else {
                pts[worst] = refl;
                fv[worst] = f_refl;
            }
        } else if (f_refl < fv[second]) {
            pts[worst] = refl;
            fv[worst] = f_refl;
        } else {
            auto contr = blend(f_refl < fv[worst] ? 0.5 : -0.5);
            const double f_contr = fn(contr);
            if (f_contr < std::min(f_refl, fv[worst])) {
                pts[worst] = contr;
                fv[worst] = f_contr;
            } else {
                for (size_t i = 0; i <= d; ++i) {
                    if (i == best) continue;
                    for (size_t j = 0; j < d; ++j)
                        pts[i][j] = pts[best][j] + 0.5 * (pts[i][j] - pts[best][j]);
                    fv[i] = fn(pts[i]);
                }
            }
        }
    }
    const size_t best =
        std::min_element(fv.begin(), fv.end()) - fv.begin();
    res.x = pts[best];
    res.f = fv[best];
    res.iterations = it;
    return res;
}

std::vector<double> split_csv_line(const std::string& line) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        size_t pos = 0;
        const double v = std::stod(cell, &pos);
        while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos])))
            ++pos;
        if (pos != cell.size()) throw std::invalid_argument("trailing characters");
        out.push_back(v);
    }
    return out;
}

}  // namespace

std::vector<MarketQuote> parse_quotes(const std::string& csv_text,
                                      std::vector<std::string>* warnings) {
    std::vector<MarketQuote> quotes;
    std::map<std::pair<double, double>, size_t> seen;
    std::istringstream in(csv_text);
    std::string line;
    int lineno = 0;
    bool header_done = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header_done) {
            if (line.rfind("maturity", 0) != 0)
                throw io_error("quote file line 1: expected header "
                               "'maturity,strike,price[,implied_vol]'");
            header_done = true;
            continue;
        }
        std::vector<double> cells;
        try {
            cells = split_csv_line(line);
        } catch (const std::exception&) {
            throw io_error("quote file line " + std::to_string(lineno) +
                           ": cannot parse");
        }
        if (cells.size() != 3 && cells.size() != 4)
            throw io_error("quote file line " + std::to_string(lineno) +
                           ": expected 3 or 4 columns");
        MarketQuote q;
        q.maturity = cells[0];
        q.strike = cells[1];
        q.price = cells[2];
        if (cells.size() == 4) q.implied_vol = cells[3];
        if (!(q.maturity > 0.0) || !(q.strike > 0.0) || !(q.price > 0.0))
            throw io_error("quote file line " + std::to_string(lineno) +
                           ": maturity, strike and price must be positive");

        const auto key = std::make_pair(q.maturity, q.strike);
        auto it = seen.find(key);
        if (it != seen.end()) {
            quotes[it->second] = q;  // last row wins
            if (warnings)
                warnings->push_back("duplicate quote at line " + std::to_string(lineno) +
                                    " replaces an earlier row");
        } else {
            seen[key] = quotes.size();
            quotes.push_back(q);
        }
    }
    if (!header_done) throw io_error("quote file is empty");
    return quotes;
}

std::vector<MarketQuote> load_quotes(const std::string& path,
                                     std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open quote file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_quotes(ss.str(), warnings);
}

std::pair<double, double> fit_metrics(const PiecewiseModel& m,
                                      const std::vector<MarketQuote>& quotes,
                                      double damp_alpha) {
    if (quotes.empty()) throw std::invalid_argument("no quotes");
    std::vector<double> maturities;
    for (int i = 1; i <= m.num_periods(); ++i) maturities.push_back(m.maturity(i));

    double se = 0.0, re = 0.0;
    for (const auto& q : quotes) {
        int idx = -1;
        for (size_t i = 0; i < maturities.size(); ++i)
            if (std::abs(maturities[i] - q.maturity) < 1e-9) idx = static_cast<int>(i);
        if (idx < 0)
            throw std::invalid_argument("quote maturity not on the model schedule");
        const double model_price = carr_madan_call(m, idx + 1, q.strike, damp_alpha);
        const double err = model_price - q.price;
        se += err * err;
        re += std::abs(err) / q.price;
    }
    const double n = static_cast<double>(quotes.size());
    return {std::sqrt(se / n), re / n};
}

CalibrationResult bootstrap_calibrate(const std::vector<MarketQuote>& quotes,
                                      const CalibrationOptions& opts) {
    if (opts.schedule.empty()) throw std::invalid_argument("empty schedule");
    if (!(opts.spot > 0.0)) throw std::invalid_argument("spot must be positive");
    const int N = static_cast<int>(opts.schedule.size());
    const int nm = static_cast<int>(opts.alpha_minus.size());
    const int np = static_cast<int>(opts.alpha_plus.size());
    if (opts.fit_positive_jumps && np == 0)
        throw std::invalid_argument("positive-jump fit requested without rates");

    std::vector<double> maturities(N);
    double acc = 0.0;
    for (int i = 0; i < N; ++i) {
        acc += opts.schedule[i];
        maturities[i] = acc;
    }

    // group by maturity
    std::vector<std::vector<MarketQuote>> by_mat(N);
    for (const auto& q : quotes) {
        int idx = -1;
        for (int i = 0; i < N; ++i)
            if (std::abs(maturities[i] - q.maturity) < 1e-9) idx = i;
        if (idx < 0)
            throw std::invalid_argument("quote maturity not on the schedule");
        by_mat[idx].push_back(q);
    }

    CalibrationResult result;
    const int n_free = 1 + nm + (opts.fit_positive_jumps ? np : 0);
    for (int i = 0; i < N; ++i) {
        if (static_cast<int>(by_mat[i].size()) < n_free)
            throw std::invalid_argument(
                "insufficient quotes at maturity " + std::to_string(maturities[i]) +
                ": need at least " + std::to_string(n_free));
        std::vector<MarketQuote> sorted = by_mat[i];
        std::sort(sorted.begin(), sorted.end(),
                  [](const MarketQuote& a, const MarketQuote& b) {
                      return a.strike < b.strike;
                  });
        for (size_t j = 1; j < sorted.size(); ++j)
            if (sorted[j].price > sorted[j - 1].price)
                result.warnings.push_back(
                    "quotes at maturity " + std::to_string(maturities[i]) +
                    " are not monotone in strike (possible arbitrage)");
    }

    PiecewiseModel model;
    model.r = opts.r;
    model.d = opts.d;
    model.spot = opts.spot;

    std::mt19937_64 rng(opts.seed);

    auto unpack = [&](const std::vector<double>& x, ModelPeriod& p) {
        p.sigma = opts.sigma_lo + x[0] * (opts.sigma_hi - opts.sigma_lo);
        for (int j = 0; j < nm; ++j)
            p.neg_jumps[j].intensity = opts.pi_lo + x[1 + j] * (opts.pi_hi - opts.pi_lo);
        if (opts.fit_positive_jumps)
            for (int j = 0; j < np; ++j)
                p.pos_jumps[j].intensity =
                    opts.pi_lo + x[1 + nm + j] * (opts.pi_hi - opts.pi_lo);
    };

    for (int i = 0; i < N; ++i) {
        ModelPeriod period;
        period.duration = opts.schedule[i];
        period.sigma = 0.2;
        for (int j = 0; j < np; ++j)
            period.pos_jumps.emplace_back(0.0, opts.alpha_plus[j]);
        for (int j = 0; j < nm; ++j)
            period.neg_jumps.emplace_back(0.0, opts.alpha_minus[j]);
        model.periods.push_back(period);

        const auto& mat_quotes = by_mat[i];
        auto objective = [&](const std::vector<double>& x) -> double {
            ModelPeriod& p = model.periods.back();
            unpack(x, p);
            p.mu = risk_neutral_drift(p, model.r, model.d);
            double se = 0.0;
            for (const auto& q : mat_quotes) {
                const double c = carr_madan_call(model, i + 1, q.strike, opts.damp_alpha);
                se += (c - q.price) * (c - q.price);
            }
            return std::sqrt(se / static_cast<double>(mat_quotes.size()));
        };

        SimplexResult best;
        best.f = std::numeric_limits<double>::infinity();
        for (int s = 0; s < opts.multistarts; ++s) {
            std::vector<double> x0(n_free);
            if (s == 0) {
                // deterministic start: moderate vol, light jumps
                x0[0] = (0.2 - opts.sigma_lo) / (opts.sigma_hi - opts.sigma_lo);
                for (int j = 1; j < n_free; ++j) x0[j] = 0.01;
            } else {
                x0[0] = 0.02 + 0.2 * uniform01(rng);
                for (int j = 1; j < n_free; ++j) x0[j] = 0.15 * uniform01(rng);
            }
            SimplexResult r = nelder_mead(objective, x0, opts.max_iterations,
                                          opts.improvement_tol);
            if (r.f < best.f) best = r;
        }

        ModelPeriod& p = model.periods.back();
        unpack(best.x, p);
        p.mu = risk_neutral_drift(p, model.r, model.d);

        MaturityTrace tr;
        tr.maturity = maturities[i];
        tr.objective = best.f;
        tr.iterations = best.iterations;
        tr.converged = best.converged;
        result.trace.push_back(tr);
        result.converged = result.converged && best.converged;
    }

    result.model = model;
    auto [rmse, arpe] = fit_metrics(model, quotes, opts.damp_alpha);
    result.rmse = rmse;
    result.arpe = arpe;
    return result;
}

}  // namespace hexb
