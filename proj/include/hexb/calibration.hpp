#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hexb/model.hpp"

namespace hexb {

struct MarketQuote {
    double maturity = 0.0;  // years
    double strike = 0.0;
    double price = 0.0;
    std::optional<double> implied_vol;
};

// CSV reader for `maturity,strike,price[,implied_vol]`. Parse failures carry
// the 1-based line number. Duplicate (maturity, strike) rows: last one wins,
// with a warning appended to `warnings` when provided.
std::vector<MarketQuote> load_quotes(const std::string& path,
                                     std::vector<std::string>* warnings = nullptr);
std::vector<MarketQuote> parse_quotes(const std::string& csv_text,
                                      std::vector<std::string>* warnings = nullptr);

struct CalibrationOptions {
    std::vector<double> schedule;     // period lengths (maturity differences)
    std::vector<double> alpha_minus;  // fixed jump rates
    std::vector<double> alpha_plus;   // fixed rates; fitted only when enabled
    bool fit_positive_jumps = false;
    double r = 0.0, d = 0.0, spot = 0.0;
    double damp_alpha = 0.75;

    // box constraints and local-search contract
    double sigma_lo = 1e-4, sigma_hi = 2.0;
    double pi_lo = 0.0, pi_hi = 100.0;
    int multistarts = 5;
    int max_iterations = 2000;
    double improvement_tol = 1e-8;
    std::uint64_t seed = 20070220;
};

struct MaturityTrace {
    double maturity = 0.0;
    double objective = 0.0;  // final per-maturity price RMSE
    int iterations = 0;
    bool converged = true;
};

struct CalibrationResult {
    PiecewiseModel model;
    double rmse = 0.0;
    double arpe = 0.0;
    std::vector<MaturityTrace> trace;
    std::vector<std::string> warnings;
    bool converged = true;
};

// Maturity-by-maturity bootstrap fit of (sigma, pi-) per period against
// European call quotes; earlier periods stay frozen.
CalibrationResult bootstrap_calibrate(const std::vector<MarketQuote>& quotes,
                                      const CalibrationOptions& opts);

// Price RMSE and average relative percentage error of a model against quotes.
std::pair<double, double> fit_metrics(const PiecewiseModel& m,
                                      const std::vector<MarketQuote>& quotes,
                                      double damp_alpha = 0.75);

}  // namespace hexb
