#pragma once

#include <string>

#include "hexb/model.hpp"

namespace hexb {

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Reads a model description. Drifts are always derived from the martingale
// condition; files carrying a "mu" field are rejected.
//
// Schema (JSON): r, d, spot, n_plus, n_minus, alpha_plus [], alpha_minus [],
// periods [{duration, sigma, pi_plus [], pi_minus []}].
PiecewiseModel load_model(const std::string& path);
PiecewiseModel parse_model(const std::string& json_text);

std::string model_to_json(const PiecewiseModel& m);
void save_model(const PiecewiseModel& m, const std::string& path);

}  // namespace hexb
