#pragma once

#include <stdexcept>

namespace hexb {

// Raised when a numerical procedure cannot meet its accuracy contract
// (root counts, factorization residuals, inversion failures). Never used
// for bad user input.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace hexb
