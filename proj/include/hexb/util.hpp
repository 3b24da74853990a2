#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

namespace hexb {

// Shape-preserving cubic interpolant (Fritsch-Carlson slopes). Knots must be
// strictly increasing. Evaluation outside the knot range is clamped-linear.
class MonotoneCubic {
  public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y);

    double operator()(double xq) const;

  private:
    std::vector<double> x_, y_, m_;  // knots, values, node slopes
};

// Runs fn(i) for i in [0, n). Deterministic output placement is the caller's
// job (write to slot i); chunks are only a scheduling detail.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace hexb
