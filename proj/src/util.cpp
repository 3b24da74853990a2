#include "hexb/util.hpp"

#include <atomic>

namespace hexb {

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const size_t n = x_.size();
    if (n < 2 || y_.size() != n)
        throw std::invalid_argument("interpolation needs >= 2 matching knots");
    for (size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1]))
            throw std::invalid_argument("interpolation knots must increase");

    std::vector<double> d(n - 1);  // secant slopes
    for (size_t i = 0; i + 1 < n; ++i)
        d[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);

    m_.resize(n);
    m_[0] = d[0];
    m_[n - 1] = d[n - 2];
    for (size_t i = 1; i + 1 < n; ++i)
        m_[i] = (d[i - 1] * d[i] > 0.0) ? 0.5 * (d[i - 1] + d[i]) : 0.0;

    // Fritsch-Carlson limiter keeps the interpolant from overshooting.
    for (size_t i = 0; i + 1 < n; ++i) {
        if (d[i] == 0.0) {
            m_[i] = m_[i + 1] = 0.0;
            continue;
        }
        const double a = m_[i] / d[i];
        const double b = m_[i + 1] / d[i];
        const double s = a * a + b * b;
        if (s > 9.0) {
            const double t = 3.0 / std::sqrt(s);
            m_[i] = t * a * d[i];
            m_[i + 1] = t * b * d[i];
        }
    }
}

double MonotoneCubic::operator()(double xq) const {
    if (xq <= x_.front())
        return y_.front() + m_.front() * (xq - x_.front());
    if (xq >= x_.back())
        return y_.back() + m_.back() * (xq - x_.back());
    const auto it = std::upper_bound(x_.begin(), x_.end(), xq);
    const size_t i = static_cast<size_t>(it - x_.begin()) - 1;
    const double h = x_[i + 1] - x_[i];
    const double t = (xq - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * y_[i] + h10 * h * m_[i] + h01 * y_[i + 1] + h11 * h * m_[i + 1];
}

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    const int workers = std::max(1, threads);
    if (workers == 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    const int spawned = static_cast<int>(std::min<std::size_t>(workers, n));
    pool.reserve(spawned - 1);
    for (int t = 1; t < spawned; ++t) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
}

}  // namespace hexb
