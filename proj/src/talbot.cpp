#include "hexb/talbot.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "hexb/errors.hpp"

namespace hexb {

namespace {

TalbotGrid make_grid(int M) {
    if (M < 2) throw std::invalid_argument("Talbot precision parameter must be >= 2");
    TalbotGrid g;
    g.M = M;
    g.nodes.resize(M);
    g.weights.resize(M);
    g.nodes[0] = cplx(2.0 * M / 5.0, 0.0);
    g.weights[0] = 0.5 * std::exp(g.nodes[0]);
    const double pi = M_PI;
    for (int k = 1; k < M; ++k) {
        const double theta = k * pi / M;
        const double c = std::cos(theta) / std::sin(theta);
        g.nodes[k] = (2.0 * k * pi / 5.0) * cplx(c, 1.0);
        const cplx w(1.0, theta * (1.0 + c * c) - c);
        g.weights[k] = w * std::exp(g.nodes[k]);
    }
    return g;
}

struct Accumulator {
    const TalbotGrid& grid;
    const TransformFn& fhat;
    const std::vector<double>& T;
    bool fix_first;  // leave dimension 0 unconjugated (real-valued original)

    std::vector<cplx> q;       // scratch argument vector
    std::vector<int> idx;      // node multi-index
    cplx sum = 0.0;

    Accumulator(const TalbotGrid& g, const TransformFn& f, const std::vector<double>& t,
                bool fix)
        : grid(g), fhat(f), T(t), fix_first(fix), q(t.size()), idx(t.size(), 0) {}

    void run() {
        const int N = static_cast<int>(T.size());
        const int M = grid.M;
        for (;;) {
            // All conjugation patterns for the current node multi-index.
            const unsigned patterns = 1u << (fix_first ? N - 1 : N);
            for (unsigned c = 0; c < patterns; ++c) {
                const unsigned mask = fix_first ? (c << 1) : c;
                cplx w = 1.0;
                for (int n = 0; n < N; ++n) {
                    cplx node = grid.nodes[idx[n]];
                    cplx beta = grid.weights[idx[n]];
                    if (mask & (1u << n)) {
                        node = std::conj(node);
                        beta = std::conj(beta);
                    }
                    q[n] = node / T[n];
                    w *= beta;
                }
                const cplx val = fhat(q);
                if (!std::isfinite(val.real()) || !std::isfinite(val.imag())) {
                    std::ostringstream os;
                    os << "Laplace inversion failed: transform not finite at node (";
                    for (int n = 0; n < N; ++n)
                        os << q[n] << (n + 1 < N ? ", " : ")");
                    throw numerical_error(os.str());
                }
                sum += w * val;
            }
            // odometer over node indices
            int n = 0;
            while (n < N && ++idx[n] == M) idx[n++] = 0;
            if (n == N) break;
        }
    }
};

}  // namespace

const TalbotGrid& TalbotGrid::get(int M) {
    static std::mutex mu;
    static std::map<int, TalbotGrid> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(M);
    if (it == cache.end()) it = cache.emplace(M, make_grid(M)).first;
    return it->second;
}

double talbot_invert(const TransformFn& fhat, const std::vector<double>& T, int M) {
    if (T.empty()) throw std::invalid_argument("empty horizon vector");
    for (double t : T)
        if (!(t > 0.0)) throw std::invalid_argument("horizons must be positive");
    const TalbotGrid& grid = TalbotGrid::get(M);
    Accumulator acc(grid, fhat, T, /*fix_first=*/true);
    acc.run();
    double scale = 2.0;
    for (double t : T) scale /= 5.0 * t;
    return scale * acc.sum.real();
}

cplx talbot_invert_complex(const TransformFn& fhat, const std::vector<double>& T, int M) {
    if (T.empty()) throw std::invalid_argument("empty horizon vector");
    for (double t : T)
        if (!(t > 0.0)) throw std::invalid_argument("horizons must be positive");
    const TalbotGrid& grid = TalbotGrid::get(M);
    Accumulator acc(grid, fhat, T, /*fix_first=*/false);
    acc.run();
    cplx scale = 1.0;
    for (double t : T) scale /= 5.0 * t;
    return scale * acc.sum;
}

}  // namespace hexb
