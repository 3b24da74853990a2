#include <doctest.h>

#include <cmath>
#include <random>

#include "hexb/carr_madan.hpp"
#include "hexb/errors.hpp"
#include "hexb/frfft.hpp"
#include "hexb/talbot.hpp"
#include "oracles.hpp"
#include "test_fixtures.hpp"

using hexb::cplx;

TEST_SUITE_BEGIN("transforms");

// ---------------------------------------------------------------------------
// Talbot
// ---------------------------------------------------------------------------

TEST_CASE("talbot nodes and weights reproduce the fixed-contour rule") {
    const auto& g = hexb::TalbotGrid::get(6);
    CHECK(g.nodes[0] == cplx(12.0 / 5.0, 0.0));
    CHECK(g.weights[0] == 0.5 * std::exp(g.nodes[0]));
    const double theta = 2.0 * M_PI / 6.0;
    const double c = std::cos(theta) / std::sin(theta);
    CHECK(std::abs(g.nodes[2] - (4.0 * M_PI / 5.0) * cplx(c, 1.0)) < 1e-15);
    const cplx w(1.0, theta * (1.0 + c * c) - c);
    CHECK(std::abs(g.weights[2] - w * std::exp(g.nodes[2])) < 1e-12);
}

TEST_CASE("talbot inverts the transform of the constant one") {
    // The fixed contour is not exact on 1/q; the error follows the usual
    // 10^(-0.6M) calibration independently of the horizons.
    for (int N = 1; N <= 4; ++N) {
        std::vector<double> T;
        for (int n = 0; n < N; ++n) T.push_back(0.4 + 0.9 * n);
        auto fhat = [](const std::vector<cplx>& q) {
            cplx v = 1.0;
            for (cplx qi : q) v /= qi;
            return v;
        };
        for (int M : {3, 6, 9})
            CHECK(std::abs(hexb::talbot_invert(fhat, T, M) - 1.0) <
                  std::pow(10.0, -0.6 * M + 1.0));
        CHECK(std::abs(hexb::talbot_invert(fhat, T, 16) - 1.0) < 1e-9);
    }
}

TEST_CASE("talbot accuracy on known inverses tracks the precision parameter") {
    for (int M = 4; M <= 10; ++M) {
        const double tol = std::pow(10.0, -0.6 * M + 1.0);

        // 1/(q+a) -> exp(-a t)
        for (double t : {0.5, 2.0}) {
            auto fhat = [](const std::vector<cplx>& q) { return 1.0 / (q[0] + 1.0); };
            const double got = hexb::talbot_invert(fhat, {t}, M);
            CHECK(std::abs(got - std::exp(-t)) / std::exp(-t) < tol);
        }
        // 1/q^2 -> t
        for (double t : {0.7, 1.9}) {
            auto fhat = [](const std::vector<cplx>& q) { return 1.0 / (q[0] * q[0]); };
            CHECK(std::abs(hexb::talbot_invert(fhat, {t}, M) - t) / t < tol);
        }
        // q/(q^2+1) -> cos t, away from the zeros of cos
        for (double t : {0.3, 1.1}) {
            auto fhat = [](const std::vector<cplx>& q) {
                return q[0] / (q[0] * q[0] + 1.0);
            };
            CHECK(std::abs(hexb::talbot_invert(fhat, {t}, M) - std::cos(t)) /
                      std::abs(std::cos(t)) <
                  tol);
        }
        // 2-d separable product
        {
            auto fhat = [](const std::vector<cplx>& q) {
                return 1.0 / ((q[0] + 0.8) * (q[1] + 1.6));
            };
            const double expected = std::exp(-0.8 * 1.2 - 1.6 * 0.6);
            const double got = hexb::talbot_invert(fhat, {1.2, 0.6}, M);
            CHECK(std::abs(got - expected) / expected < tol);
        }
    }
}

TEST_CASE("complex-valued inversion handles oscillatory originals") {
    // 1/(q - i w) -> exp(i w t)
    const double w = 1.7, t = 0.9;
    auto fhat = [w](const std::vector<cplx>& q) { return 1.0 / (q[0] - cplx(0, w)); };
    const cplx got = hexb::talbot_invert_complex(fhat, {t}, 8);
    const cplx expected = std::exp(cplx(0.0, w * t));
    CHECK(std::abs(got - expected) < 1e-4);

    // 2-d: product of a decaying and an oscillatory factor
    auto fhat2 = [w](const std::vector<cplx>& q) {
        return 1.0 / ((q[0] - cplx(0, w)) * (q[1] + 0.5));
    };
    const cplx got2 = hexb::talbot_invert_complex(fhat2, {t, 1.3}, 8);
    const cplx expected2 = std::exp(cplx(0.0, w * t)) * std::exp(-0.5 * 1.3);
    CHECK(std::abs(got2 - expected2) < 1e-4);
}

TEST_CASE("talbot reports the offending node on a non-finite transform") {
    auto fhat = [](const std::vector<cplx>& q) {
        return cplx(std::numeric_limits<double>::quiet_NaN(), 0.0) + q[0];
    };
    CHECK_THROWS_AS(hexb::talbot_invert(fhat, {1.0}, 5), hexb::numerical_error);
}

// ---------------------------------------------------------------------------
// FrFFT
// ---------------------------------------------------------------------------

namespace {
std::vector<cplx> direct_fractional_dft(const std::vector<cplx>& x, double nu) {
    const size_t N = x.size();
    std::vector<cplx> out(N, cplx(0, 0));
    for (size_t m = 0; m < N; ++m)
        for (size_t j = 0; j < N; ++j) {
            const long double arg =
                std::fmod(2.0L * static_cast<long double>(nu) * j * m, 2.0L) *
                3.14159265358979323846264338327950288L;
            out[m] += x[j] * cplx(static_cast<double>(std::cos(arg)),
                                  -static_cast<double>(std::sin(arg)));
        }
    return out;
}
}  // namespace

TEST_CASE("frfft equals direct summation") {
    std::mt19937_64 rng(12345);
    auto u = [&rng] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };

    SUBCASE("nu = 1/N degenerates to the plain DFT") {
        const size_t N = 32;
        std::vector<cplx> x(N);
        for (auto& v : x) v = cplx(2.0 * u() - 1.0, 2.0 * u() - 1.0);
        const auto got = hexb::frfft(x, 1.0 / N);
        const auto want = direct_fractional_dft(x, 1.0 / N);
        for (size_t m = 0; m < N; ++m) CHECK(std::abs(got[m] - want[m]) < 1e-10);
    }

    SUBCASE("zeros map to zeros") {
        std::vector<cplx> x(64, cplx(0, 0));
        for (const cplx& v : hexb::frfft(x, 0.037)) CHECK(std::abs(v) == 0.0);
    }

    SUBCASE("random inputs at random fractional steps") {
        for (size_t N : {16u, 64u, 256u}) {
            std::vector<cplx> x(N);
            for (auto& v : x) v = cplx(2.0 * u() - 1.0, 2.0 * u() - 1.0);
            const double nu = 0.1 * u();
            const auto got = hexb::frfft(x, nu);
            const auto want = direct_fractional_dft(x, nu);
            for (size_t m = 0; m < N; ++m) CHECK(std::abs(got[m] - want[m]) < 1e-10);
        }
    }

    SUBCASE("specific regression point") {
        std::vector<cplx> x(64);
        for (auto& v : x) v = cplx(2.0 * u() - 1.0, 2.0 * u() - 1.0);
        const auto got = hexb::frfft(x, 0.013);
        const auto want = direct_fractional_dft(x, 0.013);
        for (size_t m = 0; m < 64; ++m) CHECK(std::abs(got[m] - want[m]) < 1e-10);
    }
}

TEST_CASE("frfft rejects non-power-of-two sizes") {
    std::vector<cplx> x(48, cplx(1, 0));
    CHECK_THROWS_AS(hexb::frfft(x, 0.01), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Carr-Madan
// ---------------------------------------------------------------------------

TEST_CASE("single-period diffusion matches Black-Scholes") {
    const auto m = fixtures::brownian_model(0.23, 1.4, 0.04, 0.01, 250.0);
    for (double mny : {0.7, 0.9, 1.0, 1.15, 1.6}) {
        const double K = mny * m.spot;
        const double want = oracle::black_scholes_call(m.spot, K, 1.4, 0.04, 0.01, 0.23);
        CHECK(std::abs(hexb::carr_madan_call(m, 1, K) - want) < 1e-6 * m.spot);
    }
}

TEST_CASE("strike-grid prices agree with the quadrature path") {
    const auto m = fixtures::table1_model();
    hexb::FrfftPlan plan;
    const auto curve = hexb::carr_madan_call_curve(m, 2, plan);
    // compare a few interior lattice points against direct quadrature
    for (int idx : {400, 512, 600}) {
        const double K = m.spot * std::exp(curve.log_strikes[idx]);
        const double want = hexb::carr_madan_call(m, 2, K);
        CHECK(curve.prices[idx] == doctest::Approx(want).epsilon(5e-5));
    }
}

TEST_CASE("payoff dominance limits") {
    const auto m = fixtures::brownian_model(0.2, 0.25, 0.03);
    // deep out of the money
    CHECK(hexb::carr_madan_call(m, 1, 10.0 * m.spot) < 1e-4 * m.spot);
    // tiny strike: forward bound
    const double K = 0.05 * m.spot;
    const double bound = m.spot - K * std::exp(-0.03 * 0.25);
    CHECK(std::abs(hexb::carr_madan_call(m, 1, K) - bound) < 1e-5 * m.spot);
}

TEST_CASE("fitted model shows a monotone downward skew at six months") {
    const auto m = fixtures::table1_model();
    double prev_iv = 1e9;
    for (double mny : {0.85, 0.95, 1.0, 1.05, 1.15}) {
        const double K = mny * m.spot;
        const double price = hexb::carr_madan_call(m, 1, K);
        const double iv = oracle::implied_vol(price, m.spot, K, 0.5, m.r, m.d);
        CHECK(iv < prev_iv);
        prev_iv = iv;
    }
}

TEST_CASE("call curve is decreasing and convex in strike") {
    const auto m = fixtures::table1_model();
    hexb::FrfftPlan plan;
    const auto curve = hexb::carr_madan_call_curve(m, 2, plan);
    // restrict to a sane moneyness window; the tolerance reflects the
    // truncation noise of the frequency grid (~1e-7 of spot here)
    int monotone_violations = 0, convexity_violations = 0;
    for (int j = 1; j + 1 < plan.N; ++j) {
        const double k = curve.log_strikes[j];
        if (k < -0.35 || k > 0.35) continue;
        if (curve.prices[j] > curve.prices[j - 1] + 1e-7 * m.spot)
            ++monotone_violations;
        const double second =
            curve.prices[j - 1] - 2.0 * curve.prices[j] + curve.prices[j + 1];
        if (second < -1e-7 * m.spot) ++convexity_violations;
    }
    CHECK(monotone_violations == 0);
    CHECK(convexity_violations == 0);
}

TEST_CASE("dampening must clear positive jump rates") {
    const auto m = fixtures::kou_model(0.2, 1.0, 0.5, 1.5, 0.5, 2.0);
    CHECK_THROWS_AS(hexb::carr_madan_call(m, 1, 100.0, 0.75), std::domain_error);
}

TEST_SUITE_END();
