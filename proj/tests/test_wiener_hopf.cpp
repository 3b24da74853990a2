#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "hexb/errors.hpp"
#include "hexb/talbot.hpp"
#include "hexb/wiener_hopf.hpp"
#include "oracles.hpp"
#include "test_fixtures.hpp"

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using hexb::cplx;

namespace {

VectorXcd to_vec(const std::vector<cplx>& v) {
    return Eigen::Map<const VectorXcd>(v.data(), static_cast<long>(v.size()));
}

// Polynomial route for one period: p(s) = (psi(s) - q) * prod(a+ - s) *
// prod(a- + s) expanded in coefficients, roots via the companion matrix.
// Entirely independent of the ladder/homotopy solver.
std::vector<cplx> companion_roots(const hexb::ModelPeriod& p, cplx q) {
    using Poly = std::vector<cplx>;  // ascending coefficients
    auto mul = [](const Poly& a, const Poly& b) {
        Poly out(a.size() + b.size() - 1, cplx(0, 0));
        for (size_t i = 0; i < a.size(); ++i)
            for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
        return out;
    };
    auto add = [](Poly a, const Poly& b) {
        if (b.size() > a.size()) a.resize(b.size(), cplx(0, 0));
        for (size_t i = 0; i < b.size(); ++i) a[i] += b[i];
        return a;
    };

    Poly denom{1.0};
    for (const auto& f : p.pos_jumps) denom = mul(denom, {f.rate, -1.0});
    for (const auto& f : p.neg_jumps) denom = mul(denom, {f.rate, +1.0});

    Poly base{-q, p.mu, 0.5 * p.sigma * p.sigma};
    Poly total = mul(base, denom);
    for (const auto& f : p.pos_jumps) {
        Poly rest{f.intensity, 0.0};  // pi * s
        rest = {0.0, f.intensity};
        for (const auto& g : p.pos_jumps)
            if (&g != &f) rest = mul(rest, {g.rate, -1.0});
        for (const auto& g : p.neg_jumps) rest = mul(rest, {g.rate, +1.0});
        total = add(total, rest);
    }
    for (const auto& f : p.neg_jumps) {
        Poly rest{0.0, -f.intensity};
        for (const auto& g : p.pos_jumps) rest = mul(rest, {g.rate, -1.0});
        for (const auto& g : p.neg_jumps)
            if (&g != &f) rest = mul(rest, {g.rate, +1.0});
        total = add(total, rest);
    }

    const int deg = static_cast<int>(total.size()) - 1;
    MatrixXcd comp = MatrixXcd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -total[i] / total[deg];
    Eigen::ComplexEigenSolver<MatrixXcd> es(comp, false);
    std::vector<cplx> roots(es.eigenvalues().data(),
                            es.eigenvalues().data() + deg);
    return roots;
}

}  // namespace

TEST_SUITE_BEGIN("wiener_hopf");

TEST_CASE("two-period example generator matches the hand-built matrix") {
    // period 1: jump diffusion with one family per side; period 2: diffusion
    hexb::PiecewiseModel m;
    m.r = 0.03;
    m.spot = 100.0;
    hexb::ModelPeriod p1;
    p1.duration = 1.0;
    p1.sigma = 0.25;
    p1.pos_jumps = {{0.3, 4.0}};
    p1.neg_jumps = {{0.7, 2.0}};
    hexb::ModelPeriod p2;
    p2.duration = 0.5;
    p2.sigma = 0.4;
    p2.pos_jumps = {{0.0, 4.0}};
    p2.neg_jumps = {{0.0, 2.0}};
    m.periods = {p1, p2};
    hexb::apply_risk_neutral_drift(m);

    VectorXcd q(2);
    q << 1.3, 0.9;
    const auto blocks = hexb::build_generator(m, q);
    REQUIRE(blocks.dim() == 6);

    // states reachable from the start: d1, d2, up(1), down(1)
    const int idx[4] = {0, 1, 2, 4};
    Eigen::Matrix4cd expected;
    expected << -1.3 - 0.3 - 0.7, 1.3, 0.3, 0.7,
                 0.0, -0.9, 0.0, 0.0,
                 4.0, 0.0, -4.0, 0.0,
                 2.0, 0.0, 0.0, -2.0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            CHECK(std::abs(blocks.Q(idx[a], idx[b]) - expected(a, b)) < 1e-14);

    // diffusion/slope coefficient diagonals
    CHECK(blocks.s2_diag(0) == doctest::Approx(0.25 * 0.25));
    CHECK(blocks.s2_diag(1) == doctest::Approx(0.4 * 0.4));
    CHECK(blocks.s2_diag(2) == 0.0);
    CHECK(blocks.v_diag(0) == doctest::Approx(m.periods[0].mu));
    CHECK(blocks.v_diag(2) == 1.0);
    CHECK(blocks.v_diag(4) == -1.0);

    // K(1) against an explicit entry-wise evaluation on the same states
    const MatrixXcd K = blocks.k_matrix(cplx(1.0, 0.0));
    CHECK(std::abs(K(0, 0) - (0.5 * 0.0625 + m.periods[0].mu + blocks.Q(0, 0))) < 1e-14);
    CHECK(std::abs(K(2, 2) - (1.0 - 4.0)) < 1e-14);
    CHECK(std::abs(K(4, 4) - (-1.0 - 2.0)) < 1e-14);
    CHECK(std::abs(K(0, 1) - blocks.Q(0, 1)) < 1e-14);
}

TEST_CASE("degenerate single-period diffusion gives a one-by-one generator") {
    const auto m = fixtures::brownian_model(0.3, 1.0, 0.02);
    VectorXcd q(1);
    q << 2.0;
    const auto blocks = hexb::build_generator(m, q);
    REQUIRE(blocks.dim() == 1);
    CHECK(std::abs(blocks.Q(0, 0) - cplx(-2.0, 0.0)) < 1e-15);
    CHECK(std::abs(blocks.k_matrix(0.0)(0, 0) - blocks.Q(0, 0)) < 1e-15);
}

TEST_CASE("generator property at real rates") {
    std::mt19937_64 rng(777);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = fixtures::random_model(rng, 1 + trial % 4, trial % 3, 1 + trial % 3);
        const auto q = to_vec(fixtures::random_rates(rng, m.num_periods(), false));
        const auto blocks = hexb::build_generator(m, q);
        for (int i = 0; i < blocks.dim(); ++i) {
            cplx row_sum = 0.0;
            for (int j = 0; j < blocks.dim(); ++j) {
                row_sum += blocks.Q(i, j);
                if (i != j) CHECK(blocks.Q(i, j).real() >= 0.0);
            }
            CHECK(row_sum.real() <= 1e-12);
            CHECK(std::abs(row_sum.imag()) < 1e-12);
        }
    }
}

TEST_CASE("determinant factorization identity") {
    std::mt19937_64 rng(2024);
    auto u = [&rng] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
    for (int trial = 0; trial < 10; ++trial) {
        const int N = 1 + trial % 4;
        const auto m = fixtures::random_model(rng, N, trial % 4, (trial + 1) % 4);
        const auto q = to_vec(fixtures::random_rates(rng, N, trial % 2 == 0));
        const auto blocks = hexb::build_generator(m, q);
        for (int k = 0; k < 20; ++k) {
            const cplx s(6.0 * (2.0 * u() - 1.0), 6.0 * (2.0 * u() - 1.0));
            const double lhs = std::abs(blocks.k_matrix(s).determinant());
            const double rhs = hexb::det_identity_rhs(m, q, s);
            CHECK(std::abs(lhs - rhs) <= 1e-8 * std::max(rhs, 1e-300));
        }
    }
}

TEST_CASE("quadratic roots for the diffusion-only case") {
    const double sigma = 0.3, T = 1.0;
    const auto m = fixtures::brownian_model(sigma, T, 0.05);
    const double mu = m.periods[0].mu;
    VectorXcd q(1);
    q << 1.7;
    const auto roots = hexb::find_roots(m, q);
    REQUIRE(roots.plus.size() == 1);
    REQUIRE(roots.minus.size() == 1);
    const double s2 = sigma * sigma;
    const double disc = std::sqrt(mu * mu + 2.0 * s2 * 1.7);
    CHECK(roots.plus[0].real() == doctest::Approx((-mu + disc) / s2).epsilon(1e-10));
    CHECK(roots.minus[0].real() == doctest::Approx((-mu - disc) / s2).epsilon(1e-10));
}

TEST_CASE("kou-type model: interlacing across the pole ladder") {
    const auto m = fixtures::kou_model(0.25, 1.0, 0.4, 5.0, 0.6, 3.0);
    VectorXcd q(1);
    q << 2.4;
    const auto roots = hexb::find_roots(m, q);
    REQUIRE(roots.plus.size() == 2);
    REQUIRE(roots.minus.size() == 2);
    std::vector<double> plus{roots.plus[0].real(), roots.plus[1].real()};
    std::vector<double> minus{roots.minus[0].real(), roots.minus[1].real()};
    std::sort(plus.begin(), plus.end());
    std::sort(minus.begin(), minus.end());
    CHECK(minus[0] < -3.0);
    CHECK(minus[1] > -3.0);
    CHECK(minus[1] < 0.0);
    CHECK(plus[0] > 0.0);
    CHECK(plus[0] < 5.0);
    CHECK(plus[1] > 5.0);
}

TEST_CASE("two negative families: ladder ordering and bisection oracle") {
    const auto m = fixtures::table1_model();
    hexb::PiecewiseModel first;
    first.r = m.r;
    first.d = m.d;
    first.spot = m.spot;
    first.periods = {m.periods[0]};
    VectorXcd q(1);
    q << 1.0;
    const auto roots = hexb::find_roots(first, q);
    REQUIRE(roots.plus.size() == 1);
    REQUIRE(roots.minus.size() == 3);
    std::vector<double> minus;
    for (cplx r : roots.minus) minus.push_back(r.real());
    std::sort(minus.begin(), minus.end());
    CHECK(minus[0] < -10.0);
    CHECK(minus[1] > -10.0);
    CHECK(minus[1] < -3.0);
    CHECK(minus[2] > -3.0);
    CHECK(minus[2] < 0.0);

    oracle::ScalarModel sm;
    sm.sigma = first.periods[0].sigma;
    sm.mu = first.periods[0].mu;
    sm.neg = {{0.0371, 3.0}, {11.1819, 10.0}};
    const auto all = oracle::scalar_roots(sm, 1.0);
    REQUIRE(all.size() == 4);
    std::vector<double> engine{minus[0], minus[1], minus[2], roots.plus[0].real()};
    std::sort(engine.begin(), engine.end());
    for (size_t i = 0; i < 4; ++i)
        CHECK(engine[i] == doctest::Approx(all[i]).epsilon(1e-9));
}

TEST_CASE("complex rates: residuals, counts, and the polynomial cross-check") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 12; ++trial) {
        const int N = 1 + trial % 3;
        const auto m = fixtures::random_model(rng, N, trial % 3, (trial + 2) % 4);
        const auto q = to_vec(fixtures::random_rates(rng, N, true));
        const auto roots = hexb::find_roots(m, q);
        CHECK(roots.plus.size() == static_cast<size_t>(N * (1 + m.n_plus())));
        CHECK(roots.minus.size() == static_cast<size_t>(N * (1 + m.n_minus())));

        // every root satisfies its period equation
        size_t ip = 0, im = 0;
        for (int i = 0; i < N; ++i) {
            for (int k = 0; k < 1 + m.n_plus(); ++k, ++ip) {
                const cplx resid =
                    hexb::laplace_exponent(m.periods[i], roots.plus[ip]) - q(i);
                CHECK(std::abs(resid) < 1e-9 * (1.0 + std::abs(q(i))));
            }
            for (int k = 0; k < 1 + m.n_minus(); ++k, ++im) {
                const cplx resid =
                    hexb::laplace_exponent(m.periods[i], roots.minus[im]) - q(i);
                CHECK(std::abs(resid) < 1e-9 * (1.0 + std::abs(q(i))));
            }
        }

        // union of both families matches the companion-polynomial roots
        for (int i = 0; i < N; ++i) {
            std::vector<cplx> mine;
            for (int k = 0; k < 1 + m.n_plus(); ++k)
                mine.push_back(roots.plus[i * (1 + m.n_plus()) + k]);
            for (int k = 0; k < 1 + m.n_minus(); ++k)
                mine.push_back(roots.minus[i * (1 + m.n_minus()) + k]);
            auto poly = companion_roots(m.periods[i], q(i));
            REQUIRE(poly.size() == mine.size());
            for (const cplx r : mine) {
                double best = 1e18;
                for (const cplx pr : poly) best = std::min(best, std::abs(r - pr));
                CHECK(best < 1e-6 * (1.0 + std::abs(r)));
            }
        }
    }
}

TEST_CASE("spectral factorization satisfies both matrix equations") {
    std::mt19937_64 rng(4321);
    for (int trial = 0; trial < 14; ++trial) {
        const int N = 1 + trial % 3;
        const auto m = fixtures::random_model(rng, N, trial % 3, (trial + 1) % 3);
        const auto q = to_vec(fixtures::random_rates(rng, N, trial % 2 == 1));
        const auto f = hexb::factor_supremum(m, q);
        CHECK(f.resid_quadratic < 1e-8);
        CHECK(f.resid_coupling < 1e-8);
        const auto g = hexb::factor_infimum(m, q);
        CHECK(g.resid_quadratic < 1e-8);
        CHECK(g.resid_coupling < 1e-8);
    }
}

TEST_CASE("factorization generator and sub-probability structure at real rates") {
    std::mt19937_64 rng(31337);
    for (int trial = 0; trial < 10; ++trial) {
        const int N = 1 + trial % 3;
        const auto m = fixtures::random_model(rng, N, 1 + trial % 2, 1 + (trial + 1) % 2);
        const auto q = to_vec(fixtures::random_rates(rng, N, false));
        for (const auto& f : {hexb::factor_supremum(m, q), hexb::factor_infimum(m, q)}) {
            for (int i = 0; i < f.Qgen.rows(); ++i) {
                cplx row_sum = 0.0;
                for (int j = 0; j < f.Qgen.cols(); ++j) {
                    row_sum += f.Qgen(i, j);
                    CHECK(std::abs(f.Qgen(i, j).imag()) < 1e-9);
                    if (i != j) CHECK(f.Qgen(i, j).real() >= -1e-10);
                }
                CHECK(row_sum.real() <= 1e-10);
            }
            for (int i = 0; i < f.eta.rows(); ++i) {
                double row_sum = 0.0;
                for (int j = 0; j < f.eta.cols(); ++j) {
                    CHECK(f.eta(i, j).real() >= 0.0);
                    row_sum += f.eta(i, j).real();
                }
                CHECK(row_sum <= 1.0 + 1e-10);
            }
        }
    }
}

TEST_CASE("diffusion-only factorization collapses to the scalar root") {
    const auto m = fixtures::brownian_model(0.25, 1.0, 0.03);
    VectorXcd q(1);
    q << 2.0;
    const auto roots = hexb::find_roots(m, q);
    const auto f = hexb::factor_supremum(m, q);
    REQUIRE(f.Qgen.rows() == 1);
    CHECK(std::abs(f.Qgen(0, 0) - (-roots.plus[0])) < 1e-10);
    CHECK(f.eta.rows() == 0);
    const auto g = hexb::factor_infimum(m, q);
    CHECK(std::abs(g.Qgen(0, 0) - roots.minus[0]) < 1e-10);
}

TEST_CASE("spectral evaluation equals the direct matrix exponential") {
    std::mt19937_64 rng(515151);
    for (int trial = 0; trial < 8; ++trial) {
        const int N = 1 + trial % 3;
        const auto m = fixtures::random_model(rng, N, trial % 3, (trial + 1) % 3);
        const auto q = to_vec(fixtures::random_rates(rng, N, trial % 2 == 0));
        const auto f = hexb::factor_supremum(m, q);
        for (double x : {0.05, 0.4, 1.2}) {
            const cplx spectral = f.form_ones(x, 0);
            const MatrixXcd direct = (f.Qgen * x).exp();
            const cplx want = direct.row(0).sum();
            CHECK(std::abs(spectral - want) <= 1e-9 * (1.0 + std::abs(want)));
        }
    }
}

TEST_CASE("supremum transform limits and monotonicity") {
    const auto m = fixtures::kou_model(0.3, 1.0, 0.5, 4.0, 0.8, 2.5);
    VectorXcd q(1);
    q << 1.9;
    const auto f = hexb::factor_supremum(m, q);
    const double qprod = 1.9;
    CHECK(std::abs(hexb::sup_transform(f, 1e-12, q)) < 1e-10);
    CHECK(std::abs(hexb::sup_transform(f, 60.0, q) - 1.0 / qprod) < 1e-9);
    double prev = -1.0;
    for (double x = 0.05; x < 3.0; x += 0.11) {
        const double v = hexb::sup_transform(f, x, q).real();
        CHECK(v >= prev - 1e-12);
        CHECK(v >= -1e-12);
        CHECK(v <= 1.0 / qprod + 1e-12);
        prev = v;
    }
}

TEST_CASE("brownian supremum law: transform and inversion against the reflection formula") {
    const double sigma = 0.31, T = 1.3, r = 0.04;
    const auto m = fixtures::brownian_model(sigma, T, r);
    const double mu = m.periods[0].mu;

    VectorXcd q(1);
    q << 2.2;
    const auto f = hexb::factor_supremum(m, q);
    const double s2 = sigma * sigma;
    const double rho = (-mu + std::sqrt(mu * mu + 2.0 * s2 * 2.2)) / s2;
    for (double x : {0.1, 0.5, 1.5}) {
        const cplx got = hexb::sup_transform(f, x, q);
        const cplx want = (1.0 - std::exp(-rho * x)) / 2.2;
        CHECK(std::abs(got - want) < 1e-12);
    }

    // time domain: invert and compare with P(sup <= x)
    for (double x : {0.1, 0.35}) {
        auto fhat = [&](const std::vector<cplx>& qv) {
            const auto fq = hexb::factor_supremum(m, to_vec(qv));
            return hexb::sup_transform(fq, x, to_vec(qv));
        };
        const double got = hexb::talbot_invert(fhat, {T}, 8);
        CHECK(std::abs(got - oracle::brownian_sup_cdf(x, mu, sigma, T)) < 1e-5);
    }
}

TEST_CASE("infimum transform mirrors the supremum of the negated process") {
    const auto m = fixtures::kou_model(0.22, 0.8, 0.3, 6.0, 0.9, 2.0);
    const auto mir = hexb::mirrored(m);
    VectorXcd q(1);
    q << 3.1;
    const auto fi = hexb::factor_infimum(m, q);
    const auto fs = hexb::factor_supremum(mir, q);
    for (double x : {0.07, 0.9}) {
        const cplx a = hexb::inf_transform(fi, x, q);
        const cplx b = hexb::sup_transform(fs, x, q);
        CHECK(std::abs(a - b) < 1e-12);
    }
    CHECK(std::abs(hexb::inf_transform(fi, 1e-12, q)) < 1e-10);
}

TEST_CASE("scalar partial-fraction route agrees at one period") {
    // Kou case and the two-negative-family case
    for (int variant = 0; variant < 2; ++variant) {
        hexb::PiecewiseModel m =
            variant == 0 ? fixtures::kou_model(0.25, 1.0, 0.45, 5.5, 0.7, 2.2)
                         : [] {
                               auto t = fixtures::table1_model();
                               hexb::PiecewiseModel first;
                               first.r = t.r;
                               first.spot = t.spot;
                               first.periods = {t.periods[0]};
                               return first;
                           }();
        oracle::ScalarModel sm;
        sm.sigma = m.periods[0].sigma;
        sm.mu = m.periods[0].mu;
        for (const auto& f : m.periods[0].pos_jumps) sm.pos.push_back({f.intensity, f.rate});
        for (const auto& f : m.periods[0].neg_jumps) sm.neg.push_back({f.intensity, f.rate});

        for (double qv : {0.6, 2.0, 7.0}) {
            VectorXcd q(1);
            q << qv;
            const auto law = oracle::scalar_inf_law(sm, qv);
            const auto f = hexb::factor_infimum(m, q);
            for (double x : {0.05, 0.3, 1.1}) {
                // survival P(-inf > x) at an exponential horizon: 1 - q * transform
                const double got = 1.0 - qv * hexb::inf_transform(f, x, q).real();
                const double want = law.survival(x);
                CHECK(std::abs(got - want) < 1e-9);
            }
        }
    }
}

TEST_CASE("moment transform: strip checks, s = 0 reduction, and the brownian closed form") {
    const auto m = fixtures::kou_model(0.3, 1.0, 0.4, 5.0, 0.6, 3.0);
    VectorXcd q(1);
    q << 2.0;
    const auto blocks = hexb::build_generator(m, q);
    const auto fi = hexb::factor_infimum(m, q);
    const auto fs = hexb::factor_supremum(m, q);

    CHECK_THROWS_AS(hexb::joint_transform(fi, blocks, 0.4, cplx(5.5, 0.0), q),
                    std::domain_error);
    CHECK_THROWS_AS(hexb::joint_transform(fi, blocks, 0.4, cplx(-3.0, 0.0), q),
                    std::domain_error);

    for (double x : {0.2, 0.8}) {
        const cplx at_zero = hexb::joint_transform(fi, blocks, x, cplx(0.0, 0.0), q);
        const cplx crossing = 1.0 / 2.0 - hexb::inf_transform(fi, x, q);
        CHECK(std::abs(at_zero - crossing) < 1e-11);
        const cplx up_zero = hexb::joint_transform(fs, blocks, x, cplx(0.0, 0.0), q);
        const cplx up_crossing = 1.0 / 2.0 - hexb::sup_transform(fs, x, q);
        CHECK(std::abs(up_zero - up_crossing) < 1e-11);
    }

    // diffusion only: first-passage decomposition in closed form
    const auto bm = fixtures::brownian_model(0.28, 1.0, 0.05);
    const double mu = bm.periods[0].mu, s2 = 0.28 * 0.28;
    VectorXcd qb(1);
    qb << 1.6;
    const auto bblocks = hexb::build_generator(bm, qb);
    const auto bfi = hexb::factor_infimum(bm, qb);
    const double rho_minus = (-mu - std::sqrt(mu * mu + 2.0 * s2 * 1.6)) / s2;
    for (double s : {-0.8, 0.4, 1.2}) {
        for (double x : {0.15, 0.6}) {
            const cplx got = hexb::joint_transform(bfi, bblocks, x, cplx(s, 0.0), qb);
            const double psi = mu * s + 0.5 * s2 * s * s;
            const cplx want =
                std::exp(-s * x) * std::exp(rho_minus * x) / (1.6 - psi);
            CHECK(std::abs(got - want) < 1e-10 * (1.0 + std::abs(want)));
        }
    }
}

TEST_CASE("coalescent roots are reported, not silently mangled") {
    // two identical periods with identical rates force a repeated root
    auto m = fixtures::kou_model(0.25, 1.0, 0.4, 5.0, 0.6, 3.0);
    m.periods.push_back(m.periods[0]);
    VectorXcd q(2);
    q << 2.0, 2.0;
    CHECK_THROWS_AS(hexb::factor_supremum(m, q), hexb::numerical_error);
}

TEST_SUITE_END();
