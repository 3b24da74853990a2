#include "hexb/wiener_hopf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "hexb/errors.hpp"

namespace hexb {

using Eigen::MatrixXcd;
using Eigen::RowVectorXcd;
using Eigen::VectorXcd;

namespace {

bool is_real_positive(const VectorXcd& q) {
    for (int i = 0; i < q.size(); ++i)
        if (q(i).imag() != 0.0 || !(q(i).real() > 0.0)) return false;
    return true;
}

void check_rates(const VectorXcd& q) {
    for (int i = 0; i < q.size(); ++i) {
        if (std::abs(q(i)) == 0.0)
            throw std::domain_error("randomization rates must be nonzero");
        if (q(i).imag() == 0.0 && q(i).real() <= 0.0)
            throw std::domain_error("real randomization rates must be positive");
    }
}

cplx product(const VectorXcd& q) {
    cplx p = 1.0;
    for (int i = 0; i < q.size(); ++i) p *= q(i);
    return p;
}

// ---------------------------------------------------------------------------
// scalar root solving: psi_i(s) = q, one period at a time
// ---------------------------------------------------------------------------

// Positive-halfplane roots for one period at real q > 0, ascending. Families
// with zero intensity contribute no pole to psi; their root sits exactly at
// the rate and is pinned there for every q.
std::vector<double> positive_roots_real(const ModelPeriod& p, double q,
                                        double root_tol) {
    std::vector<double> poles;  // active positive poles
    std::vector<double> pinned;
    for (const auto& f : p.pos_jumps) {
        if (f.intensity == 0.0)
            pinned.push_back(f.rate);
        else
            poles.push_back(f.rate);
    }
    std::sort(poles.begin(), poles.end());

    const auto f = [&](double s) { return laplace_exponent(p, s) - q; };

    std::vector<std::pair<double, double>> brackets;
    auto approach_from_left = [&](double lo, double pole) {
        // f -> +inf just left of an active pole
        double width = pole - lo;
        for (int j = 1; j < 200; ++j) {
            const double s = pole - width * std::pow(0.5, j);
            if (f(s) > 0.0) return s;
        }
        throw numerical_error("root bracketing failed left of a pole");
    };
    auto approach_from_right = [&](double pole, double hi_hint) {
        // f -> -inf just right of an active pole
        double width = std::max(hi_hint - pole, 1.0);
        for (int j = 1; j < 200; ++j) {
            const double s = pole + width * std::pow(0.5, j);
            if (s > pole && f(s) < 0.0) return s;
        }
        throw numerical_error("root bracketing failed right of a pole");
    };

    if (poles.empty()) {
        double hi = 1.0;
        for (int j = 0; j < 400 && f(hi) <= 0.0; ++j) hi *= 2.0;
        brackets.emplace_back(0.0, hi);
    } else {
        brackets.emplace_back(0.0, approach_from_left(0.0, poles.front()));
        for (size_t k = 0; k + 1 < poles.size(); ++k) {
            const double lo = approach_from_right(poles[k], poles[k + 1]);
            const double hi = approach_from_left(poles[k], poles[k + 1]);
            brackets.emplace_back(lo, hi);
        }
        double hi = std::max(2.0 * poles.back(), poles.back() + 1.0);
        for (int j = 0; j < 400 && f(hi) <= 0.0; ++j) hi *= 2.0;
        brackets.emplace_back(approach_from_right(poles.back(), hi), hi);
    }

    std::vector<double> roots;
    for (auto [lo, hi] : brackets) {
        // f(lo) < 0 < f(hi) by construction
        for (int it = 0; it < 200 && hi - lo > 1e-16 * (1.0 + std::abs(hi)); ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            (f(mid) < 0.0 ? lo : hi) = mid;
        }
        double s = 0.5 * (lo + hi);
        for (int it = 0; it < 8; ++it) {
            const double fs = f(s);
            if (std::abs(fs) < root_tol * (1.0 + std::abs(q))) break;
            const cplx d = laplace_exponent_deriv(p, cplx(s, 0.0));
            const double step = fs / d.real();
            const double cand = s - step;
            if (!(cand > lo && cand < hi)) break;
            s = cand;
        }
        roots.push_back(s);
    }
    roots.insert(roots.end(), pinned.begin(), pinned.end());
    std::sort(roots.begin(), roots.end());
    return roots;
}

// Continues one root of psi(s) = q along q(t) = q0 + t (q1 - q0), with a
// first-order predictor and local step halving. A corrected point is only
// accepted when it stays near its predecessor, so roots cannot silently jump
// between branches when the path passes close to a critical value.
bool continue_root(const ModelPeriod& p, cplx q0, cplx q1, int steps, cplx& s,
                   double root_tol) {
    double t = 0.0;
    double dt = 1.0 / steps;
    const double dt_min = 1e-7;
    cplx cur = s;

    while (t < 1.0) {
        const double step = std::min(dt, 1.0 - t);
        const cplx from = q0 + (q1 - q0) * t;
        const cplx target = q0 + (q1 - q0) * (t + step);
        bool accepted = false;
        try {
            cplx trial = cur;
            const cplx d0 = laplace_exponent_deriv(p, cur);
            if (std::abs(d0) > 0.0) trial = cur + (target - from) / d0;
            bool converged = false;
            for (int it = 0; it < 30; ++it) {
                const cplx fs = laplace_exponent(p, trial) - target;
                if (std::abs(fs) < root_tol * (1.0 + std::abs(target))) {
                    converged = true;
                    break;
                }
                const cplx d = laplace_exponent_deriv(p, trial);
                if (std::abs(d) == 0.0) break;
                const cplx delta = fs / d;
                if (!std::isfinite(delta.real()) || !std::isfinite(delta.imag())) break;
                trial -= delta;
            }
            if (converged &&
                std::abs(trial - cur) <= 0.75 * (1.0 + std::abs(cur))) {
                cur = trial;
                t += step;
                dt = std::min(2.0 * dt, 1.0 / steps);
                accepted = true;
            }
        } catch (const std::domain_error&) {
            // Newton landed on a pole; treat like a failed step
        }
        if (!accepted) {
            dt *= 0.5;
            if (dt < dt_min) return false;
        }
    }
    s = cur;
    return true;
}

// Plus-family roots of one period at (possibly complex) q, tracked from the
// real-q configuration.
std::vector<cplx> positive_roots(const ModelPeriod& p, cplx q, const WhOptions& opts) {
    const double q_abs = std::abs(q);
    std::vector<double> base = positive_roots_real(p, q_abs, opts.root_tol);
    if (q.imag() == 0.0 && q.real() > 0.0)
        return std::vector<cplx>(base.begin(), base.end());

    std::vector<bool> pinned(base.size(), false);
    for (size_t i = 0; i < base.size(); ++i)
        for (const auto& fam : p.pos_jumps)
            if (fam.intensity == 0.0 && base[i] == fam.rate) pinned[i] = true;

    for (int steps = opts.homotopy_steps; steps <= 64 * opts.homotopy_steps; steps *= 2) {
        std::vector<cplx> roots(base.begin(), base.end());
        bool ok = true;
        for (size_t i = 0; i < roots.size() && ok; ++i) {
            if (pinned[i]) continue;
            ok = continue_root(p, cplx(q_abs, 0.0), q, steps, roots[i], opts.root_tol);
        }
        if (!ok) continue;
        bool distinct = true;
        for (size_t a = 0; a < roots.size() && distinct; ++a)
            for (size_t b = a + 1; b < roots.size(); ++b)
                if (std::abs(roots[a] - roots[b]) <
                    1e-10 * (1.0 + std::abs(roots[a]))) {
                    distinct = false;
                    break;
                }
        if (distinct) return roots;
    }
    throw numerical_error("root continuation to a complex rate failed");
}

}  // namespace

// ---------------------------------------------------------------------------
// generator assembly
// ---------------------------------------------------------------------------

GeneratorBlocks build_generator(const PiecewiseModel& m, const VectorXcd& q) {
    if (q.size() != m.num_periods())
        throw std::invalid_argument("rate vector length must equal the period count");
    check_rates(q);

    GeneratorBlocks b;
    b.N = m.num_periods();
    b.n_plus = m.n_plus();
    b.n_minus = m.n_minus();
    b.q = q;

    const int N = b.N, np = b.n_plus, nm = b.n_minus;
    const int dim = b.dim();
    b.Q = MatrixXcd::Zero(dim, dim);
    b.s2_diag = Eigen::VectorXd::Zero(dim);
    b.v_diag = Eigen::VectorXd::Zero(dim);

    const double inf = std::numeric_limits<double>::infinity();
    b.min_alpha_plus = inf;
    b.min_alpha_minus = inf;

    const auto pos_state = [&](int i, int k) { return N + i * np + k; };
    const auto neg_state = [&](int i, int l) { return N * (1 + np) + i * nm + l; };

    for (int i = 0; i < N; ++i) {
        const auto& p = m.periods[i];
        b.s2_diag(i) = p.sigma * p.sigma;
        b.v_diag(i) = p.mu;

        b.Q(i, i) = -q(i) - p.lambda_plus() - p.lambda_minus();
        if (i + 1 < N) b.Q(i, i + 1) = q(i);

        for (int k = 0; k < np; ++k) {
            const auto& f = p.pos_jumps[k];
            const int s = pos_state(i, k);
            b.Q(i, s) = f.intensity;
            b.Q(s, i) = f.rate;
            b.Q(s, s) = -f.rate;
            b.v_diag(s) = +1.0;
            b.min_alpha_plus = std::min(b.min_alpha_plus, f.rate);
        }
        for (int l = 0; l < nm; ++l) {
            const auto& f = p.neg_jumps[l];
            const int s = neg_state(i, l);
            b.Q(i, s) = f.intensity;
            b.Q(s, i) = f.rate;
            b.Q(s, s) = -f.rate;
            b.v_diag(s) = -1.0;
            b.min_alpha_minus = std::min(b.min_alpha_minus, f.rate);
        }
    }
    return b;
}

MatrixXcd GeneratorBlocks::k_matrix(cplx s) const {
    MatrixXcd K = Q;
    const cplx s2 = 0.5 * s * s;
    for (int i = 0; i < dim(); ++i) K(i, i) += s2 * s2_diag(i) + s * v_diag(i);
    return K;
}

double det_identity_rhs(const PiecewiseModel& m, const VectorXcd& q, cplx s) {
    double prod = 1.0;
    for (int i = 0; i < m.num_periods(); ++i) {
        const auto& p = m.periods[i];
        prod *= std::abs(laplace_exponent(p, s) - q(i));
        for (const auto& f : p.pos_jumps) prod *= std::abs(s - f.rate);
        for (const auto& f : p.neg_jumps) prod *= std::abs(s + f.rate);
    }
    return prod;
}

// ---------------------------------------------------------------------------
// roots
// ---------------------------------------------------------------------------

RootSet find_roots(const PiecewiseModel& m, const VectorXcd& q, const WhOptions& opts) {
    if (q.size() != m.num_periods())
        throw std::invalid_argument("rate vector length must equal the period count");
    check_rates(q);

    RootSet out;
    const PiecewiseModel mir = mirrored(m);
    for (int i = 0; i < m.num_periods(); ++i) {
        for (cplx rho : positive_roots(m.periods[i], q(i), opts))
            out.plus.push_back(rho);
        for (cplx rho : positive_roots(mir.periods[i], q(i), opts))
            out.minus.push_back(-rho);
    }
    return out;
}

// ---------------------------------------------------------------------------
// spectral factorization
// ---------------------------------------------------------------------------

namespace {

SpectralFactorization assemble(const PiecewiseModel& side_model, const VectorXcd& q,
                               const WhOptions& opts, int side) {
    const GeneratorBlocks blocks = build_generator(side_model, q);
    const int dim = blocks.dim();
    const int m_top = blocks.top_dim();
    const int m_bot = blocks.bottom_dim();

    std::vector<cplx> rho;
    for (int i = 0; i < side_model.num_periods(); ++i)
        for (cplx r : positive_roots(side_model.periods[i], q(i), opts))
            rho.push_back(r);
    if (static_cast<int>(rho.size()) != m_top)
        throw numerical_error("unexpected root count in spectral assembly");
    for (size_t a = 0; a < rho.size(); ++a)
        for (size_t b = a + 1; b < rho.size(); ++b)
            if (std::abs(rho[a] - rho[b]) < 1e-10 * (1.0 + std::abs(rho[a])))
                throw numerical_error(
                    "coalescent roots: spectral factorization requires distinct roots");

    SpectralFactorization f;
    f.side = side;
    f.N = blocks.N;
    f.n_top = blocks.n_plus;
    f.rho = Eigen::Map<const VectorXcd>(rho.data(), static_cast<int>(rho.size()));
    f.eig = -f.rho;

    f.U.resize(m_top, m_top);
    MatrixXcd G(m_bot, m_top);
    for (int j = 0; j < m_top; ++j) {
        const MatrixXcd K = blocks.k_matrix(f.rho(j));
        Eigen::JacobiSVD<MatrixXcd> svd(K, Eigen::ComputeFullV);
        VectorXcd v = svd.matrixV().col(dim - 1);
        // scale so the first substantial top coordinate is exactly one
        const double vmax = v.head(m_top).cwiseAbs().maxCoeff();
        int anchor = 0;
        while (anchor < m_top && std::abs(v(anchor)) < 0.1 * vmax) ++anchor;
        v /= v(anchor);
        f.U.col(j) = v.head(m_top);
        if (m_bot > 0) G.col(j) = v.tail(m_bot);
    }

    {
        Eigen::JacobiSVD<MatrixXcd> svd(f.U);
        const auto& sv = svd.singularValues();
        f.cond_U = sv(0) / sv(sv.size() - 1);
    }
    if (!(f.cond_U < opts.cond_limit))
        throw numerical_error("eigenvector matrix numerically singular (cond " +
                              std::to_string(f.cond_U) + ")");
    f.use_spectral = f.cond_U < opts.cond_expm_switch;

    f.Uinv = f.U.fullPivLu().inverse();
    f.Qgen = f.U * f.eig.asDiagonal() * f.Uinv;
    f.eta = (m_bot > 0) ? MatrixXcd(G * f.Uinv) : MatrixXcd::Zero(0, m_top);

    // residuals of the two factorization equations, relative to ||H+||
    const MatrixXcd Htop = blocks.Q.topLeftCorner(m_top, m_top);
    const double scale = Htop.norm();
    {
        const MatrixXcd S2 = blocks.s2_diag.head(m_top).cast<cplx>().asDiagonal();
        const MatrixXcd V = blocks.v_diag.head(m_top).cast<cplx>().asDiagonal();
        MatrixXcd R1 = 0.5 * S2 * f.Qgen * f.Qgen - V * f.Qgen + Htop;
        if (m_bot > 0) R1 += blocks.Q.topRightCorner(m_top, m_bot) * f.eta;
        f.resid_quadratic = R1.norm() / scale;
    }
    if (m_bot > 0) {
        const MatrixXcd C = blocks.Q.bottomLeftCorner(m_bot, m_top);
        const MatrixXcd T = blocks.Q.bottomRightCorner(m_bot, m_bot);
        const MatrixXcd R2 = f.eta * f.Qgen + C + T * f.eta;
        f.resid_coupling = R2.norm() / scale;
    } else {
        f.resid_coupling = 0.0;
    }
    if (f.resid_quadratic > opts.resid_tol || f.resid_coupling > opts.resid_tol)
        throw numerical_error("factorization residual above tolerance");

    if (is_real_positive(q) && m_bot > 0) {
        // sub-probability cleanup: round-off negatives are zeroed, anything
        // beyond round-off is a genuine failure
        for (int a = 0; a < f.eta.rows(); ++a) {
            double row_sum = 0.0;
            for (int c = 0; c < f.eta.cols(); ++c) {
                double re = f.eta(a, c).real();
                if (re < 0.0) {
                    if (re < -1e-10)
                        throw numerical_error("sub-probability block has a negative entry");
                    f.eta(a, c) = cplx(0.0, f.eta(a, c).imag());
                    re = 0.0;
                }
                row_sum += re;
            }
            if (row_sum > 1.0 + 1e-10)
                throw numerical_error("sub-probability block row sum exceeds one");
        }
    }
    return f;
}

}  // namespace

SpectralFactorization factor_supremum(const PiecewiseModel& m, const VectorXcd& q,
                                      const WhOptions& opts) {
    return assemble(m, q, opts, +1);
}

SpectralFactorization factor_infimum(const PiecewiseModel& m, const VectorXcd& q,
                                     const WhOptions& opts) {
    return assemble(mirrored(m), q, opts, -1);
}

cplx SpectralFactorization::form(double x, int power, const VectorXcd& w) const {
    if (x < 0.0) throw std::domain_error("level must be nonnegative");
    if (use_spectral) {
        const VectorXcd c = Uinv * w;
        cplx sum = 0.0;
        for (int i = 0; i < U.cols(); ++i) {
            cplx term = U(0, i) * std::exp(eig(i) * x) * c(i);
            for (int pw = 0; pw < power; ++pw) term *= eig(i);
            sum += term;
        }
        return sum;
    }
    MatrixXcd E = (Qgen * x).exp();
    for (int pw = 0; pw < power; ++pw) E = Qgen * E;
    return (E * w)(0);
}

cplx SpectralFactorization::form_ones(double x, int power) const {
    return form(x, power, VectorXcd::Ones(Qgen.rows()));
}

RowVectorXcd SpectralFactorization::row(double x, int power) const {
    if (x < 0.0) throw std::domain_error("level must be nonnegative");
    if (use_spectral) {
        RowVectorXcd out = RowVectorXcd::Zero(Qgen.cols());
        for (int i = 0; i < U.cols(); ++i) {
            cplx coef = U(0, i) * std::exp(eig(i) * x);
            for (int pw = 0; pw < power; ++pw) coef *= eig(i);
            out += coef * Uinv.row(i);
        }
        return out;
    }
    MatrixXcd E = (Qgen * x).exp();
    for (int pw = 0; pw < power; ++pw) E = Qgen * E;
    return E.row(0);
}

// ---------------------------------------------------------------------------
// transforms
// ---------------------------------------------------------------------------

cplx sup_transform(const SpectralFactorization& f, double x, const VectorXcd& q) {
    if (x < 0.0) throw std::domain_error("level must be nonnegative");
    return (1.0 - f.form_ones(x, 0)) / product(q);
}

cplx inf_transform(const SpectralFactorization& f, double x, const VectorXcd& q) {
    return sup_transform(f, x, q);
}

cplx joint_transform(const SpectralFactorization& f, const GeneratorBlocks& blocks,
                     double x, cplx s, const VectorXcd& q) {
    if (x < 0.0) throw std::domain_error("level must be nonnegative");
    if (s.real() <= -blocks.min_alpha_minus || s.real() >= blocks.min_alpha_plus)
        throw std::domain_error("exponential moment argument outside the jump strip");

    const int dim = blocks.dim();
    const VectorXcd rhs = blocks.Q * VectorXcd::Ones(dim);

    cplx arg = s;
    VectorXcd w;
    for (int attempt = 0;; ++attempt) {
        const MatrixXcd K = blocks.k_matrix(arg);
        w = K.partialPivLu().solve(rhs);
        const double resid = (K * w - rhs).norm() / (1.0 + rhs.norm() + w.norm());
        if (resid < 1e-8) break;
        if (attempt >= 1)
            throw numerical_error("moment transform solve failed near a spectral point");
        std::fprintf(stderr,
                     "hexb: moment transform argument near a spectral point; "
                     "perturbing by 1e-9\n");
        arg += cplx(1e-9, 0.0);
    }

    VectorXcd w_sel;
    if (f.side > 0) {
        w_sel = w.head(blocks.top_dim());
    } else {
        w_sel.resize(blocks.N + blocks.bottom_dim());
        w_sel << w.head(blocks.N), w.tail(blocks.bottom_dim());
    }
    const cplx pref = std::exp(static_cast<double>(f.side) * s * x);
    return pref * (f.row(x, 0) * w_sel)(0) / product(q);
}

}  // namespace hexb
