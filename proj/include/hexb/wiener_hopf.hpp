#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hexb/model.hpp"

namespace hexb {

struct WhOptions {
    double root_tol = 1e-12;        // |psi(rho) - q| < root_tol * (1 + |q|)
    double resid_tol = 1e-8;        // factorization residual, relative to ||H+||
    double cond_limit = 1e12;       // eigenvector conditioning: hard failure
    double cond_expm_switch = 1e8;  // above this, evaluate via scaling-and-squaring
    int homotopy_steps = 16;        // complex-q continuation steps
};

// Generator of the modulating chain of the randomized process, with the
// diffusion/slope coefficient diagonals needed to form K(s).
//
// State layout: N diffusion states first, then the N*n_plus positive-slope
// states (period-major), then the N*n_minus negative-slope states.
struct GeneratorBlocks {
    int N = 0, n_plus = 0, n_minus = 0;
    Eigen::VectorXcd q;       // randomization rates per period
    Eigen::MatrixXcd Q;       // full generator
    Eigen::VectorXd s2_diag;  // sigma_i^2 on diffusion states, 0 elsewhere
    Eigen::VectorXd v_diag;   // mu_i on diffusion states, +1 / -1 on slope states
    double min_alpha_plus = 0.0;   // +inf when n_plus = 0
    double min_alpha_minus = 0.0;  // +inf when n_minus = 0

    int dim() const { return N * (1 + n_plus + n_minus); }
    int top_dim() const { return N * (1 + n_plus); }
    int bottom_dim() const { return N * n_minus; }

    Eigen::MatrixXcd k_matrix(cplx s) const;
};

// Assembles the block generator. Requires q_i != 0 and, for real q_i,
// Re(q_i) > 0 (complex rates arise from contour nodes and are continued
// analytically).
GeneratorBlocks build_generator(const PiecewiseModel& m, const Eigen::VectorXcd& q);

// Right-hand side of the determinant factorization for |det K(s)|:
// prod_i |psi_i(s) - q_i| prod_k |s - alpha_k+| prod_l |s + alpha_l-|.
double det_identity_rhs(const PiecewiseModel& m, const Eigen::VectorXcd& q, cplx s);

struct RootSet {
    // Both families carry N(1+n_plus) resp. N(1+n_minus) entries, ordered
    // period-major. For real positive q the plus family is positive and the
    // minus family negative; for complex q each family is the analytic
    // continuation along |q_i| -> q_i.
    std::vector<cplx> plus;
    std::vector<cplx> minus;
};

RootSet find_roots(const PiecewiseModel& m, const Eigen::VectorXcd& q,
                   const WhOptions& opts = {});

// One-sided spectral factorization. side = +1 factors the model as given
// (supremum / ascending states); side = -1 factors the mirrored model, in
// which case Qgen is the descending-passage generator whose eigenvalues are
// the minus-family roots of the original model.
struct SpectralFactorization {
    int side = +1;
    int N = 0, n_top = 0;
    Eigen::VectorXcd rho;   // tracked plus-family roots of the factored process
    Eigen::VectorXcd eig;   // eigenvalues of Qgen (= -rho)
    Eigen::MatrixXcd U, Uinv;
    Eigen::MatrixXcd eta;
    Eigen::MatrixXcd Qgen;
    double cond_U = 0.0;
    double resid_quadratic = 0.0;  // first matrix equation, relative
    double resid_coupling = 0.0;   // second matrix equation, relative
    bool use_spectral = true;      // false: evaluate through expm directly

    int dim() const { return static_cast<int>(Qgen.rows()); }

    // e1' Qgen^power e^{Qgen x} w,  x >= 0.
    cplx form(double x, int power, const Eigen::VectorXcd& w) const;
    cplx form_ones(double x, int power) const;
    // e1' Qgen^power e^{Qgen x} as a row vector.
    Eigen::RowVectorXcd row(double x, int power) const;
};

SpectralFactorization factor_supremum(const PiecewiseModel& m, const Eigen::VectorXcd& q,
                                      const WhOptions& opts = {});
SpectralFactorization factor_infimum(const PiecewiseModel& m, const Eigen::VectorXcd& q,
                                     const WhOptions& opts = {});

// Laplace transform (in the period lengths) of P(sup X <= x), resp.
// P(-inf X <= x):  (1 - e1' e^{Qgen x} 1) / prod q_i.
cplx sup_transform(const SpectralFactorization& f, double x, const Eigen::VectorXcd& q);
cplx inf_transform(const SpectralFactorization& f, double x, const Eigen::VectorXcd& q);

// Laplace transform of E[e^{s X_T}; level crossed], level +x for the
// supremum side and -x for the infimum side. `blocks` must be built from
// the un-mirrored model at the same q. Re(s) must lie inside the strip
// (-min alpha-, min alpha+); near-singular K(s) is nudged by 1e-9.
cplx joint_transform(const SpectralFactorization& f, const GeneratorBlocks& blocks,
                     double x, cplx s, const Eigen::VectorXcd& q);

}  // namespace hexb
