#pragma once

#include <complex>
#include <string>
#include <vector>

namespace hexb {

using cplx = std::complex<double>;

// One family of the hyper-exponential jump mixture: jumps arrive at rate
// `intensity` per year, absolute jump sizes are Exp(`rate`) distributed.
struct JumpFamily {
    double intensity = 0.0;  // pi >= 0
    double rate = 0.0;       // alpha; > 1 for positive families, > 0 for negative

    JumpFamily() = default;
    JumpFamily(double pi, double alpha) : intensity(pi), rate(alpha) {}
};

// Constant-parameter segment of the piecewise model. The diffusion drift
// `mu` is always derived from the martingale condition (see
// risk_neutral_drift); it is stored so the hot paths do not recompute it.
struct ModelPeriod {
    double duration = 0.0;  // years, > 0
    double sigma = 0.0;     // per sqrt(year), > 0
    double mu = 0.0;        // per year, derived
    std::vector<JumpFamily> pos_jumps;
    std::vector<JumpFamily> neg_jumps;

    double lambda_plus() const;   // total positive jump rate
    double lambda_minus() const;  // total negative jump rate
};

// Exponential-of-additive-process asset model with piecewise constant
// parameters. Periods are contiguous; maturity i is the cumulative sum of
// the first i durations.
struct PiecewiseModel {
    std::vector<ModelPeriod> periods;
    double r = 0.0;     // risk-free rate, per year
    double d = 0.0;     // dividend yield, per year
    double spot = 0.0;  // S0 > 0

    int num_periods() const { return static_cast<int>(periods.size()); }
    int n_plus() const;   // positive jump family count (uniform across periods)
    int n_minus() const;

    double maturity(int i) const;       // T_i = sum of first i durations, i in [1, N]
    double total_maturity() const;      // T_N
    std::vector<double> schedule() const;  // (T^(1), ..., T^(N))
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

// Checks every structural invariant of the model; returns the full list of
// violations rather than throwing.
ValidationReport validate_model(const PiecewiseModel& m);

// Unique diffusion drift making exp(X) carry the risk-neutral expected
// growth r - d over the period. Throws std::domain_error if a positive
// jump rate is <= 1 (the exponential moment would be infinite).
double risk_neutral_drift(const ModelPeriod& p, double r, double d);

// Replaces every period drift by its risk-neutral value.
void apply_risk_neutral_drift(PiecewiseModel& m);

// Characteristic exponent Psi^(i)(u) of the period-i increment per unit
// time. Throws std::domain_error on pole inputs u = -i*alpha+ or
// u = +i*alpha-.
cplx char_exponent(const ModelPeriod& p, cplx u);

// Laplace-style exponent psi(s) = Psi(-i s), the convenient form for the
// root equations; poles at s = alpha+ and s = -alpha-.
cplx laplace_exponent(const ModelPeriod& p, cplx s);
double laplace_exponent(const ModelPeriod& p, double s);
// First derivative d psi / d s (used by Newton polishing).
cplx laplace_exponent_deriv(const ModelPeriod& p, cplx s);

// Characteristic function of X at maturity T_i, i.e. over the first
// `num_periods` periods: exp(sum_j T^(j) Psi^(j)(u)).
cplx char_fn_cumulative(const PiecewiseModel& m, int num_periods, cplx u);

// Jump measure density at x != 0.
double levy_density(const ModelPeriod& p, double x);

// Model for -X: drift negated, jump families swapped. Used by the
// infimum-side factorization; deliberately not risk-neutral.
PiecewiseModel mirrored(const PiecewiseModel& m);

// Restricts the model to a period prefix matching `schedule` (durations
// must agree within 1e-9). Throws std::invalid_argument otherwise.
PiecewiseModel truncate_to_schedule(const PiecewiseModel& m,
                                    const std::vector<double>& schedule);

}  // namespace hexb
