#include "hexb/frfft.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

namespace hexb {

namespace {

bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// FFTW plan creation is not thread-safe; execution is.
std::mutex& fftw_mutex() {
    static std::mutex mu;
    return mu;
}

void fft_inplace(std::vector<cplx>& a, int sign) {
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(a.size()),
                                reinterpret_cast<fftw_complex*>(a.data()),
                                reinterpret_cast<fftw_complex*>(a.data()), sign,
                                FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        fftw_destroy_plan(plan);
    }
}

// exp(i pi nu j^2) with the phase reduced in extended precision; j^2 grows
// to ~4e6 and plain double products lose ~1e-10 of phase there.
cplx sq_twiddle(double nu, long j, int sign) {
    const long double arg = static_cast<long double>(nu) * j * j;
    const long double red = std::fmod(arg, 2.0L) * 3.14159265358979323846264338327950288L;
    const double a = static_cast<double>(sign) * static_cast<double>(red);
    return {std::cos(a), std::sin(a)};
}

}  // namespace

std::vector<cplx> frfft(const std::vector<cplx>& x, double nu) {
    const size_t N = x.size();
    if (!is_pow2(N)) throw std::invalid_argument("frfft size must be a power of two");

    std::vector<cplx> y(2 * N, cplx(0.0, 0.0));
    std::vector<cplx> z(2 * N);
    for (size_t j = 0; j < N; ++j) {
        y[j] = x[j] * sq_twiddle(nu, static_cast<long>(j), -1);
        z[j] = sq_twiddle(nu, static_cast<long>(j), +1);
    }
    for (size_t j = N; j < 2 * N; ++j)
        z[j] = sq_twiddle(nu, static_cast<long>(j) - static_cast<long>(2 * N), +1);

    fft_inplace(y, FFTW_FORWARD);
    fft_inplace(z, FFTW_FORWARD);
    for (size_t j = 0; j < 2 * N; ++j) y[j] *= z[j];
    fft_inplace(y, FFTW_BACKWARD);

    std::vector<cplx> out(N);
    const double norm = 1.0 / static_cast<double>(2 * N);
    for (size_t m = 0; m < N; ++m)
        out[m] = sq_twiddle(nu, static_cast<long>(m), -1) * y[m] * norm;
    return out;
}

void FrfftPlan::validate() const {
    if (!is_pow2(static_cast<size_t>(N)) || N < 4 || N > (1 << 16))
        throw std::invalid_argument("FFT grid size must be a power of two in [4, 65536]");
    if (!(delta > 0.0)) throw std::invalid_argument("frequency step must be positive");
    if (!(x0 > 0.0)) throw std::invalid_argument("log-strike half-range must be positive");
    if (!(alpha > 0.0)) throw std::invalid_argument("dampening rate must be positive");
}

std::vector<double> invert_damped_fourier(const FrfftPlan& plan,
                                          const std::vector<cplx>& f_values) {
    plan.validate();
    if (f_values.size() != static_cast<size_t>(plan.N))
        throw std::invalid_argument("frequency sample count must match the plan");

    std::vector<cplx> y(plan.N);
    for (int j = 0; j < plan.N; ++j) {
        // e^{i x0 v_j} recentres the strike grid at -x0.
        const double phase = plan.x0 * plan.freq(j);
        y[j] = plan.trapezoid_weight(j) * cplx(std::cos(phase), std::sin(phase)) *
               f_values[j] * plan.delta;
    }
    const std::vector<cplx> g = frfft(y, plan.nu());

    std::vector<double> out(plan.N);
    for (int m = 0; m < plan.N; ++m)
        out[m] = std::exp(-plan.alpha * plan.strike_log(m)) * g[m].real() / M_PI;
    return out;
}

}  // namespace hexb
