#include "hexb/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <set>
#include <stdexcept>

#include "hexb/carr_madan.hpp"
#include "hexb/errors.hpp"
#include "hexb/util.hpp"

namespace hexb {

using Eigen::MatrixXcd;
using Eigen::RowVectorXcd;
using Eigen::VectorXcd;

namespace {

std::vector<double> key_of(const VectorXcd& q) {
    std::vector<double> key;
    key.reserve(2 * q.size());
    for (int i = 0; i < q.size(); ++i) {
        key.push_back(q(i).real());
        key.push_back(q(i).imag());
    }
    return key;
}

double log_distance_to_barrier(double spot, double barrier) {
    if (!(barrier > 0.0) || !(spot > barrier))
        throw std::invalid_argument("down-type contract needs 0 < barrier < spot");
    return std::log(spot / barrier);
}

}  // namespace

void require_valid(const PiecewiseModel& m) {
    const ValidationReport rep = validate_model(m);
    if (!rep.ok()) {
        std::string msg = "invalid model:";
        for (const auto& v : rep.violations) msg += "\n  - " + v;
        throw std::invalid_argument(msg);
    }
}

// ---------------------------------------------------------------------------
// DidPricer
// ---------------------------------------------------------------------------

// Distilled infimum factorization: the digital transform and its spot
// derivatives only need the spectral pairs (a_i, nu_i) with
// a_i = (e1'U)_i (U^{-1} 1)_i.
struct DidPricer::Node {
    bool spectral = true;
    VectorXcd a, nu;
    SpectralFactorization full;  // kept only for the expm fallback

    cplx eval(double x, int power) const {
        if (spectral) {
            cplx sum = 0.0;
            for (int i = 0; i < a.size(); ++i) {
                cplx term = a(i) * std::exp(nu(i) * x);
                for (int p = 0; p < power; ++p) term *= nu(i);
                sum += term;
            }
            return sum;
        }
        return full.form_ones(x, power);
    }
};

DidPricer::DidPricer(const PiecewiseModel& m, int talbot_m, int threads, WhOptions opts)
    : model_(m), talbot_m_(talbot_m), threads_(threads), opts_(opts) {
    require_valid(model_);
}

const DidPricer::Node& DidPricer::node_at(const std::vector<cplx>& q) const {
    VectorXcd shifted(model_.num_periods());
    for (int i = 0; i < shifted.size(); ++i) shifted(i) = q[i] + model_.r;

    const std::vector<double> key = key_of(shifted);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
        auto node = std::make_shared<Node>();
        SpectralFactorization f = factor_infimum(model_, shifted, opts_);
        node->spectral = f.use_spectral;
        if (f.use_spectral) {
            const VectorXcd c = f.Uinv * VectorXcd::Ones(f.dim());
            node->a = f.U.row(0).transpose().cwiseProduct(c);
            node->nu = f.eig;
        } else {
            node->full = std::move(f);
        }
        it = cache_.emplace(key, std::move(node)).first;
    }
    return *it->second;
}

void DidPricer::warm_cache() const {
    if (threads_ <= 1) return;
    // Collect the node tuples the inversion will visit, then factorize them
    // in parallel; the inversion itself then only reads the cache.
    std::set<std::vector<double>> seen;
    std::vector<std::vector<cplx>> work;
    auto collect = [&](const std::vector<cplx>& q) -> cplx {
        VectorXcd shifted(model_.num_periods());
        for (int i = 0; i < shifted.size(); ++i) shifted(i) = q[i] + model_.r;
        if (seen.insert(key_of(shifted)).second &&
            cache_.find(key_of(shifted)) == cache_.end())
            work.push_back(q);
        return cplx(0.0, 0.0);
    };
    talbot_invert(collect, model_.schedule(), talbot_m_);
    std::mutex mu;
    parallel_for(work.size(), threads_, [&](size_t i) {
        VectorXcd shifted(model_.num_periods());
        for (int j = 0; j < shifted.size(); ++j) shifted(j) = work[i][j] + model_.r;
        SpectralFactorization f = factor_infimum(model_, shifted, opts_);
        auto node = std::make_shared<Node>();
        node->spectral = f.use_spectral;
        if (f.use_spectral) {
            const VectorXcd c = f.Uinv * VectorXcd::Ones(f.dim());
            node->a = f.U.row(0).transpose().cwiseProduct(c);
            node->nu = f.eig;
        } else {
            node->full = std::move(f);
        }
        std::lock_guard<std::mutex> lock(mu);
        cache_.emplace(key_of(shifted), std::move(node));
    });
}

double DidPricer::invert(double spot, double barrier, int power) const {
    const double x = log_distance_to_barrier(spot, barrier);
    warm_cache();
    auto fhat = [&](const std::vector<cplx>& q) -> cplx {
        cplx denom = 1.0;
        for (size_t i = 0; i < q.size(); ++i) denom *= q[i] + model_.r;
        return node_at(q).eval(x, power) / denom;
    };
    return talbot_invert(fhat, model_.schedule(), talbot_m_);
}

double DidPricer::price(double spot, double barrier) const {
    return invert(spot, barrier, 0);
}

PriceAndGreeks DidPricer::greeks(double spot, double barrier) const {
    PriceAndGreeks out;
    out.method = "transform";
    out.params.talbot_m = talbot_m_;
    out.params.threads = threads_;
    out.price = invert(spot, barrier, 0);
    out.delta = invert(spot, barrier, 1) / spot;
    out.gamma = (invert(spot, barrier, 2) - invert(spot, barrier, 1)) / (spot * spot);
    return out;
}

cplx DidPricer::transform(const VectorXcd& q, double spot, double barrier,
                          int power) const {
    const double x = log_distance_to_barrier(spot, barrier);
    std::vector<cplx> qv(q.data(), q.data() + q.size());
    cplx denom = 1.0;
    for (int i = 0; i < q.size(); ++i) denom *= q(i) + model_.r;
    return node_at(qv).eval(x, power) / denom;
}

// ---------------------------------------------------------------------------
// DicPricer
// ---------------------------------------------------------------------------

struct DicPricer::Tuple {
    VectorXcd q;      // shifted rates (q + r)
    cplx weight;      // accumulated Talbot weight, inversion scale included
    cplx c;           // prod of shifted rates
    SpectralFactorization fact;
    GeneratorBlocks blocks;
    VectorXcd k0_ones;                 // K(0) 1
    std::vector<VectorXcd> w_by_freq;  // selected K(b_j)^{-1} K(0) 1, optional
};

DicPricer::~DicPricer() = default;
DicPricer::DicPricer(DicPricer&&) noexcept = default;
DicPricer& DicPricer::operator=(DicPricer&&) noexcept = default;

DicPricer::DicPricer(const PiecewiseModel& m, double barrier, NumericalParams params,
                     WhOptions opts)
    : model_(m), barrier_(barrier), params_(params), opts_(opts) {
    require_valid(model_);
    params_.plan().validate();
    if (!(barrier_ > 0.0)) throw std::invalid_argument("barrier must be positive");
    for (const auto& p : model_.periods)
        for (const auto& f : p.pos_jumps)
            if (params_.damp_alpha + 1.0 >= f.rate)
                throw std::domain_error(
                    "dampened payoff not integrable: alpha + 1 must be below the "
                    "smallest positive jump rate");
}

void DicPricer::build_tuples() const {
    if (!tuples_.empty()) return;
    const int N = model_.num_periods();
    const int M = params_.talbot_m;
    const std::vector<double> T = model_.schedule();
    const TalbotGrid& grid = TalbotGrid::get(M);

    cplx scale = 1.0;
    for (double t : T) scale /= 5.0 * t;

    // Group every (node multi-index, conjugation pattern) by the actual rate
    // tuple; Talbot weights of coincident tuples add up.
    std::map<std::vector<double>, std::pair<VectorXcd, cplx>> grouped;
    std::vector<int> idx(N, 0);
    for (;;) {
        for (unsigned c = 0; c < (1u << N); ++c) {
            VectorXcd q(N);
            cplx w = scale;
            for (int n = 0; n < N; ++n) {
                cplx node = grid.nodes[idx[n]];
                cplx beta = grid.weights[idx[n]];
                if (c & (1u << n)) {
                    node = std::conj(node);
                    beta = std::conj(beta);
                }
                q(n) = node / T[n] + model_.r;
                w *= beta;
            }
            auto [it, fresh] = grouped.try_emplace(key_of(q), q, w);
            if (!fresh) it->second.second += w;
        }
        int n = 0;
        while (n < N && ++idx[n] == M) idx[n++] = 0;
        if (n == N) break;
    }

    tuples_.resize(grouped.size());
    std::vector<const std::pair<VectorXcd, cplx>*> items;
    items.reserve(grouped.size());
    for (const auto& kv : grouped) items.push_back(&kv.second);
    parallel_for(items.size(), params_.threads, [&](size_t i) {
        Tuple& t = tuples_[i];
        t.q = items[i]->first;
        t.weight = items[i]->second;
        cplx c = 1.0;
        for (int n = 0; n < t.q.size(); ++n) c *= t.q(n);
        t.c = c;
        t.fact = factor_infimum(model_, t.q, opts_);
        t.blocks = build_generator(model_, t.q);
        t.k0_ones = t.blocks.Q * VectorXcd::Ones(t.blocks.dim());
    });

    // Per-frequency solve cache: keep it when it fits comfortably in memory.
    const size_t sel_dim = static_cast<size_t>(model_.num_periods()) *
                           (1 + model_.n_minus());
    const size_t bytes =
        tuples_.size() * static_cast<size_t>(params_.fft_n) * sel_dim * sizeof(cplx);
    freq_cache_on_ = bytes < (size_t(512) << 20);
}

const DicPricer::Curve& DicPricer::curve(double spot) const {
    auto found = curves_.find(spot);
    if (found != curves_.end()) return found->second;

    const double x = log_distance_to_barrier(spot, barrier_);
    build_tuples();

    const FrfftPlan plan = params_.plan();
    const int NF = plan.N;
    const double alpha = plan.alpha;
    const int N = model_.num_periods();
    const int n_minus = model_.n_minus();
    const int sel_dim = N * (1 + n_minus);

    std::vector<cplx> acc_price(NF, cplx(0.0, 0.0));
    std::vector<cplx> acc_delta(NF, cplx(0.0, 0.0));
    std::vector<cplx> acc_gamma(NF, cplx(0.0, 0.0));

    std::vector<size_t> order(tuples_.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::mutex acc_mu;
    parallel_for(tuples_.size(), params_.threads, [&](size_t ti) {
        Tuple& t = tuples_[ti];
        const RowVectorXcd r0 = t.fact.row(x, 0);
        const RowVectorXcd r1 = t.fact.row(x, 1);
        const RowVectorXcd r2 = t.fact.row(x, 2);

        const bool fill_cache = freq_cache_on_ && t.w_by_freq.empty();
        if (fill_cache) t.w_by_freq.resize(NF);

        std::vector<cplx> lp(NF), ld(NF), lg(NF);
        for (int j = 0; j < NF; ++j) {
            const cplx b(alpha + 1.0, plan.freq(j));
            VectorXcd w_sel;
            if (freq_cache_on_ && !fill_cache) {
                w_sel = t.w_by_freq[j];
            } else {
                const MatrixXcd K = t.blocks.k_matrix(b);
                const VectorXcd w = K.partialPivLu().solve(t.k0_ones);
                w_sel.resize(sel_dim);
                w_sel << w.head(N), w.tail(t.blocks.bottom_dim());
                if (fill_cache) t.w_by_freq[j] = w_sel;
            }
            const cplx base =
                std::exp(-b * x) * t.weight / (t.c * b * (b - 1.0));
            lp[j] = spot * base * (r0 * w_sel)(0);
            ld[j] = base * (r1 * w_sel)(0);
            lg[j] = base * ((r2 - r1) * w_sel)(0) / spot;
        }
        std::lock_guard<std::mutex> lock(acc_mu);
        for (int j = 0; j < NF; ++j) {
            acc_price[j] += lp[j];
            acc_delta[j] += ld[j];
            acc_gamma[j] += lg[j];
        }
    });

    Curve curve;
    curve.log_strikes.resize(NF);
    for (int j = 0; j < NF; ++j) curve.log_strikes[j] = plan.strike_log(j);
    curve.price = invert_damped_fourier(plan, acc_price);
    curve.delta = invert_damped_fourier(plan, acc_delta);
    curve.gamma = invert_damped_fourier(plan, acc_gamma);
    return curves_.emplace(spot, std::move(curve)).first->second;
}

PriceAndGreeks DicPricer::at_strike(double spot, double strike) const {
    if (!(strike > 0.0)) throw std::invalid_argument("strike must be positive");
    const Curve& c = curve(spot);
    const double k = std::log(strike / spot);
    if (k < c.log_strikes.front() || k > c.log_strikes.back())
        throw std::invalid_argument("strike outside the transform grid");

    PriceAndGreeks out;
    out.method = "transform";
    out.params = params_;

    const double lambda = params_.plan().lambda();
    const size_t nearest = static_cast<size_t>(
        std::clamp<long>(std::lround((k - c.log_strikes.front()) / lambda), 0,
                         static_cast<long>(c.log_strikes.size()) - 1));
    if (std::abs(c.log_strikes[nearest] - k) < 1e-9) {
        out.price = c.price[nearest];
        out.delta = c.delta[nearest];
        out.gamma = c.gamma[nearest];
        return out;
    }
    out.price = MonotoneCubic(c.log_strikes, c.price)(k);
    out.delta = MonotoneCubic(c.log_strikes, c.delta)(k);
    out.gamma = MonotoneCubic(c.log_strikes, c.gamma)(k);
    return out;
}

// ---------------------------------------------------------------------------

double european_call(const PiecewiseModel& m, int num_periods, double strike,
                     double damp_alpha) {
    require_valid(m);
    return carr_madan_call(m, num_periods, strike, damp_alpha);
}

}  // namespace hexb
