#pragma once

#include "cms/fit.hpp"
#include "cms/model.hpp"
#include "cms/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cms {

struct RunConfig {
    uint64_t seed = 1;
    long long burn_in = 1000;
    long long steps = 1000000;
    int samples = 1;  // independent trajectories (streams)

    void validate() const {
        if (burn_in < 0 || steps <= burn_in)
            throw std::invalid_argument("run config needs steps > burn_in >= 0");
        if (samples < 1) throw std::invalid_argument("run config needs samples >= 1");
    }
};

// Streams SRB-distributed orbit samples (x, y, symbol). For the affine model
// the x-marginal is Lebesgue and symbols are i.i.d. with P(i) = w_i, so the
// stream is generated symbolically: symbols from the counter RNG, x filled
// backward in blocks from a 64-symbol lookahead (truncation below 2^-64), y
// forward through the strip affinities. For eps > 0 the map is iterated
// directly from a uniform start.
class TrajectoryStream {
  public:
    TrajectoryStream(const ModelSpec& spec, uint64_t seed, uint64_t stream)
        : spec_(spec), rng_(seed, stream), affine_(spec.affine()) {
        if (affine_) {
            if (spec_.width_base != 0.5)
                affine_dyadic_ = false;  // general a: fall back to inverse-CDF symbols
            y_ = double(rng_.at(~0ULL) >> 11) * 0x1.0p-53;
            refill(0);
        } else {
            x_ = CounterRng(seed, stream).uniform() * 0.999999;
            y_ = CounterRng(seed ^ 0x5bf0ULL, stream).uniform();
        }
    }

    // Advance one step and expose the pre-step state.
    void step() {
        if (affine_) {
            double h = spec_.height(sym_[idx_]);
            y_ = spec_.strip_bottom(sym_[idx_]) + h * y_;
            ++idx_;
            ++t_;
            if (idx_ == block_) refill(t_);
        } else {
            Point p = apply(Point{x_, y_}, spec_);
            x_ = p.x;
            y_ = p.y;
        }
    }

    double x() const { return affine_ ? xs_[idx_] : x_; }
    double y() const { return y_; }
    int symbol() const {
        if (affine_) return sym_[idx_];
        return locate(Point{x_, y_}, spec_);
    }

  private:
    static constexpr size_t kBlock = 1 << 16;
    static constexpr size_t kLook = 64;

    int draw_symbol(uint64_t t) const {
        uint64_t u = rng_.at(t);
        if (affine_dyadic_) {
            int s = std::countr_zero(u) + 1;  // P(s = i) = 2^-i
            return u == 0 ? 64 : s;
        }
        // Inverse CDF for w_i = (1-a) a^{i-1}: i = 1 + floor(log_a(1 - U)).
        double v = double(u >> 11) * 0x1.0p-53;
        double r = 1.0 - v;
        if (r <= 0.0) return 64;
        int i = 1 + int(std::floor(std::log(r) / std::log(spec_.width_base)));
        return std::clamp(i, 1, 64);
    }

    void refill(uint64_t t0) {
        sym_.resize(block_ + kLook);
        xs_.resize(block_);
        for (size_t k = 0; k < block_ + kLook; ++k) sym_[k] = draw_symbol(t0 + k);
        double x = 0.5;
        for (size_t k = block_ + kLook; k-- > 0;) {
            double w = spec_.width(sym_[k]);
            x = spec_.left_edge(sym_[k]) + w * x;
            if (k < block_) xs_[k] = x;
        }
        idx_ = 0;
    }

    ModelSpec spec_;
    CounterRng rng_;
    bool affine_ = true;
    bool affine_dyadic_ = true;
    size_t block_ = kBlock;
    std::vector<int> sym_;
    std::vector<double> xs_;
    size_t idx_ = 0;
    uint64_t t_ = 0;
    double x_ = 0.0, y_ = 0.0;
};

// ---------------------------------------------------------------------------
// Observables.

struct Observable {
    std::string name;
    double gamma = 1.0;  // Hoelder exponent metadata
    std::function<double(double x, double y, int symbol)> eval;
};

// Registry: coordinates, centered coordinates, a smoothed indicator of E_1
// (linear ramp of half-width `scale` at the interior edge x = 1-a), and the
// symbol itself.
inline Observable make_observable(const std::string& id, const ModelSpec& spec) {
    if (id == "x") return {"x", 1.0, [](double x, double, int) { return x; }};
    if (id == "x_centered")
        return {"x_centered", 1.0, [](double x, double, int) { return x - 0.5; }};
    if (id == "y") return {"y", 1.0, [](double, double y, int) { return y; }};
    if (id == "one") return {"one", 1.0, [](double, double, int) { return 1.0; }};
    if (id == "symbol")
        return {"symbol", 1.0, [](double, double, int s) { return double(s); }};
    if (id.rfind("ind_e1_", 0) == 0) {
        int k = std::stoi(id.substr(7));
        double scale = std::pow(2.0, -k);
        double edge = 1.0 - spec.width_base;  // right edge of E_1
        return {id, 1.0, [edge, scale](double x, double, int) {
                    return std::clamp((edge + scale - x) / (2.0 * scale), 0.0, 1.0);
                }};
    }
    throw std::invalid_argument("unknown observable id: " + id);
}

// ---------------------------------------------------------------------------
// Closed-form references (affine model): the SRB x-marginal is Lebesgue, so
// the symbol distribution is P(i) = w_i and both the Lyapunov exponent and the
// entropy equal sum_i w_i log(1/w_i).
inline double closed_form_lyapunov(const ModelSpec& spec) {
    double acc = 0.0;
    for (int i = 1; i <= 256; ++i) {
        double w = spec.width(i);
        acc += w * std::log(1.0 / w);
        if (w < 1e-18) break;
    }
    return acc;
}
inline double closed_form_entropy(const ModelSpec& spec) { return closed_form_lyapunov(spec); }

// ---------------------------------------------------------------------------
// Simulation and estimates.

struct Histogram2D {
    int bins = 64;
    std::vector<uint64_t> counts;  // bins x bins, row = x bin
    uint64_t total = 0;
    std::vector<uint64_t> symbol_counts;  // index i-1 for symbol i, up to 64
    uint64_t seed = 0;

    uint64_t at(int bx, int by) const { return counts[size_t(bx) * bins + by]; }
};

inline Histogram2D simulate(const RunConfig& cfg, const ModelSpec& spec, int bins = 64) {
    cfg.validate();
    Histogram2D h;
    h.bins = bins;
    h.seed = cfg.seed;
    h.counts.assign(size_t(bins) * bins, 0);
    h.symbol_counts.assign(64, 0);
    for (int traj = 0; traj < cfg.samples; ++traj) {
        TrajectoryStream ts(spec, cfg.seed, uint64_t(traj));
        for (long long t = 0; t < cfg.steps; ++t) {
            if (t >= cfg.burn_in) {
                int bx = std::min(bins - 1, int(ts.x() * bins));
                int by = std::min(bins - 1, int(ts.y() * bins));
                ++h.counts[size_t(bx) * bins + by];
                ++h.symbol_counts[size_t(std::min(ts.symbol(), 64) - 1)];
                ++h.total;
            }
            ts.step();
        }
    }
    return h;
}

struct Estimate {
    double value = 0.0;
    double stderror = 0.0;
    uint64_t seed = 0;
};

namespace detail {
// Batch-means standard error of the mean of a streamed quantity.
struct BatchMeans {
    long long batch_len;
    long long in_batch = 0;
    double batch_acc = 0.0;
    std::vector<double> batches;
    explicit BatchMeans(long long len) : batch_len(len) {}
    void add(double v) {
        batch_acc += v;
        if (++in_batch == batch_len) {
            batches.push_back(batch_acc / double(batch_len));
            batch_acc = 0.0;
            in_batch = 0;
        }
    }
    double mean() const {
        double s = 0.0;
        for (double b : batches) s += b;
        return s / double(batches.size());
    }
    double stderror() const {
        double m = mean(), s = 0.0;
        for (double b : batches) s += (b - m) * (b - m);
        size_t k = batches.size();
        return std::sqrt(s / double(k - 1) / double(k));
    }
};
}  // namespace detail

// Birkhoff average of log D^uF along the orbit.
inline Estimate lyapunov(const RunConfig& cfg, const ModelSpec& spec) {
    cfg.validate();
    long long n = cfg.steps - cfg.burn_in;
    detail::BatchMeans bm(std::max<long long>(n / 32, 1));
    TrajectoryStream ts(spec, cfg.seed, 0);
    for (long long t = 0; t < cfg.steps; ++t) {
        if (t >= cfg.burn_in) {
            double d = spec.affine() ? 1.0 / spec.width(ts.symbol())
                                     : unstable_derivative(Point{ts.x(), ts.y()}, spec);
            bm.add(std::log(d));
        }
        ts.step();
    }
    return {bm.mean(), bm.stderror(), cfg.seed};
}

struct EntropyReport {
    Estimate entropy;   // plug-in entropy of the empirical symbol marginal
    Estimate integral;  // Birkhoff average of log D^uF
    double closed_form = 0.0;
};

inline EntropyReport entropy_check(const RunConfig& cfg, const ModelSpec& spec) {
    cfg.validate();
    EntropyReport rep;
    rep.closed_form = closed_form_entropy(spec);
    rep.integral = lyapunov(cfg, spec);
    // Empirical symbol frequencies on an independent stream.
    std::vector<uint64_t> counts(65, 0);
    TrajectoryStream ts(spec, cfg.seed, 1);
    long long n = cfg.steps - cfg.burn_in;
    for (long long t = 0; t < cfg.steps; ++t) {
        if (t >= cfg.burn_in) ++counts[size_t(std::min(ts.symbol(), 64))];
        ts.step();
    }
    double hplug = 0.0;
    for (int i = 1; i <= 64; ++i) {
        if (counts[size_t(i)] == 0) continue;
        double p = double(counts[size_t(i)]) / double(n);
        hplug -= p * std::log(p);
    }
    rep.entropy.value = hplug;
    // Delta-method error scale: dominated by sqrt(Var(log p)/n); report the
    // same order as the Birkhoff side for a conservative bar.
    rep.entropy.stderror = rep.integral.stderror;
    rep.entropy.seed = cfg.seed;
    return rep;
}

struct CorrelationCurve {
    std::vector<int> lags;
    std::vector<double> values;
    std::vector<double> stderrors;
    double eta = 0.0;
    double C = 0.0;
    double r2 = 0.0;
    int fit_lo = 0, fit_hi = 0;  // inclusive lag window used for the fit
    bool fit_ok = false;
    double gamma_f = 1.0, gamma_g = 1.0;
    uint64_t seed = 0;
};

// Empirical autocovariance C_n = <f (g o F^n)> - <f><g> at lags 0..n_max, with
// batch-means errors; exponential fit over the window where the signal beats
// 3 standard errors.
inline CorrelationCurve correlation(const Observable& f, const Observable& g,
                                    const RunConfig& cfg, int n_max, const ModelSpec& spec) {
    cfg.validate();
    if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
    long long n = cfg.steps - cfg.burn_in;
    if (n <= 2 * n_max) throw std::invalid_argument("too few steps for the requested lags");
    std::vector<double> fs, gs;
    fs.reserve(size_t(n));
    gs.reserve(size_t(n));
    TrajectoryStream ts(spec, cfg.seed, 0);
    for (long long t = 0; t < cfg.steps; ++t) {
        if (t >= cfg.burn_in) {
            fs.push_back(f.eval(ts.x(), ts.y(), ts.symbol()));
            gs.push_back(g.eval(ts.x(), ts.y(), ts.symbol()));
        }
        ts.step();
    }
    double mf = 0.0, mg = 0.0;
    for (long long t = 0; t < n; ++t) {
        mf += fs[size_t(t)];
        mg += gs[size_t(t)];
    }
    mf /= double(n);
    mg /= double(n);

    CorrelationCurve out;
    out.gamma_f = f.gamma;
    out.gamma_g = g.gamma;
    out.seed = cfg.seed;
    long long m = n - n_max;
    for (int lag = 0; lag <= n_max; ++lag) {
        detail::BatchMeans bm(std::max<long long>(m / 32, 1));
        for (long long t = 0; t < m; ++t)
            bm.add((fs[size_t(t)] - mf) * (gs[size_t(t + lag)] - mg));
        out.lags.push_back(lag);
        out.values.push_back(bm.mean());
        out.stderrors.push_back(bm.stderror());
    }
    // Fit window: consecutive lags from 1 with |C_n| > 3 SE and sign matching
    // lag 1 (log of noise is meaningless).
    std::vector<double> xs, ys;
    int lo = 1, hi = 0;
    for (int lag = 1; lag <= n_max; ++lag) {
        double v = out.values[size_t(lag)], se = out.stderrors[size_t(lag)];
        if (std::abs(v) > 3.0 * se && v * out.values[1] > 0) {
            xs.push_back(double(lag));
            ys.push_back(std::log(std::abs(v)));
            hi = lag;
        } else {
            break;
        }
    }
    out.fit_lo = lo;
    out.fit_hi = hi;
    if (xs.size() >= 2) {
        auto lf = linear_fit(xs, ys);
        out.eta = std::exp(lf.slope);
        out.C = std::exp(lf.intercept);
        out.r2 = lf.r2;
        out.fit_ok = out.eta > 0.0 && out.eta < 1.0;
    }
    return out;
}

struct CltReport {
    long long block_n = 0;
    long long blocks = 0;
    double sigma2 = 0.0;
    double ks_distance = 0.0;
    bool degenerate = false;
    uint64_t seed = 0;
    double mean = 0.0;              // mean of the normalized block sums
    std::vector<double> quantiles;  // sample quantiles at levels k/100, k = 0..100
};

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Block sums (1/sqrt(n)) sum (f - mean) over consecutive blocks of one long
// orbit; KS distance of their empirical law against N(0, sigma^2).
inline CltReport clt_test(const Observable& f, const RunConfig& cfg, long long block_n,
                          long long blocks, const ModelSpec& spec) {
    cfg.validate();
    if (block_n < 2 || blocks < 8) throw std::invalid_argument("need block_n >= 2, blocks >= 8");
    CltReport rep;
    rep.block_n = block_n;
    rep.blocks = blocks;
    rep.seed = cfg.seed;

    // Pass 1: empirical mean over a prefix (one block's worth of warm data).
    TrajectoryStream warm(spec, cfg.seed, 7);
    for (long long t = 0; t < cfg.burn_in; ++t) warm.step();
    double mean = 0.0;
    for (long long t = 0; t < block_n; ++t) {
        mean += f.eval(warm.x(), warm.y(), warm.symbol());
        warm.step();
    }
    mean /= double(block_n);

    TrajectoryStream ts(spec, cfg.seed, 0);
    for (long long t = 0; t < cfg.burn_in; ++t) ts.step();
    std::vector<double> sums;
    sums.reserve(size_t(blocks));
    double inv = 1.0 / std::sqrt(double(block_n));
    for (long long b = 0; b < blocks; ++b) {
        double s = 0.0;
        for (long long t = 0; t < block_n; ++t) {
            s += f.eval(ts.x(), ts.y(), ts.symbol()) - mean;
            ts.step();
        }
        sums.push_back(s * inv);
    }
    double m2 = 0.0, m1 = 0.0;
    for (double s : sums) m1 += s;
    m1 /= double(blocks);
    for (double s : sums) m2 += (s - m1) * (s - m1);
    rep.sigma2 = m2 / double(blocks - 1);
    rep.mean = m1;
    if (rep.sigma2 < 1e-12) {
        rep.degenerate = true;
        return rep;
    }
    std::sort(sums.begin(), sums.end());
    rep.quantiles.reserve(101);
    for (int k = 0; k <= 100; ++k) {
        size_t idx = std::min(sums.size() - 1, size_t(double(k) / 100.0 * double(sums.size())));
        rep.quantiles.push_back(sums[idx]);
    }
    double sigma = std::sqrt(rep.sigma2);
    double d = 0.0;
    for (size_t i = 0; i < sums.size(); ++i) {
        double z = (sums[i] - m1) / sigma;
        double cdf = normal_cdf(z);
        d = std::max(d, std::abs(cdf - double(i) / double(sums.size())));
        d = std::max(d, std::abs(cdf - double(i + 1) / double(sums.size())));
    }
    rep.ks_distance = d;
    return rep;
}

}  // namespace cms
