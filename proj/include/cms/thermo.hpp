#pragma once

#include "cms/fit.hpp"
#include "cms/measure.hpp"
#include "cms/model.hpp"
#include "cms/returns.hpp"
#include "cms/word.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cms {

struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// phi = -log D^uF, optionally shifted by a constant p. In the affine model phi
// is constant on each rectangle: phi|E_i = log w_i (with defaults, -i log 2).
struct Potential {
    ModelSpec spec;
    double shift = 0.0;

    double phi_symbol(int i) const {
        // Affine value; for eps > 0 callers evaluate along orbits instead.
        return std::log(spec.width(i)) + shift;
    }
};

struct PotentialValue {
    double value = 0.0;     // phi_n + n * shift
    Rational weight = 0;    // exp(value - n*shift) as an exact rational (affine only)
    bool exact = false;
};

// Birkhoff sum of phi over the word's symbols (n = len steps). For the affine
// model the unshifted weight is exactly the cylinder width.
inline PotentialValue potential_value(const Word& w, const Potential& pot) {
    if (w.empty()) throw std::invalid_argument("potential_value needs a nonempty word");
    check_symbols(w);
    PotentialValue out;
    if (pot.spec.affine()) {
        Rational weight = 1;
        for (int s : w) weight *= pot.spec.width_exact(s);
        out.weight = weight;
        out.exact = true;
        out.value = std::log(to_double(weight)) + double(w.size()) * pot.shift;
        return out;
    }
    // Evaluate along the backward-reconstructed orbit through the cylinder,
    // seeded at the representative x = 1/2 past the last symbol.
    double x = 0.5;
    double sum = 0.0;
    for (auto it = w.rbegin(); it != w.rend(); ++it) {
        double t = pot.spec.g_inverse(x);
        x = pot.spec.left_edge(*it) + pot.spec.width(*it) * t;
        sum += -std::log(pot.spec.g_prime(t) / pot.spec.width(*it));
    }
    out.value = sum + double(w.size()) * pot.shift;
    return out;
}

// Induced potential: phi summed over the word's first return_time symbols (the
// landing symbol is excluded); the shift contributes p * return_time.
inline PotentialValue induced_potential(const ReturnWord& rw, const Potential& pot) {
    Word steps(rw.word.begin(), rw.word.end() - 1);
    Potential unshifted = pot;
    unshifted.shift = 0.0;
    PotentialValue out = potential_value(steps, unshifted);
    out.value += pot.shift * rw.return_time;
    return out;
}

enum class SumMode {
    tower,       // cyclically admissible words of length n anchored at symbol 1
    induced_mp,  // n-fold chains of capped return words, entry (1,1)
    induced_t1,  // n-fold loops of first-return-to-1 words (all-ones matrix)
};

struct ThermoCaps {
    int symbol_cap = 20;   // matrix alphabet truncation (induced_mp)
    int mp1_len_cap = 8;   // word-length truncation for first-return-to-1 sums
    double beta = 0.0;     // geometric tail base of the return times; 0 = fit from return_tail
    bool beta_is_fitted = true;
    int tail_n_max = 12;
};

inline double resolve_beta(const ThermoCaps& caps, const ModelSpec& spec) {
    if (caps.beta > 0.0) return caps.beta;
    return return_tail(caps.tail_n_max, spec).beta;
}

struct ZValue {
    int n = 0;
    double lo = 0.0, hi = 0.0;            // certified bounds on Z_n
    Rational exact_lo = 0, exact_hi = 0;  // exact path (tower / p = 0), else unset
    bool exact = false;
};

namespace detail {

// U_d(S) = sum over admissible continuations of length d from budget S of the
// product of their symbol widths. U_1 has the closed form 1 - a^S.
inline Rational tower_u(int d, long long S, const Rational& a,
                        std::map<std::pair<int, long long>, Rational>& memo) {
    if (d == 0) return 1;
    if (d == 1) return Rational(1) - rat_pow(a, unsigned(S));
    auto key = std::make_pair(d, S);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    Rational acc = 0;
    Rational w = (Rational(1) - a);  // w_1
    for (long long x = 1; x <= S; ++x) {
        acc += w * tower_u(d - 1, S + x, a, memo);
        w *= a;
    }
    memo.emplace(key, acc);
    return acc;
}

}  // namespace detail

// Exact tower partition sum at zero shift: sum over admissible words
// [1, x_1, ..., x_{n-1}] of the product of all n symbol widths. Anchoring at 1
// makes cyclic admissibility equivalent to plain admissibility (wrapping past
// the anchor faces threshold 1, which every budget meets).
inline Rational tower_partition_exact(int n, const ModelSpec& spec) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    std::map<std::pair<int, long long>, Rational> memo;
    return (Rational(1) - spec.width_base_exact) *
           detail::tower_u(n - 1, 1, spec.width_base_exact, memo);
}

// Transition weights of the capped return-word matrix at shift p:
// A[s][t] = sum over return words s -> t of exp(induced phi + p * rt).
//
// Enumerating return words is hopeless at cap 20 (the 1 -> 20 list alone has
// >1e8 entries), so the sum runs as a dynamic program over stem summaries.
// A stem [s, x_1..x_k] is summarized by (B, g): B is the budget of the oldest
// still-admissible proper suffix (the largest such budget, since older
// suffixes carry larger sums) and B + g is the full prefix budget. Appending
// x <= B extends the oldest suffix (B' = B + x, g' = g); x > B kills every
// live suffix at once and [x] becomes the oldest, so B' = x and the full
// budget B + g + x gives g' = B + g.
// Landing on t is legal when B < t <= B + g and the definitional length cap
// k <= t - s holds. States with B >= cap are dead (no capped t can kill them)
// and g clamps at the cap without loss, so the DP is exact for the capped
// matrix. Affine model only: for a perturbed model the induced potential
// reads the whole future and does not factor over symbols.
inline std::vector<std::vector<double>> induced_matrix(const Potential& pot,
                                                       const ThermoCaps& caps) {
    if (pot.spec.perturbation != 0.0)
        throw std::invalid_argument(
            "induced_matrix: needs the affine model (perturbation = 0); "
            "use the tower reading for perturbed models");
    const int S = caps.symbol_cap;
    if (S < 1) throw std::invalid_argument("symbol_cap must be >= 1");
    const double a = pot.spec.width_base;
    const double ep = std::exp(pot.shift);
    std::vector<double> w(size_t(S) + 1, 0.0);  // w_x = (1-a) a^{x-1}
    for (int x = 1; x <= S; ++x) w[size_t(x)] = (1.0 - a) * std::pow(a, x - 1);

    std::vector<std::vector<double>> A(size_t(S), std::vector<double>(size_t(S), 0.0));
    // cur[B][g]: summed stem weights w_s * prod w_{x_i} with oldest-alive
    // budget B and full budget B + g, at the current stem length k.
    std::vector<std::vector<double>> cur(size_t(S), std::vector<double>(size_t(S) + 1, 0.0));
    std::vector<std::vector<double>> nxt = cur;
    for (int s = 1; s <= S; ++s) {
        A[size_t(s - 1)][size_t(s - 1)] += w[size_t(s)] * ep;  // rt = 1 word [s, s]
        for (auto& row : cur) std::fill(row.begin(), row.end(), 0.0);
        for (int x = 1; x <= std::min(s, S - 1); ++x)
            cur[size_t(x)][size_t(std::min(s, S))] += w[size_t(s)] * w[size_t(x)];
        for (int k = 1; k <= S - s; ++k) {
            double erk = std::pow(ep, k + 1);
            for (auto& row : nxt) std::fill(row.begin(), row.end(), 0.0);
            bool any = false;
            for (int B = 1; B < S; ++B)
                for (int g = 0; g <= S; ++g) {
                    double W = cur[size_t(B)][size_t(g)];
                    if (W == 0.0) continue;
                    int tmax = std::min(B + g, S);
                    for (int t = std::max(B + 1, s + k); t <= tmax; ++t)
                        A[size_t(s - 1)][size_t(t - 1)] += W * erk;
                    if (k == S - s) continue;  // no room left for a longer stem
                    for (int x = 1; x <= B; ++x) {  // oldest suffix survives
                        if (B + x >= S) break;
                        nxt[size_t(B + x)][size_t(g)] += W * w[size_t(x)];
                        any = true;
                    }
                    for (int x = B + 1; x <= std::min(B + g, S - 1); ++x) {  // full kill
                        nxt[size_t(x)][size_t(std::min(B + g, S))] += W * w[size_t(x)];
                        any = true;
                    }
                }
            cur.swap(nxt);
            if (!any) break;
        }
    }
    return A;
}

struct T1Sum {
    double lo = 0.0, hi = 0.0;  // one-loop weight sum M(p); hi includes fitted tail
    double partial = 0.0;       // truncated sum alone
    double beta1 = 0.0;         // fitted per-step tail ratio of the loop masses
    bool tail_finite = true;
};

// One-loop weight sum over first-return-to-1 words at shift p. The truncated
// sum is a certain lower bound; the upper tail uses a geometric fit to the
// per-return-time masses (flagged by tail_finite when the fitted series
// converges at this shift).
inline T1Sum t1_loop_sum(const Potential& pot, const ThermoCaps& caps) {
    auto words = mp1_words(caps.mp1_len_cap, Mp1Mode::strict_suffix);
    std::map<int, double> by_rt;
    double partial = 0.0;
    int rt_max = 0;
    for (const auto& w : words) {
        double v = std::exp(induced_potential(w, pot).value);
        partial += v;
        by_rt[w.return_time] += std::exp(induced_potential(w, pot).value - pot.shift * w.return_time);
        rt_max = std::max(rt_max, w.return_time);
    }
    // Fit the unshifted masses q_n ~ C1 * beta1^n over the largest return times.
    std::vector<double> xs, ys;
    for (const auto& [n, q] : by_rt)
        if (n >= 3 && q > 0) {
            xs.push_back(double(n));
            ys.push_back(std::log(q));
        }
    T1Sum out;
    out.partial = partial;
    out.lo = partial;
    if (xs.size() >= 2) {
        auto lf = linear_fit(xs, ys);
        out.beta1 = std::exp(lf.slope);
        double C1 = std::exp(lf.intercept);
        double r = out.beta1 * std::exp(pot.shift);
        if (r < 1.0) {
            out.hi = partial + C1 * std::pow(r, rt_max + 1) / (1.0 - r);
        } else {
            out.hi = std::numeric_limits<double>::infinity();
            out.tail_finite = false;
        }
    } else {
        out.hi = partial;
    }
    return out;
}

// Z_n under the chosen reading. Induced modes throw DivergenceError when the
// shift reaches log(1/beta), the finiteness boundary inherited from the
// return-time tail (beta is the fitted tail base unless overridden).
inline ZValue partition_sum(int n, const Potential& pot, SumMode mode, const ThermoCaps& caps) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    ZValue out;
    out.n = n;
    if (mode == SumMode::tower) {
        Rational z = tower_partition_exact(n, pot.spec);
        double scale = std::exp(pot.shift * n);
        out.exact_lo = out.exact_hi = z;
        out.exact = pot.shift == 0.0;
        out.lo = out.hi = scale * to_double(z);
        return out;
    }
    double beta = resolve_beta(caps, pot.spec);
    if (pot.shift >= std::log(1.0 / beta))
        throw DivergenceError("shift p >= log(1/beta): induced sum diverges at p = " +
                              std::to_string(pot.shift));
    if (mode == SumMode::induced_mp) {
        auto A = induced_matrix(pot, caps);
        int S = caps.symbol_cap;
        // v = e_1^T A^n, then Z_n = v[0] picking the return to state 1.
        std::vector<double> v(size_t(S), 0.0);
        v[0] = 1.0;
        for (int k = 0; k < n; ++k) {
            std::vector<double> nv(size_t(S), 0.0);
            for (int i = 0; i < S; ++i) {
                if (v[size_t(i)] == 0.0) continue;
                for (int j = 0; j < S; ++j) nv[size_t(j)] += v[size_t(i)] * A[size_t(i)][size_t(j)];
            }
            v.swap(nv);
        }
        out.lo = out.hi = v[0];
        return out;
    }
    T1Sum m = t1_loop_sum(pot, caps);
    out.lo = std::pow(m.lo, n);
    out.hi = std::isfinite(m.hi) ? std::pow(m.hi, n) : std::numeric_limits<double>::infinity();
    return out;
}

struct PressureEstimate {
    std::vector<ZValue> table;
    std::vector<double> slopes;  // (1/n) log Z_n midpoints
    double pg_lo = 0.0, pg_hi = 0.0;
    bool contains_zero = false;
    bool contains_zero_exact = false;  // tower mode: decided in rational arithmetic
    SumMode mode = SumMode::tower;
    double shift = 0.0;
    Rational cantor_lower = 0;  // certified lower bound used by the tower bracket
};

// Gurevich pressure estimate. Tower mode brackets P_G by superadditivity
// (anchored concatenation splices two admissible loops) from below and by the
// uniform lower bound Z_n >= c/2 from above:
//   (1/n) log Z_n <= P_G <= (1/n) log(2 Z_n / c),  c = certified Cantor mass.
inline PressureEstimate gurevich_pressure(const Potential& pot, int n_max, SumMode mode,
                                          const ThermoCaps& caps = {}) {
    if (n_max < 4) throw std::invalid_argument("n_max must be >= 4");
    PressureEstimate out;
    out.mode = mode;
    out.shift = pot.shift;
    for (int n = 1; n <= n_max; ++n) {
        out.table.push_back(partition_sum(n, pot, mode, caps));
        const ZValue& z = out.table.back();
        double mid = std::isfinite(z.hi) ? 0.5 * (z.lo + z.hi) : z.lo;
        out.slopes.push_back(std::log(mid) / n);
    }
    const ZValue& zn = out.table.back();
    if (mode == SumMode::tower) {
        MeasureInterval c = relative_measure(1, 60, pot.spec);
        out.cantor_lower = c.lower;
        out.pg_lo = std::log(zn.lo) / n_max;
        out.pg_hi = std::log(2.0 * zn.hi / to_double(c.lower)) / n_max;
        // The bracket contains 0 iff Z_n <= 1 and 2 Z_n >= c; at the default
        // model the second margin is ~1.5e-5, far below double-log resolution,
        // so the containment test stays in exact rationals.
        if (pot.shift == 0.0) {
            out.contains_zero = zn.exact_lo <= 1 && 2 * zn.exact_hi >= c.lower;
            out.contains_zero_exact = true;
        } else {
            out.contains_zero = out.pg_lo <= 0.0 && out.pg_hi >= 0.0;
        }
    } else {
        out.pg_lo = std::log(zn.lo) / n_max;
        out.pg_hi = std::isfinite(zn.hi) ? std::log(zn.hi) / n_max
                                         : std::numeric_limits<double>::infinity();
        out.contains_zero = out.pg_lo <= 0.0 && out.pg_hi >= 0.0;
    }
    return out;
}

struct DiscriminantEntry {
    double p = 0.0;
    double value_lo = 0.0, value_hi = 0.0;  // induced pressure estimate
    bool finite = true;                     // false = divergence marker
};

struct DiscriminantScan {
    std::vector<DiscriminantEntry> entries;
    bool positive = false;   // exists p with 0 < value < infinity
    double beta = 0.0;       // tail base used for the finiteness threshold
    bool beta_is_fitted = true;
    double threshold = 0.0;  // log(1/beta)
};

// Scans shifted induced pressures in the capped return-word (matrix) reading.
// Finiteness beyond the truncation is decided by the fitted tail threshold;
// divergent entries are reported as markers, not errors.
inline DiscriminantScan discriminant_scan(const std::vector<double>& p_grid, const ModelSpec& spec,
                                          const ThermoCaps& caps = {}, int n_probe = 8) {
    DiscriminantScan out;
    out.beta = resolve_beta(caps, spec);
    out.beta_is_fitted = caps.beta <= 0.0 || caps.beta_is_fitted;
    out.threshold = std::log(1.0 / out.beta);
    ThermoCaps resolved = caps;
    resolved.beta = out.beta;
    for (double p : p_grid) {
        DiscriminantEntry e;
        e.p = p;
        if (p >= out.threshold) {
            e.finite = false;
            e.value_lo = e.value_hi = std::numeric_limits<double>::infinity();
        } else {
            Potential pot{spec, p};
            ZValue z = partition_sum(n_probe, pot, SumMode::induced_mp, resolved);
            e.value_lo = std::log(z.lo) / n_probe;
            e.value_hi = std::log(z.hi) / n_probe;
            if (e.finite && e.value_lo > 0.0) out.positive = true;
        }
        out.entries.push_back(e);
    }
    return out;
}

struct CohomologyValue {
    double value = 0.0;
    double tail_bound = 0.0;
};

// Truncated series u(x,y) = sum_k [Phi(F^k(x,y)) - Phi(F^k(x,y0))] against the
// reference leaf y0 = 0 of the point's rectangle. The family is a skew product
// (Phi reads only x), so every term vanishes identically; the tail bound is
// the generic geometric one from the variation constants.
inline CohomologyValue cohomology_u(const Point& p, int depth, const ModelSpec& spec,
                                    double var_C, double var_theta0) {
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    check_in_square(p);
    Point a = p, b{p.x, 0.0};
    double sum = 0.0;
    for (int k = 0; k < depth; ++k) {
        sum += std::log(unstable_derivative(a, spec)) - std::log(unstable_derivative(b, spec));
        a = apply(a, spec);
        b = apply(b, spec);
    }
    CohomologyValue out;
    out.value = sum;
    out.tail_bound = (var_theta0 > 0.0 && var_theta0 < 1.0)
                         ? var_C * std::pow(var_theta0, depth) / (1.0 - var_theta0)
                         : 0.0;
    return out;
}

struct SeparationTimes {
    int t = 0;   // first disagreement index (0-based)
    int s1 = 0;  // count of 1-symbols among indices 0..t-1
};

inline SeparationTimes separation(const Word& x, const Word& y) {
    size_t common = std::min(x.size(), y.size());
    for (size_t k = 0; k < common; ++k) {
        if (x[k] != y[k]) {
            SeparationTimes out;
            out.t = int(k);
            for (size_t j = 0; j < k; ++j)
                if (x[j] == 1) ++out.s1;
            return out;
        }
    }
    throw InsufficientData("words agree on their common prefix; no disagreement index");
}

}  // namespace cms
