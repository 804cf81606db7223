#pragma once

#include "cms/fit.hpp"
#include "cms/measure.hpp"
#include "cms/model.hpp"
#include "cms/word.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

namespace cms {

// An admissible word [j0, i_1, ..., i_{n-2}, j1] describing one excursion of
// the first-return map: the full word is admissible while every intermediate
// suffix [i_k, ..., j1] of length >= 2 is inadmissible.
struct ReturnWord {
    Word word;
    int source = 0;
    int target = 0;
    int return_time = 0;  // len - 1

    static ReturnWord from_word(const Word& w) {
        if (w.size() < 2) throw std::invalid_argument("return word needs length >= 2");
        ReturnWord r;
        r.word = w;
        r.source = w.front();
        r.target = w.back();
        r.return_time = int(w.size()) - 1;
        return r;
    }

    // Literal predicate from the definition (used as the test oracle).
    bool satisfies_predicate() const {
        if (!is_admissible(word)) return false;
        for (size_t k = 1; k + 2 <= word.size(); ++k) {
            Word suffix(word.begin() + long(k), word.end());
            if (is_admissible(suffix)) return false;
        }
        return true;
    }

    bool satisfies_length_bound() const {
        return int(word.size()) <= target - source + 2;
    }
};

namespace detail {
// DFS over stems [j0, i_1, ...] tracking (budget, oldest alive proper suffix
// budget B). The suffix-inadmissibility condition on a candidate final symbol x
// is exactly the full-kill condition x > B: proper suffix budgets decrease with
// birth index, so the oldest alive one bounds them all.
template <typename Emit>
void return_word_dfs(Word& stem, long long budget, long long oldest_alive, int j1, int max_len,
                     Emit&& emit) {
    int len = int(stem.size());
    if (len + 1 <= max_len && j1 >= 1 && j1 <= budget &&
        (len == 1 || j1 > oldest_alive)) {
        stem.push_back(j1);
        emit(const_cast<const Word&>(stem));
        stem.pop_back();
    }
    if (len + 2 > max_len) return;
    // The oldest-alive budget strictly increases with every symbol, so once it
    // reaches j1 no final symbol can ever kill all suffixes: prune the branch.
    if (len >= 2 && oldest_alive >= j1) return;
    for (long long x = 1; x <= budget; ++x) {
        long long next_alive = (len == 1 || x > oldest_alive) ? x : oldest_alive + x;
        stem.push_back(int(x));
        return_word_dfs(stem, budget + x, next_alive, j1, max_len, emit);
        stem.pop_back();
    }
}
}  // namespace detail

// The complete list of return words from j0 to j1 under the definitional
// length cap len <= j1 - j0 + 2, in lexicographic order.
inline std::vector<ReturnWord> first_return_words(int j0, int j1) {
    if (j0 < 1 || j1 < 1) throw std::invalid_argument("symbols must be >= 1");
    std::vector<ReturnWord> out;
    int max_len = j1 - j0 + 2;
    if (max_len < 2) return out;
    Word stem{j0};
    detail::return_word_dfs(stem, j0, 0, j1, max_len,
                            [&out](const Word& w) { out.push_back(ReturnWord::from_word(w)); });
    return out;
}

// All return words from source j0 to any target, with return time <= rt_max.
// For j0 = 1 the length cap holds automatically (the full-kill symbol exceeds
// the oldest alive budget, which grows by at least 1 per step).
inline std::vector<ReturnWord> return_words_from(int j0, int rt_max) {
    if (j0 < 1 || rt_max < 1) throw std::invalid_argument("bad arguments");
    std::vector<ReturnWord> out;
    Word stem{j0};
    std::vector<ReturnWord>* po = &out;
    // Emit every admissible full-kill final symbol at every length.
    std::function<void(Word&, long long, long long)> rec =
        [&](Word& w, long long budget, long long oldest_alive) {
            int len = int(w.size());
            if (len + 1 <= rt_max + 1) {
                long long from = (len == 1) ? 1 : oldest_alive + 1;
                for (long long x = from; x <= budget; ++x) {
                    w.push_back(int(x));
                    po->push_back(ReturnWord::from_word(w));
                    w.pop_back();
                }
            }
            if (len + 2 > rt_max + 1) return;
            for (long long x = 1; x <= budget; ++x) {
                long long next_alive = (len == 1 || x > oldest_alive) ? x : oldest_alive + x;
                w.push_back(int(x));
                rec(w, budget + x, next_alive);
                w.pop_back();
            }
        };
    rec(stem, j0, 0);
    std::sort(out.begin(), out.end(), [](const ReturnWord& a, const ReturnWord& b) {
        return a.word < b.word;
    });
    return out;
}

enum class Mp1Mode {
    strict_suffix,    // true first returns to C_1: no interior 1 whose suffix is admissible
    no_interior_one,  // interior symbols != 1, except position 1 (forced to 1)
};

// First-return-to-1 words [1, x_1, ..., x_{m-1}, 1] up to max_len, under the
// chosen predicate. Optional symbol cap bounds the alphabet (0 = uncapped).
inline std::vector<ReturnWord> mp1_words(int max_len, Mp1Mode mode = Mp1Mode::strict_suffix,
                                         int symbol_cap = 0) {
    if (max_len < 2) throw std::invalid_argument("max_len must be >= 2");
    std::vector<ReturnWord> out;
    long long cap = symbol_cap > 0 ? symbol_cap : std::numeric_limits<long long>::max() / 2;
    Word w{1};
    std::function<void(long long)> rec = [&](long long budget) {
        if (w.size() >= 2 && w.back() == 1) {
            bool ok = true;
            for (size_t k = 1; ok && k + 1 < w.size(); ++k) {
                if (mode == Mp1Mode::strict_suffix) {
                    if (w[k] == 1) {
                        Word suffix(w.begin() + long(k), w.end());
                        if (is_admissible(suffix)) ok = false;
                    }
                } else {
                    if (k >= 2 && w[k] == 1) ok = false;
                }
            }
            if (ok) out.push_back(ReturnWord::from_word(w));
        }
        if (int(w.size()) >= max_len) return;
        long long top = std::min<long long>(budget, cap);
        for (long long x = 1; x <= top; ++x) {
            w.push_back(int(x));
            rec(budget + x);
            w.pop_back();
        }
    };
    rec(1);
    return out;
}

// ---------------------------------------------------------------------------
// Return-time tail.

struct TailFit {
    std::vector<MeasureInterval> mass;  // index n-1 holds the length-n mass
    std::vector<Rational> bound;        // tail bound sum_{j>=n} w_j
    double C = 0.0;
    double beta = 0.0;
    double residual = 0.0;  // 1 - R^2 of the log-linear fit
    double r2 = 0.0;
    bool lemma_ok = false;   // every non-returned stem has final symbol >= length
    bool bounds_ok = false;  // mass_n <= sum_{j>=n} w_j for all n
};

// Exhaustive verification that every reachable budget state at time t has
// oldest-alive budget >= t, over an over-approximating finite state machine
// (B clamped above n_max + 1, gap clamped above 2 n_max + 2; clamped states
// only over-approximate reachability and only ever increase B). Every
// non-returned stem ends with a full-kill symbol x > B(t), hence x >= t + 1.
inline bool verify_return_lemma_states(int n_max) {
    const int BCAP = n_max + 1, GCAP = 2 * n_max + 2;
    auto clampB = [&](long long B) { return int(std::min<long long>(B, BCAP)); };
    auto clampG = [&](long long g) { return int(std::min<long long>(g, GCAP)); };
    std::set<std::pair<int, int>> cur;  // (B, gap) after t = 1 symbols: forced [1,1-prefix]
    cur.insert({1, 1});                 // x_1 = 1: B = 1, full budget 2
    for (int t = 1; t < n_max; ++t) {
        for (const auto& [B, g] : cur)
            if (B < std::min(t, BCAP)) return false;
        std::set<std::pair<int, int>> next;
        for (const auto& [B, g] : cur) {
            long long b0 = (B >= BCAP || g >= GCAP) ? (long long)(BCAP) + GCAP : (long long)B + g;
            // Growing moves: x <= B keeps the oldest suffix alive.
            long long grow_top = std::min<long long>(B, b0);
            for (long long x = 1; x <= grow_top; ++x)
                next.insert({clampB((long long)B + x), clampG(g)});
            // Full kills: x > B starts a fresh oldest suffix with gap = old b0.
            for (long long x = B + 1; x <= b0; ++x)
                next.insert({clampB(x), clampG(b0)});
            if (B >= BCAP || g >= GCAP)  // clamped: also allow arbitrarily large kills
                next.insert({BCAP, GCAP});
        }
        cur.swap(next);
    }
    for (const auto& [B, g] : cur)
        if (B < std::min(n_max - 1, BCAP)) return false;
    return true;
}

// Exact symbolic measure (relative to C_1's leaf cylinder) of length-n
// admissible stems [1, x_1, ..., x_n] that have not completed a first return
// to the Cantor base by time n: every proper suffix is dead, equivalently the
// final symbol is a full kill. Dynamic programming over (B, gap) with exact
// rational masses; states beyond the caps are pooled, and the pool bounds the
// interval width (it is below 2^-60 for the default model).
inline TailFit return_tail(int n_max, const ModelSpec& spec) {
    if (n_max < 3) throw std::invalid_argument("n_max must be >= 3");
    const Rational a = spec.width_base_exact;
    const int BCAP = 64, GCAP = 64;
    auto wsym = [&](long long x) { return (Rational(1) - a) * rat_pow(a, unsigned(x - 1)); };
    // Tail weight sum_{j > m} w_j = a^m.
    auto wtail = [&](long long m) { return rat_pow(a, unsigned(m)); };

    std::map<std::pair<int, int>, Rational> cur;  // (B, gap) -> mass, after 1 symbol
    cur[{1, 1}] = wsym(1);
    Rational pool = 0;  // mass in clamped states (upper-bound slack)

    TailFit fit;
    fit.mass.resize(size_t(n_max));
    fit.bound.resize(size_t(n_max));
    // n = 1: the condition on proper suffixes is vacuous; the only admissible
    // stem [1,1] counts, mass w_1.
    fit.mass[0].lower = fit.mass[0].upper = wsym(1);
    fit.mass[0].depth = 1;
    fit.bound[0] = wtail(0);

    for (int n = 2; n <= n_max; ++n) {
        // Non-returned mass at this length: full-kill final symbols x in (B, B+g].
        Rational r = 0;
        for (const auto& [state, m] : cur) {
            auto [B, g] = state;
            // sum_{x=B+1}^{B+g} w_x = a^B - a^{B+g}
            r += m * (wtail(B) - wtail((long long)B + g));
        }
        fit.mass[size_t(n - 1)].lower = r;
        fit.mass[size_t(n - 1)].upper = r + pool;  // pool can only add full kills
        if (fit.mass[size_t(n - 1)].upper > 1) fit.mass[size_t(n - 1)].upper = 1;
        fit.mass[size_t(n - 1)].depth = n;
        fit.bound[size_t(n - 1)] = wtail(n - 1);

        if (n == n_max) break;
        std::map<std::pair<int, int>, Rational> next;
        for (const auto& [state, m] : cur) {
            auto [B, g] = state;
            long long b0 = (long long)B + g;
            for (long long x = 1; x <= b0; ++x) {
                long long nB, ng;
                if (x <= B) {
                    nB = B + x;
                    ng = g;
                } else {
                    nB = x;
                    ng = b0;
                }
                Rational dm = m * wsym(x);
                if (nB > BCAP || ng > GCAP)
                    pool += dm;
                else
                    next[{int(nB), int(ng)}] += dm;
            }
        }
        cur.swap(next);
    }

    fit.lemma_ok = verify_return_lemma_states(n_max);
    fit.bounds_ok = true;
    for (int n = 1; n <= n_max; ++n)
        if (fit.mass[size_t(n - 1)].upper > fit.bound[size_t(n - 1)]) fit.bounds_ok = false;

    std::vector<double> xs, ys;
    for (int n = 3; n <= n_max; ++n) {
        double mid = 0.5 * (fit.mass[size_t(n - 1)].lower_d() + fit.mass[size_t(n - 1)].upper_d());
        if (mid > 0) {
            xs.push_back(double(n));
            ys.push_back(std::log(mid));
        }
    }
    auto lf = linear_fit(xs, ys);
    fit.beta = std::exp(lf.slope);
    fit.C = std::exp(lf.intercept);
    fit.r2 = lf.r2;
    fit.residual = 1.0 - lf.r2;
    return fit;
}

// Brute-force oracle for small n: enumerate admissible stems and apply the
// literal all-proper-suffixes-inadmissible predicate.
inline std::pair<Rational, long long> brute_nonreturned_mass(int n, const ModelSpec& spec) {
    const Rational a = spec.width_base_exact;
    auto wsym = [&](int x) { return (Rational(1) - a) * rat_pow(a, unsigned(x - 1)); };
    Rational total = 0;
    long long count = 0;
    for_each_admissible(Word{1}, n + 1, 0, [&](const Word& w) {
        for (size_t k = 1; k + 1 < w.size(); ++k) {
            Word suffix(w.begin() + long(k), w.end());
            if (is_admissible(suffix)) return;
        }
        Rational m = 1;
        for (size_t k = 1; k < w.size(); ++k) m *= wsym(w[k]);
        total += m;
        ++count;
    });
    return {total, count};
}

// ---------------------------------------------------------------------------
// Topological mixing.

struct MixingEntry {
    size_t from = 0, to = 0;
    int N = -1;  // least N with connections at every length in [N, horizon]; -1 if none
};

// For each ordered state pair, the least N such that admissible connecting
// words exist at every length n in [N, horizon]. Achievable excursion lengths
// are sums of available return times (verified by a coin DP, not asserted).
inline std::vector<MixingEntry> mixing_check(const std::vector<ReturnWord>& states, int horizon) {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    std::set<int> coins;
    for (const auto& w : mp1_words(std::min(horizon + 1, 8))) coins.insert(w.return_time);
    std::vector<char> achievable(size_t(horizon) + 1, 0);
    achievable[0] = 1;
    for (int n = 1; n <= horizon; ++n)
        for (int c : coins)
            if (c <= n && achievable[size_t(n - c)]) {
                achievable[size_t(n)] = 1;
                break;
            }
    std::vector<MixingEntry> out;
    for (size_t i = 0; i < states.size(); ++i) {
        for (size_t j = 0; j < states.size(); ++j) {
            MixingEntry e{i, j, -1};
            int rt = states[i].return_time;
            for (int N = horizon; N >= 1; --N) {
                bool ok = N >= rt && achievable[size_t(N - rt)];
                if (!ok) break;
                e.N = N;
            }
            out.push_back(e);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Mass decomposition of C_1 by first-return words (Kac-style identity):
// rho(1) = sum over return words w from symbol 1 of relwidth(w) * rho(target),
// with remainder bounded by the non-returned tail at the truncation.

struct KacCheck {
    MeasureInterval covered;   // sum of relwidth * rho(target) over rt <= rt_max
    MeasureInterval base;      // rho(1)
    Rational remainder_bound;  // tail weight a^{rt_max - 1} * 2-ish
    bool pass = false;
};

inline KacCheck kac_mass_check(int rt_max, int depth, const ModelSpec& spec) {
    const Rational a = spec.width_base_exact;
    auto wsym = [&](int x) { return (Rational(1) - a) * rat_pow(a, unsigned(x - 1)); };
    auto words = return_words_from(1, rt_max);
    int max_target = 0;
    for (const auto& rw : words) max_target = std::max(max_target, rw.target);
    std::vector<MeasureInterval> rho(size_t(max_target) + 1);
    for (int t = 1; t <= max_target; ++t) rho[size_t(t)] = relative_measure(t, depth, spec);
    KacCheck out;
    Rational lo = 0, hi = 0;
    for (const auto& rw : words) {
        Rational relw = 1;
        for (size_t k = 1; k < rw.word.size(); ++k) relw *= wsym(rw.word[k]);
        lo += relw * rho[size_t(rw.target)].lower;
        hi += relw * rho[size_t(rw.target)].upper;
    }
    out.covered.lower = lo;
    out.covered.upper = hi < 1 ? hi : Rational(1);
    out.covered.depth = depth;
    out.base = relative_measure(1, depth, spec);
    // Uncovered return words have rt > rt_max, hence mass <= sum_{m > rt_max} a^{m-1}.
    out.remainder_bound = rat_pow(a, unsigned(rt_max - 1)) / (Rational(1) - a) * a;
    out.pass = out.base.lower <= out.covered.upper + out.remainder_bound &&
               out.covered.lower <= out.base.upper;
    return out;
}

}  // namespace cms
