#pragma once

#include "cms/fit.hpp"
#include "cms/model.hpp"
#include "cms/rational.hpp"

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace cms {

// Finite string of positive integer symbols. Empty words are permitted and
// vacuously admissible.
using Word = std::vector<int>;

inline void check_symbols(const Word& w) {
    for (int s : w)
        if (s < 1) throw std::invalid_argument("word symbols must be >= 1");
}

// Admissibility: every symbol after the first is at most the sum of all
// preceding symbols. Empty and single-symbol words are admissible.
inline bool is_admissible(const Word& w) {
    long long budget = 0;
    for (size_t k = 0; k < w.size(); ++k) {
        if (k > 0 && w[k] > budget) return false;
        budget += w[k];
    }
    return true;
}

inline long long symbol_sum(const Word& w) {
    long long s = 0;
    for (int x : w) s += x;
    return s;
}

namespace detail {
template <typename Visit>
void extend_admissible(Word& w, long long budget, int remaining, long long cap, Visit&& visit) {
    if (remaining == 0) {
        visit(const_cast<const Word&>(w));
        return;
    }
    long long top = budget == 0 ? cap : std::min<long long>(budget, cap);
    for (long long x = 1; x <= top; ++x) {
        w.push_back(int(x));
        extend_admissible(w, budget + x, remaining - 1, cap, visit);
        w.pop_back();
    }
}
}  // namespace detail

// All admissible words of the given total length extending the prefix, symbols
// bounded by cap, in lexicographic order. Pass cap = 0 for "no cap"; the
// result is still finite when the prefix is nonempty (the budget bounds every
// continuation), and the empty-prefix case then requires a cap.
inline std::vector<Word> enumerate_admissible(const Word& prefix, int length, long long cap = 0) {
    check_symbols(prefix);
    if (!is_admissible(prefix)) throw std::invalid_argument("prefix is not admissible");
    if (length < int(prefix.size())) throw std::invalid_argument("length shorter than prefix");
    if (cap <= 0) {
        if (prefix.empty() && length > 0)
            throw std::invalid_argument("empty prefix with unbounded cap is an infinite set");
        cap = std::numeric_limits<long long>::max() / 2;
    }
    std::vector<Word> out;
    Word w = prefix;
    detail::extend_admissible(w, symbol_sum(prefix), length - int(prefix.size()), cap,
                              [&out](const Word& v) { out.push_back(v); });
    return out;
}

// Streaming variant for large enumerations.
template <typename Visit>
void for_each_admissible(const Word& prefix, int length, long long cap, Visit&& visit) {
    if (!is_admissible(prefix)) throw std::invalid_argument("prefix is not admissible");
    if (cap <= 0) cap = std::numeric_limits<long long>::max() / 2;
    Word w = prefix;
    detail::extend_admissible(w, symbol_sum(prefix), length - int(prefix.size()), cap,
                              std::forward<Visit>(visit));
}

// A gap family: every extension of `stem` by a final symbol k > threshold is
// inadmissible (and those are exactly the inadmissible one-step extensions).
struct GapStem {
    Word stem;
    long long threshold = 0;  // gaps are the symbols k with k > threshold
};

// Gap families of C_n at the given order: all admissible stems
// [n, i_1, ..., i_{order-1}] paired with their prefix-sum thresholds.
inline std::vector<GapStem> enumerate_gaps(int n, int order) {
    if (n < 1) throw std::invalid_argument("symbol must be >= 1");
    if (order < 1) throw std::invalid_argument("order must be >= 1");
    std::vector<GapStem> out;
    Word w{n};
    detail::extend_admissible(w, n, order - 1, std::numeric_limits<long long>::max() / 2,
                              [&out](const Word& v) { out.push_back({v, symbol_sum(v)}); });
    return out;
}

// Concatenation of u and v merged at the shared symbol (last of u = first of v).
inline Word overlap_concat(const Word& u, const Word& v) {
    if (u.empty() || v.empty()) throw std::invalid_argument("overlap_concat needs nonempty words");
    if (u.back() != v.front())
        throw std::invalid_argument("overlap_concat: words do not share the junction symbol");
    Word out = u;
    out.insert(out.end(), v.begin() + 1, v.end());
    return out;
}

struct MarkovCheck {
    bool admissible = false;  // the overlap-concatenation is admissible
    // Extension symbols admissible after the full concatenation but not after
    // the short word v alone (witnesses that the long past strictly helps).
    std::vector<long long> strictness_witnesses;
};

// Symbolic form of the unstable-leaf covering property: gluing an admissible
// past onto an admissible future at the shared symbol stays admissible.
inline MarkovCheck markov_check(const Word& u, const Word& v) {
    if (!is_admissible(u) || !is_admissible(v))
        throw std::invalid_argument("markov_check arguments must be admissible");
    MarkovCheck res;
    Word glued = overlap_concat(u, v);
    res.admissible = is_admissible(glued);
    long long sv = symbol_sum(v), sg = symbol_sum(glued);
    for (long long k = sv + 1; k <= sg; ++k) res.strictness_witnesses.push_back(k);
    return res;
}

// Exact horizontal size of the full-height cylinder E_{w}. For eps = 0 the
// value is the exact rational product of branch widths; for eps > 0 a
// certified interval from the derivative bounds of the perturbation.
inline MeasureInterval cylinder_width(const Word& w, const ModelSpec& spec) {
    if (w.empty()) throw std::invalid_argument("cylinder_width needs a nonempty word");
    check_symbols(w);
    Rational base = 1;
    for (int s : w) base *= spec.width_exact(s);
    MeasureInterval out;
    out.depth = int(w.size());
    if (spec.affine()) {
        out.lower = out.upper = base;
        return out;
    }
    // Pulling the cylinder back through n-1 perturbed inverse branches rescales
    // the exact affine width by a factor in [(1+eps)^-(n-1), (1-eps)^-(n-1)].
    double eps = spec.perturbation;
    unsigned n1 = unsigned(w.size() - 1);
    double lo = to_double(base) * std::pow(1.0 + eps, -double(n1));
    double hi = to_double(base) * std::pow(1.0 - eps, -double(n1));
    // Round outward through rational snapshots of the double bounds.
    out.lower = Rational(std::max(0.0, lo * (1.0 - 1e-14)));
    out.upper = Rational(std::min(1.0, hi * (1.0 + 1e-14)));
    return out;
}

// A rectangle R_{past,future}: the intersection of the image strip coded by
// `past` with the full-height cylinder coded by `future`. The defining string
// is past followed by future and must be admissible.
struct RectangleSpec {
    Word past;
    Word future;

    Word defining_string() const {
        Word s = past;
        s.insert(s.end(), future.begin(), future.end());
        return s;
    }
    void validate() const {
        if (future.empty()) throw std::invalid_argument("rectangle future must be nonempty");
        check_symbols(past);
        check_symbols(future);
        if (!is_admissible(defining_string()))
            throw std::invalid_argument("rectangle defining string is not admissible");
    }
};

struct VariationRow {
    int m = 0, n = 0;
    double variation = 0.0;
};

struct VariationFit {
    std::vector<VariationRow> rows;
    double C = 0.0;
    double theta0 = 0.0;  // fitted decay base in min(m,n)
    double theta1 = 0.0;  // diagnostic lower bound max{1/K0^2 + alpha^2, a1/a, theta0}
    double residual = 0.0;
    bool monotone = true;  // max variation at min(m,n) = k nonincreasing in k
};

// Variation of log D^uF over the rectangle's x-cross-section: grid points of
// [0,1] pulled back through the future's inverse branches (the horizontal
// dynamics never read y, so leaves give identical values).
inline double rectangle_variation(const RectangleSpec& rect, int samples, const ModelSpec& spec) {
    rect.validate();
    if (samples < 2) throw std::invalid_argument("samples must be >= 2");
    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
    for (int s = 0; s < samples; ++s) {
        double x = double(s) / (samples - 1);
        if (x >= 1.0) x = std::nextafter(1.0, 0.0);
        for (auto it = rect.future.rbegin(); it != rect.future.rend(); ++it)
            x = apply_inverse_branch(Point{x, 0.5}, *it, spec).point.x;
        double v = std::log(unstable_derivative(Point{x, 0.5}, spec));
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    return mx - mn;
}

// Measures the variation over a deepening family built from `rect`: pasts are
// extended by prepending 1s (prefix sums only grow, so admissibility is kept)
// and futures by appending 1s (a 1 fits any budget). Fits C, theta0 against
// the min(m,n) exponent and reports the analytic diagnostic theta1.
inline VariationFit variation_check(const RectangleSpec& rect, int samples, const ModelSpec& spec,
                                    int family_depth = 6) {
    rect.validate();
    int m0 = int(rect.past.size()), n0 = int(rect.future.size());
    if (family_depth < std::max({m0, n0, 1}))
        throw std::invalid_argument("family_depth shorter than the base rectangle");
    VariationFit out;
    std::vector<double> vmax(size_t(family_depth) + 1, 0.0);
    std::vector<char> seen(size_t(family_depth) + 1, 0);
    for (int m = std::max(m0, 1); m <= family_depth; ++m) {
        for (int n = n0; n <= family_depth; ++n) {
            RectangleSpec r;
            r.past.assign(size_t(m - m0), 1);
            r.past.insert(r.past.end(), rect.past.begin(), rect.past.end());
            r.future = rect.future;
            r.future.insert(r.future.end(), size_t(n - n0), 1);
            double v = rectangle_variation(r, samples, spec);
            out.rows.push_back({m, n, v});
            int k = std::min(m, n);
            vmax[size_t(k)] = std::max(vmax[size_t(k)], v);
            seen[size_t(k)] = 1;
        }
    }
    double prev = std::numeric_limits<double>::infinity();
    std::vector<double> xs, ys;
    for (int k = 1; k <= family_depth; ++k) {
        if (!seen[size_t(k)]) continue;
        if (vmax[size_t(k)] > prev + 1e-13) out.monotone = false;
        prev = vmax[size_t(k)];
        if (vmax[size_t(k)] > 1e-14) {
            xs.push_back(double(k));
            ys.push_back(std::log(vmax[size_t(k)]));
        }
    }
    if (xs.size() >= 2) {
        auto lf = linear_fit(xs, ys);
        out.theta0 = std::exp(lf.slope);
        out.C = std::exp(lf.intercept);
        out.residual = 1.0 - lf.r2;
    } else {
        out.theta0 = 0.0;  // variation vanishes identically (affine model)
        out.C = 0.0;
        out.residual = 0.0;
    }
    double K0 = (1.0 - spec.perturbation) / (1.0 - spec.width_base);
    double lower = std::max(1.0 / (K0 * K0) + spec.cone_slope * spec.cone_slope,
                            spec.height_base / spec.width_base);
    out.theta1 = std::max(lower, out.theta0);
    return out;
}

inline std::string word_to_string(const Word& w) {
    std::string s = "[";
    for (size_t i = 0; i < w.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(w[i]);
    }
    return s + "]";
}

}  // namespace cms
