#pragma once

#include "cms/model.hpp"
#include "cms/word.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace cms {

// Certified rational lower bound for the infinite survival product
// prod_{k>=0} (1 - a^{S+k}): the first `factors` terms exactly, the rest
// bounded below by 1 - a^{S+factors} / (1-a).
inline Rational survival_product_lower(int S, const Rational& a, int factors = 64) {
    Rational p = 1;
    Rational term = rat_pow(a, unsigned(S));
    for (int k = 0; k < factors; ++k) {
        p *= (Rational(1) - term);
        term *= a;
        if (p <= 0) return 0;
    }
    Rational tail = Rational(1) - term / (Rational(1) - a);
    if (tail < 0) tail = 0;
    return p * tail;
}

// Relative leaf measure of the set of points whose forward itinerary stays
// admissible forever, starting from prefix-sum budget S0: the survival
// recursion rho(S) = sum_{j<=S} w_j rho(S+j), truncated at `depth` levels.
// Upper bound starts from rho = 1; lower bound starts from the per-budget
// union bound 1 - a^S/(1-a) <= prod_{k>=0}(1 - a^{S+k}) <= rho(S). Budgets
// above budget_cap are collapsed (1 on the upper path, the cap's floor on the
// lower path, valid since rho increases with the budget). Each sweep rounds
// the bounds outward on a fine dyadic grid to keep rationals small.
inline MeasureInterval relative_measure(int budget, int depth, const ModelSpec& spec,
                                        int budget_cap = 0) {
    if (budget < 1) throw std::invalid_argument("budget must be >= 1");
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    const Rational a = spec.width_base_exact;
    const Rational w1 = Rational(1) - a;  // w_j = (1-a) a^{j-1}
    if (budget_cap <= 0) budget_cap = budget + 80;
    if (budget_cap < budget + 2) budget_cap = budget + 2;
    constexpr unsigned kBits = 192;

    std::vector<Rational> lo(size_t(budget_cap) + 1), hi(size_t(budget_cap) + 1, Rational(1));
    {
        Rational pw = a;  // a^S
        for (int S = 1; S <= budget_cap; ++S) {
            Rational f = Rational(1) - pw / w1;
            lo[size_t(S)] = f > 0 ? dyadic_floor(f, kBits) : Rational(0);
            pw *= a;
        }
    }
    const Rational cap_floor = lo[size_t(budget_cap)];
    // Precompute w_j for j <= budget_cap.
    std::vector<Rational> w(size_t(budget_cap) + 1);
    {
        Rational cur = w1;
        for (int j = 1; j <= budget_cap; ++j) {
            w[size_t(j)] = cur;
            cur *= a;
        }
    }
    std::vector<Rational> nlo(lo.size()), nhi(hi.size());
    for (int d = 0; d < depth; ++d) {
        for (int S = 1; S <= budget_cap; ++S) {
            Rational accl = 0, acch = 0;
            for (int j = 1; j <= S; ++j) {
                int Sp = S + j;
                if (Sp > budget_cap) {
                    accl += w[size_t(j)] * cap_floor;
                    acch += w[size_t(j)];
                } else {
                    accl += w[size_t(j)] * lo[size_t(Sp)];
                    acch += w[size_t(j)] * hi[size_t(Sp)];
                }
            }
            // Never regress below the standing floor, and round outward.
            accl = dyadic_floor(accl, kBits);
            if (accl < lo[size_t(S)] && d > 0) accl = lo[size_t(S)];
            nlo[size_t(S)] = accl;
            nhi[size_t(S)] = dyadic_ceil(acch, kBits);
        }
        lo.swap(nlo);
        hi.swap(nhi);
    }
    MeasureInterval out;
    out.lower = lo[size_t(budget)];
    out.upper = hi[size_t(budget)];
    out.depth = depth;
    if (out.lower < 0) out.lower = 0;
    if (out.upper > 1) out.upper = 1;
    out.validate();
    return out;
}

// Relative leaf measure of the Cantor set C_n inside E_n: after reading the
// first symbol n, the running budget is n.
inline MeasureInterval cantor_measure(int n, int depth, const ModelSpec& spec) {
    if (n < 1) throw std::invalid_argument("symbol must be >= 1");
    return relative_measure(n, depth, spec);
}

struct LeafRatio {
    double measured = 1.0;       // max/min sampled cross-section ratio
    double distortion_cap = 1.0; // analytic bound exp(B_0)
};

// Ratio of leaf cross-section lengths of the cylinder E_w across unstable
// leaves. The family is a skew product (the horizontal dynamics do not read y),
// so the measured ratio is 1 up to roundoff; the analytic cap exp(B_0) is
// reported alongside.
inline LeafRatio leaf_ratio_bound(const Word& w, const ModelSpec& spec, int samples = 32) {
    if (w.empty() || !is_admissible(w))
        throw std::invalid_argument("leaf_ratio_bound needs a nonempty admissible word");
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");
    double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
    for (int s = 0; s < samples; ++s) {
        double y = (s + 0.5) / samples;
        // Pull the full leaf [0,1] back through the inverse branches of w.
        double xl = 0.0, xr = std::nextafter(1.0, 0.0);
        for (auto it = w.rbegin(); it != w.rend(); ++it) {
            xl = apply_inverse_branch(Point{xl, y}, *it, spec).point.x;
            xr = apply_inverse_branch(Point{xr, y}, *it, spec).point.x;
        }
        double len = xr - xl;
        mn = std::min(mn, len);
        mx = std::max(mx, len);
    }
    LeafRatio out;
    out.measured = mx / mn;
    double eps = spec.perturbation;
    double B0 = (eps < 1.0) ? 2.0 * std::log((1.0 + eps) / (1.0 - eps))
                            : std::numeric_limits<double>::infinity();
    out.distortion_cap = std::exp(B0);
    return out;
}

}  // namespace cms
