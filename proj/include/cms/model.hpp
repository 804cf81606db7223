#pragma once

#include "cms/rational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace cms {

// Parameters of the concrete piecewise-hyperbolic family on the unit square.
// Rectangles E_i have widths w_i = (1-a) a^{i-1} stacked left to right;
// image strips S_i have heights h_i = a1^i stacked upward from y = 0.
// The horizontal branch map is t -> g_eps(t) with
// g_eps(t) = t + (eps / 2 pi) sin(2 pi t); eps = 0 is the exact affine model.
struct ModelSpec {
    double width_base = 0.5;       // a
    double height_base = 1.0 / 3;  // a1
    double cone_slope = 0.5;       // alpha
    double perturbation = 0.0;     // eps
    int symbol_cap = 20;           // alphabet truncation for enumeration work

    // Exact counterpart of width_base, used by all rational-arithmetic paths.
    Rational width_base_exact = Rational(1, 2);

    void validate() const {
        if (!(width_base > 0.0 && width_base < 1.0))
            throw std::invalid_argument("model.width_base must lie in (0,1)");
        if (!(height_base > 0.0 && height_base < 1.0))
            throw std::invalid_argument("model.height_base must lie in (0,1)");
        if (!(cone_slope > 0.0 && cone_slope < 1.0))
            throw std::invalid_argument("model.cone_slope must lie in (0,1)");
        if (!(perturbation >= 0.0))
            throw std::invalid_argument("model.perturbation must be >= 0");
        if (symbol_cap < 2)
            throw std::invalid_argument("model.symbol_cap must be >= 2");
        if (!(width_base_exact > 0 && width_base_exact < 1))
            throw std::invalid_argument("model.width_base exact value out of (0,1)");
    }

    bool affine() const { return perturbation == 0.0; }

    // --- geometry, floating point ---
    double width(int i) const { return (1.0 - width_base) * std::pow(width_base, i - 1); }
    // Left edge of E_i: x_{i-1} = 1 - a^{i-1}.
    double left_edge(int i) const { return 1.0 - std::pow(width_base, i - 1); }
    double height(int i) const { return std::pow(height_base, i); }
    // Bottom edge of S_i: c_i = sum_{j<i} h_j.
    double strip_bottom(int i) const {
        double a1 = height_base;
        return a1 * (1.0 - std::pow(a1, i - 1)) / (1.0 - a1);
    }

    // --- geometry, exact ---
    Rational width_exact(int i) const {
        return (Rational(1) - width_base_exact) * rat_pow(width_base_exact, unsigned(i - 1));
    }

    // --- perturbation diffeomorphism of [0,1] ---
    double g(double t) const {
        return t + perturbation / (2 * std::numbers::pi) * std::sin(2 * std::numbers::pi * t);
    }
    double g_prime(double t) const {
        return 1.0 + perturbation * std::cos(2 * std::numbers::pi * t);
    }
    double g_second(double t) const {
        return -2 * std::numbers::pi * perturbation * std::sin(2 * std::numbers::pi * t);
    }
    double g_inverse(double y) const {
        if (perturbation == 0.0) return y;
        double t = y;
        for (int it = 0; it < 64; ++it) {
            double f = g(t) - y;
            if (std::abs(f) < 1e-16) break;
            t -= f / g_prime(t);
        }
        return std::clamp(t, 0.0, 1.0);
    }
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline void check_in_square(const Point& p) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
        throw std::domain_error("point has non-finite coordinates");
    if (!(p.x >= 0.0 && p.x < 1.0))
        throw std::domain_error("point x-coordinate outside [0,1)");
}

// The unique i with p.x in [x_{i-1}, x_i), x_i = 1 - a^i (left-closed).
// Compares against the same left_edge expression the inverse branches use, so
// a branch preimage always locates back to its own symbol.
inline int locate(const Point& p, const ModelSpec& spec) {
    check_in_square(p);
    int i = 1;
    while (p.x >= spec.left_edge(i + 1)) {
        ++i;
        if (i > 1 << 20) throw std::domain_error("locate: symbol overflow (x too close to 1)");
    }
    return i;
}

inline Point apply(const Point& p, const ModelSpec& spec) {
    int i = locate(p, spec);
    double t = (p.x - spec.left_edge(i)) / spec.width(i);
    t = std::clamp(t, 0.0, 1.0);
    double xo = spec.g(t);
    if (xo >= 1.0) xo = std::nextafter(1.0, 0.0);
    return Point{xo, spec.strip_bottom(i) + spec.height(i) * p.y};
}

struct InverseResult {
    Point point;
    bool off_strip = false;  // p.y was outside [c_i, c_i + h_i]; y-inverse clamped
};

// Inverse of branch f_i. The x-preimage is always defined; the y-inverse only
// when p.y lies in the vertical extent of S_i (one-sided-shift usage needs x only).
inline InverseResult apply_inverse_branch(const Point& p, int i, const ModelSpec& spec) {
    if (i < 1) throw std::invalid_argument("branch index must be >= 1");
    if (i > 1 << 16) throw std::overflow_error("branch index exceeds representable range");
    double t = spec.g_inverse(p.x);
    double x = spec.left_edge(i) + spec.width(i) * t;
    double c = spec.strip_bottom(i), h = spec.height(i);
    bool off = !(p.y >= c && p.y <= c + h);
    double y = std::clamp((p.y - c) / h, 0.0, 1.0);
    return InverseResult{Point{x, y}, off};
}

// Norm of the derivative in the unstable (horizontal) direction.
inline double unstable_derivative(const Point& p, const ModelSpec& spec) {
    int i = locate(p, spec);
    double t = (p.x - spec.left_edge(i)) / spec.width(i);
    return spec.g_prime(std::clamp(t, 0.0, 1.0)) / spec.width(i);
}

inline std::vector<int> itinerary(Point p, int n, const ModelSpec& spec) {
    if (n < 1) throw std::invalid_argument("itinerary length must be >= 1");
    std::vector<int> out;
    out.reserve(size_t(n));
    for (int k = 0; k < n; ++k) {
        out.push_back(locate(p, spec));
        p = apply(p, spec);
    }
    return out;
}

struct ConditionEntry {
    std::string name;
    bool pass = false;
    double margin = 0.0;        // pass iff margin >= 0
    std::string witness;        // where the worst margin is attained
    std::string constant_name;  // extracted constant, if any
    double constant = std::numeric_limits<double>::quiet_NaN();
};

struct ConditionReport {
    std::vector<ConditionEntry> entries;
    double K0 = 0.0;      // H2 expansion constant
    double C0 = 0.0;      // D1 distortion constant
    double B0 = 0.0;      // BIV bound
    double Ctilde = 1.0;  // G3 width-comparability constant

    bool all_pass() const {
        for (const auto& e : entries)
            if (!e.pass) return false;
        return true;
    }
    const ConditionEntry* find(const std::string& name) const {
        for (const auto& e : entries)
            if (e.name == name) return &e;
        return nullptr;
    }
};

// Checks the standing conditions on the family. All margins are analytic closed
// forms for this family (the map is a skew product with diagonal derivative
// diag(g'(t)/w_i, a1^i), so the cross partials F_1y, F_2x vanish identically);
// for eps > 0 a sample grid per rectangle locates witness points and
// cross-checks the analytic derivative extremes.
inline ConditionReport verify_conditions(const ModelSpec& spec, int samples = 64) {
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");
    spec.validate();
    const double a = spec.width_base, a1 = spec.height_base;
    const double alpha = spec.cone_slope, eps = spec.perturbation;

    ConditionReport rep;
    auto add = [&rep](std::string name, double margin, std::string witness,
                      std::string cname = "", double cval = std::numeric_limits<double>::quiet_NaN()) {
        ConditionEntry e;
        e.name = std::move(name);
        e.margin = margin;
        e.pass = margin >= 0.0 && std::isfinite(margin);
        e.witness = std::move(witness);
        e.constant_name = std::move(cname);
        e.constant = cval;
        rep.entries.push_back(std::move(e));
    };

    // Derivative extremes of g over [0,1]; the grid only confirms them.
    double gp_min = 1.0 - eps, gp_max = 1.0 + eps;
    if (eps > 0.0) {
        double smin = std::numeric_limits<double>::infinity(), smax = 0.0;
        for (int k = 0; k <= samples; ++k) {
            double gp = spec.g_prime(double(k) / samples);
            smin = std::min(smin, gp);
            smax = std::max(smax, gp);
        }
        gp_min = std::min(gp_min, smin);
        gp_max = std::max(gp_max, smax);
    }

    // G1: strip heights sum below 1 so images are pairwise disjoint inside Q.
    add("G1", 1.0 - a1 / (1.0 - a1), "sum of strip heights a1/(1-a1)");

    // G2: rectangle widths sum to 1 exactly (geometric series identity).
    add("G2", 0.0, "sum of widths (1-a) a^{i-1} = 1, exact identity");

    // G3: widths are C~-comparable to a^i with extracted C~ >= 1.
    double Ct = std::max((1.0 - a) / a, a / (1.0 - a));
    rep.Ctilde = Ct;
    add("G3", 1.0 / Ct, "width ratio w_i / a^i = (1-a)/a, all i", "Ctilde", Ct);

    // H2: |F_1x| >= K_0 > 1 (F_1y = 0). Worst expansion on the widest rectangle.
    double K0 = gp_min / (1.0 - a);
    rep.K0 = K0;
    add("H2", K0 - 1.0, "i = 1, t at min of g'", "K0", K0);

    // H1 and H3 reduce to h_i <= min |F_1x| on E_i for the diagonal derivative;
    // the worst case is i = 1 (heights fall faster than expansion grows).
    double h13 = alpha * (gp_min / (1.0 - a) - a1);
    add("H1", h13, "i = 1 (alpha * (min expansion - h_1))");
    add("H3", h13, "i = 1 (same reduction as H1 for a diagonal map)");

    // H4: |F_1x| - alpha|F_2x| >= J_F K_0 reduces to 1 >= h_i K_0, worst at i = 1.
    // When K_0 < 1 (H2 already failing) the comparison uses 1 as the floor so
    // the H2 failure does not leak into H4.
    add("H4", 1.0 - a1 * std::max(K0, 1.0), "i = 1 (1 - h_1 K_0)");

    // H5: vertical contraction a1^j beats horizontal a^j, i.e. a1 < a.
    add("H5", a - a1, "height base vs width base (a1 < a)");

    // D1: sup |D^2 f_i| / |f_1x| * width(E_i) = 2 pi eps / (1 - eps); finite
    // exactly when g stays a diffeomorphism (eps < 1).
    double C0 = (eps < 1.0) ? 2 * std::numbers::pi * eps / (1.0 - eps)
                            : std::numeric_limits<double>::infinity();
    rep.C0 = C0;
    add("D1", 1.0 - eps, "second-derivative peak of g within any E_i", "C0", C0);

    // BIV: sup over E_i of |log f_1x(z1) - log f_1x(z2)| = log(gp_max/gp_min),
    // certified by B_0 = 2 log((1+eps)/(1-eps)).
    double actual = (gp_min > 0.0) ? std::log(gp_max / gp_min)
                                   : std::numeric_limits<double>::infinity();
    double B0 = (eps < 1.0) ? 2.0 * std::log((1.0 + eps) / (1.0 - eps))
                            : std::numeric_limits<double>::infinity();
    rep.B0 = B0;
    add("BIV", B0 - actual, "log g' oscillation within one rectangle", "B0", B0);

    return rep;
}

}  // namespace cms
