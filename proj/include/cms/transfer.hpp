#pragma once

#include "cms/fit.hpp"
#include "cms/returns.hpp"
#include "cms/thermo.hpp"
#include "cms/word.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

namespace cms {

struct TransferCaps {
    int depth = 6;         // cylinder depth of the function tables
    int symbol_cap = 20;   // alphabet truncation (basis and preimage words)
    int word_len_cap = 8;  // first-return word length truncation
};

// Truncated transfer operator of the induced (state-1) shift, represented as a
// dense matrix over depth-d cylinders [1, x_1, ..., x_{d-1}] with symbols up
// to the cap. (L f)(u) sums exp(induced phi(w)) * f(prefix_d(w glued to u))
// over first-return-to-1 words w; with capped symbols on both sides, every
// glued prefix stays inside the basis, so no weight is silently dropped.
struct TransferOperator {
    ModelSpec spec;
    double shift = 0.0;
    TransferCaps caps;
    std::vector<Word> basis;
    std::map<Word, int> index;
    std::vector<std::vector<double>> M;  // (Lf)(i) = sum_j M[i][j] f(j)
    double cap_tail = 0.0;               // mass bound for excluded symbols > cap

    const Word& cylinder(int i) const { return basis[size_t(i)]; }

    std::vector<double> apply(const std::vector<double>& f) const {
        if (f.size() != basis.size())
            throw std::invalid_argument("table size does not match the cylinder basis");
        std::vector<double> out(basis.size(), 0.0);
        for (size_t i = 0; i < basis.size(); ++i) {
            double acc = 0.0;
            const auto& row = M[i];
            for (size_t j = 0; j < row.size(); ++j) acc += row[j] * f[j];
            out[i] = acc;
        }
        return out;
    }

    std::vector<double> apply_adjoint(const std::vector<double>& nu) const {
        std::vector<double> out(basis.size(), 0.0);
        for (size_t i = 0; i < basis.size(); ++i)
            for (size_t j = 0; j < basis.size(); ++j) out[j] += nu[i] * M[i][j];
        return out;
    }
};

inline TransferOperator build_transfer_operator(const Potential& pot,
                                                const TransferCaps& caps = {}) {
    if (caps.depth < 1) throw std::invalid_argument("depth must be >= 1");
    TransferOperator op;
    op.spec = pot.spec;
    op.shift = pot.shift;
    op.caps = caps;
    op.basis = enumerate_admissible(Word{1}, caps.depth, caps.symbol_cap);
    for (size_t i = 0; i < op.basis.size(); ++i) op.index[op.basis[i]] = int(i);
    size_t B = op.basis.size();
    op.M.assign(B, std::vector<double>(B, 0.0));
    // Mass of first-return words excluded by the symbol cap: some symbol
    // exceeds cap, so the word's weight is below a^cap; the total across the
    // length cap is bounded by len_cap * a^cap.
    op.cap_tail = caps.word_len_cap * std::pow(pot.spec.width_base, caps.symbol_cap);

    auto words = mp1_words(caps.word_len_cap, Mp1Mode::strict_suffix, caps.symbol_cap);
    const bool affine = pot.spec.affine();

    // Representative x of each basis cylinder: 1/2 pulled back through its
    // branches (only needed for perturbed weights).
    std::vector<double> rep;
    if (!affine) {
        rep.reserve(B);
        for (const auto& u : op.basis) {
            double x = 0.5;
            for (auto it = u.rbegin(); it != u.rend(); ++it)
                x = apply_inverse_branch(Point{x, 0.5}, *it, pot.spec).point.x;
            rep.push_back(x);
        }
    }

    for (const auto& rw : words) {
        const Word& w = rw.word;
        double affine_weight = affine ? std::exp(induced_potential(rw, pot).value) : 0.0;
        for (size_t i = 0; i < B; ++i) {
            // Glue w onto the target cylinder at the shared landing 1 and
            // truncate to basis depth.
            Word glued(w.begin(), w.end() - 1);
            glued.insert(glued.end(), op.basis[i].begin(), op.basis[i].end());
            Word prefix(glued.begin(), glued.begin() + caps.depth);
            auto it = op.index.find(prefix);
            if (it == op.index.end())
                throw std::logic_error("glued prefix escaped the cylinder basis");
            double weight = affine_weight;
            if (!affine) {
                // Pull the target representative back through the word's
                // return steps, accumulating phi at each preimage.
                double x = rep[i];
                double sum = 0.0;
                for (size_t k = w.size() - 1; k-- > 0;) {
                    double t = pot.spec.g_inverse(x);
                    x = pot.spec.left_edge(w[k]) + pot.spec.width(w[k]) * t;
                    sum += -std::log(pot.spec.g_prime(t) / pot.spec.width(w[k]));
                }
                weight = std::exp(sum + pot.shift * rw.return_time);
            }
            op.M[i][size_t(it->second)] += weight;
        }
    }
    return op;
}

// Standalone single application, per the operator contract.
inline std::vector<double> transfer_apply(const std::vector<double>& f, const Potential& pot,
                                          const TransferCaps& caps = {}) {
    return build_transfer_operator(pot, caps).apply(f);
}

struct SpectralReport {
    TransferCaps caps;
    double lambda = 0.0;
    std::vector<Word> basis;
    std::vector<double> h;   // eigenfunction, <nu, h> = 1
    std::vector<double> nu;  // eigenmeasure, total mass 1
    double induced_mass = 0.0;  // direct sum over first-return words (oracle)
    double subleading_ratio = 0.0;
    std::vector<double> decay;  // sup norm of lambda^{-n} L^n f - h <nu, f>
    double decay_slope = 0.0;
    bool decay_slope_valid = false;
    double decay_fit_residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

namespace detail {
inline double sup_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}
inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}
}  // namespace detail

// Power iteration on the truncated operator: leading pair (lambda, h) from
// forward iteration, nu from the adjoint, subleading modulus from a dense
// eigensolve, and the decay curve of the normalized iterates for f = h + v2.
inline SpectralReport power_iterate(const Potential& pot, const TransferCaps& caps, int iters) {
    if (iters < 2) throw std::invalid_argument("iters must be >= 2");
    TransferOperator op = build_transfer_operator(pot, caps);
    size_t B = op.basis.size();
    SpectralReport rep;
    rep.caps = caps;
    rep.basis = op.basis;

    // Direct-sum oracle over the same truncated word family.
    rep.induced_mass = 0.0;
    for (const auto& rw : mp1_words(caps.word_len_cap, Mp1Mode::strict_suffix, caps.symbol_cap))
        rep.induced_mass += std::exp(induced_potential(rw, pot).value);

    // Leading eigenfunction.
    std::vector<double> h(B, 1.0);
    double lambda = 0.0, prev_lambda = -1.0;
    int used = 0;
    bool settled = false;
    for (int k = 0; k < iters; ++k) {
        std::vector<double> next = op.apply(h);
        double norm = detail::sup_norm(next);
        if (norm == 0.0) throw ConvergenceError("transfer iterate collapsed to zero");
        lambda = norm;
        for (double& x : next) x /= norm;
        h.swap(next);
        ++used;
        if (k > 0 && std::abs(lambda - prev_lambda) <= 1e-13 * std::max(1.0, lambda)) {
            settled = true;
            break;
        }
        prev_lambda = lambda;
    }
    rep.iterations = used;
    rep.converged = settled || std::abs(lambda - prev_lambda) <= 1e-10 * std::max(1.0, lambda);
    if (!rep.converged)
        throw ConvergenceError("leading eigenvalue did not stabilize within iteration budget");

    // Eigenmeasure from the adjoint, normalized to unit mass.
    std::vector<double> nu(B, 1.0 / double(B));
    for (int k = 0; k < used; ++k) {
        std::vector<double> next = op.apply_adjoint(nu);
        double mass = 0.0;
        for (double x : next) mass += x;
        if (mass == 0.0) throw ConvergenceError("adjoint iterate collapsed to zero");
        for (double& x : next) x /= mass;
        nu.swap(next);
    }
    // Normalize <nu, h> = 1.
    double nh = detail::dot(nu, h);
    if (nh <= 0.0) throw ConvergenceError("eigenpair normalization failed");
    for (double& x : h) x /= nh;
    rep.lambda = lambda;
    rep.h = h;
    rep.nu = nu;

    // Subleading modulus from the full spectrum. Deflated power iteration is
    // useless here: the truncated operator is far from normal and the second
    // eigenvalue is a complex pair, so sup-norm ratios oscillate forever.
    std::vector<double> v(B, 0.0);
    {
        Eigen::MatrixXd dm{Eigen::Index(B), Eigen::Index(B)};
        for (size_t i = 0; i < B; ++i)
            for (size_t j = 0; j < B; ++j) dm(Eigen::Index(i), Eigen::Index(j)) = op.M[i][j];
        Eigen::EigenSolver<Eigen::MatrixXd> es(dm, /*computeEigenvectors=*/true);
        if (es.info() != Eigen::Success)
            throw ConvergenceError("dense eigensolve of the truncated operator failed");
        const auto& ev = es.eigenvalues();
        Eigen::Index lead = 0, sub = -1;
        for (Eigen::Index k = 1; k < ev.size(); ++k)
            if (std::abs(ev[k]) > std::abs(ev[lead])) lead = k;
        for (Eigen::Index k = 0; k < ev.size(); ++k) {
            if (k == lead) continue;
            if (sub < 0 || std::abs(ev[k]) > std::abs(ev[sub])) sub = k;
        }
        rep.subleading_ratio = sub >= 0 ? std::abs(ev[sub]) / std::abs(ev[lead]) : 0.0;
        if (std::abs(std::abs(ev[lead]) - lambda) > 1e-8 * std::max(1.0, lambda))
            throw ConvergenceError("power iteration and dense spectrum disagree on lambda");
        if (sub >= 0) {
            // Real part of the subleading eigenvector, cleaned of any leading
            // component, as the perturbation direction for the decay curve.
            for (size_t i = 0; i < B; ++i) v[i] = es.eigenvectors().col(sub)[Eigen::Index(i)].real();
            double c = detail::dot(nu, v);
            for (size_t i = 0; i < B; ++i) v[i] -= c * h[i];
            double vn = detail::sup_norm(v);
            if (vn > 0)
                for (double& x : v) x /= vn;
        }
    }

    // Decay curve for f = h + v2: residual_n = sup |lambda^{-n} L^n f - h <nu, f>|.
    std::vector<double> f(B);
    double vnorm = detail::sup_norm(v);
    for (size_t i = 0; i < B; ++i) f[i] = h[i] + (vnorm > 0 ? v[i] : 0.0);
    double fint = detail::dot(nu, f);
    std::vector<double> g = f;
    double scale = 1.0;
    int curve_len = std::min(iters, 60);
    for (int n = 1; n <= curve_len; ++n) {
        g = op.apply(g);
        scale /= lambda;
        double resid = 0.0;
        for (size_t i = 0; i < B; ++i)
            resid = std::max(resid, std::abs(scale * g[i] - h[i] * fint));
        rep.decay.push_back(resid);
    }
    std::vector<double> xs, ys;
    for (size_t n = 0; n < rep.decay.size(); ++n) {
        if (rep.decay[n] > 1e-12) {
            xs.push_back(double(n + 1));
            ys.push_back(std::log(rep.decay[n]));
        }
    }
    if (xs.size() >= 3) {
        auto lf = linear_fit(xs, ys);
        rep.decay_slope = lf.slope;
        rep.decay_fit_residual = 1.0 - lf.r2;
        rep.decay_slope_valid = true;
    }
    return rep;
}

}  // namespace cms
