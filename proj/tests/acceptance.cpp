// Acceptance gate: one self-contained check per shipped guarantee, each
// printing a single PASS/FAIL line. Exit code 0 iff everything passes.

#include "cms/config.hpp"
#include "cms/measure.hpp"
#include "cms/returns.hpp"
#include "cms/rng.hpp"
#include "cms/stats.hpp"
#include "cms/thermo.hpp"
#include "cms/transfer.hpp"
#include "cms/word.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace cms;

namespace {

int g_failures = 0;

void run(int id, const std::string& name, const std::function<bool(std::string&)>& body) {
    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();
    std::string detail;
    bool pass = false;
    try {
        pass = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(clock::now() - t0).count();
    if (!pass) ++g_failures;
    std::printf("criterion %2d %s  (%6.2fs)  %s%s%s\n", id, pass ? "PASS" : "FAIL", secs,
                name.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
}

ThermoCaps pinned_caps() {
    ThermoCaps caps;
    caps.beta = 0.3464;  // fitted tail base of the default model, pinned
    return caps;
}

}  // namespace

int main() {
    setvbuf(stdout, nullptr, _IONBF, 0);
    ModelSpec spec;

    run(1, "admissible enumeration goldens", [&](std::string& d) {
        auto w3 = enumerate_admissible({1}, 3);
        if (w3 != std::vector<Word>{{1, 1, 1}, {1, 1, 2}}) return false;
        auto w4 = enumerate_admissible({1}, 4);
        std::set<Word> got(w4.begin(), w4.end());
        std::set<Word> expect = {{1, 1, 1, 1}, {1, 1, 1, 2}, {1, 1, 1, 3}, {1, 1, 2, 1},
                                 {1, 1, 2, 2}, {1, 1, 2, 3}, {1, 1, 2, 4}};
        d = "order-4 count " + std::to_string(w4.size());
        return got == expect && w4.size() == 7;
    });

    run(2, "gap thresholds of the order-3 stage", [&](std::string& d) {
        auto check = [](const std::vector<GapStem>& gaps, const Word& stem, long long thr) {
            for (const auto& g : gaps)
                if (g.stem == stem) return g.threshold == thr;
            return false;
        };
        bool ok = check(enumerate_gaps(3, 1), {3}, 3) && check(enumerate_gaps(3, 2), {3, 1}, 4) &&
                  check(enumerate_gaps(3, 2), {3, 2}, 5) && check(enumerate_gaps(3, 2), {3, 3}, 6) &&
                  check(enumerate_gaps(3, 3), {3, 1, 1}, 5);
        d = "five stem/threshold pairs";
        return ok;
    });

    run(3, "return words: worked example and exhaustive length cap", [&](std::string& d) {
        auto words13 = first_return_words(1, 3);
        std::set<Word> got;
        for (const auto& rw : words13) {
            if (rw.return_time != int(rw.word.size()) - 1) return false;
            got.insert(rw.word);
        }
        if (!got.count({1, 1, 1, 3}) || !got.count({1, 1, 2, 3})) return false;
        for (const auto& rw : words13)
            if ((rw.word == Word{1, 1, 1, 3} || rw.word == Word{1, 1, 2, 3}) &&
                rw.return_time != 3)
                return false;
        size_t total = 0;
        for (int s = 1; s <= 8; ++s)
            for (int t = 1; t <= 8; ++t)
                for (const auto& rw : first_return_words(s, t)) {
                    ++total;
                    if (!rw.satisfies_predicate() || !rw.satisfies_length_bound()) return false;
                    if (int(rw.word.size()) > t - s + 2) return false;
                }
        d = std::to_string(total) + " words checked";
        return total > 0;
    });

    run(4, "overlap concatenation stays admissible", [&](std::string& d) {
        std::vector<Word> all;
        Word w;
        std::function<void()> rec = [&]() {
            if (!w.empty() && is_admissible(w)) all.push_back(w);
            if (w.size() == 5) return;
            for (int x = 1; x <= 6; ++x) {
                w.push_back(x);
                if (is_admissible(w)) rec();
                w.pop_back();
            }
        };
        rec();
        size_t checked = 0;
        for (const auto& u : all)
            for (const auto& v : all) {
                if (u.back() != v.front()) continue;
                if (!is_admissible(overlap_concat(u, v))) return false;
                ++checked;
            }
        CounterRng rng(4242, 0);
        for (int trial = 0; trial < 100000; ++trial) {
            auto random_admissible = [&](int len) {
                Word r{1 + int(rng.next() % 9)};
                long long budget = r[0];
                for (int k = 1; k < len; ++k) {
                    long long x = 1 + (long long)(rng.next() % (uint64_t)budget);
                    r.push_back(int(std::min<long long>(x, 1 << 20)));
                    budget += r.back();
                }
                return r;
            };
            Word u = random_admissible(2 + int(rng.next() % 11));
            Word v = random_admissible(2 + int(rng.next() % 11));
            v.front() = u.back();
            long long budget = v.front();
            for (size_t k = 1; k < v.size(); ++k) {
                if (v[k] > budget) v[k] = int(budget);
                budget += v[k];
            }
            if (!is_admissible(overlap_concat(u, v))) return false;
            ++checked;
        }
        auto wit = markov_check({1, 1, 2}, {2});
        bool strict = std::count(wit.strictness_witnesses.begin(),
                                 wit.strictness_witnesses.end(), 3) == 1 &&
                      is_admissible({1, 1, 2, 3}) && !is_admissible({2, 3});
        d = std::to_string(checked) + " concatenations, strictness witness ok";
        return strict;
    });

    run(5, "return-time tail lemma and geometric fit", [&](std::string& d) {
        if (!verify_return_lemma_states(12)) return false;
        auto fit = return_tail(12, spec);
        if (!fit.lemma_ok || !fit.bounds_ok) return false;
        for (size_t n = 1; n <= 12; ++n)
            if (fit.mass[n - 1].upper > pow2_inv(unsigned(n)) * 2) return false;
        std::ostringstream os;
        os.precision(4);
        os << "beta=" << fit.beta << " r2=" << fit.r2;
        d = os.str();
        return fit.beta < 1.0 && fit.r2 >= 0.98;
    });

    run(6, "certified Cantor measures", [&](std::string& d) {
        auto m = relative_measure(1, 60, spec);
        if (m.width_d() >= 1e-6 || m.lower_d() < 0.288) return false;
        for (int n = 5; n <= 12; ++n) {
            auto mn = cantor_measure(n, 60, spec);
            if (mn.lower_d() < 1.0 - std::pow(2.0, 1 - n) - 1e-6) return false;
        }
        std::ostringstream os;
        os.precision(10);
        os << "rho(1) in [" << m.lower_d() << ", " << m.upper_d() << "]";
        d = os.str();
        return true;
    });

    run(7, "tower partition sums and the pressure bracket", [&](std::string& d) {
        // Oracle before goldens: periodic-word sum for n <= 6.
        for (int n = 1; n <= 6; ++n) {
            Rational brute = 0;
            Word w{1};
            std::function<void()> rec = [&]() {
                if (int(w.size()) == n) {
                    Word doubled = w;
                    doubled.insert(doubled.end(), w.begin(), w.end());
                    if (is_admissible(doubled)) {
                        Rational mass = 1;
                        for (int s : w) mass *= spec.width_exact(s);
                        brute += mass;
                    }
                    return;
                }
                long long budget = symbol_sum(w);
                for (long long x = 1; x <= budget; ++x) {
                    w.push_back(int(x));
                    rec();
                    w.pop_back();
                }
            };
            rec();
            if (tower_partition_exact(n, spec) != brute) return false;
        }
        if (tower_partition_exact(1, spec) != Rational(1, 2)) return false;
        if (tower_partition_exact(2, spec) != Rational(1, 4)) return false;
        if (tower_partition_exact(3, spec) != Rational(3, 16)) return false;
        if (tower_partition_exact(4, spec) != Rational(43, 256)) return false;
        auto pres = gurevich_pressure(Potential{spec, 0.0}, 12, SumMode::tower, pinned_caps());
        double halfwidth = 0.5 * (pres.pg_hi - pres.pg_lo);
        double cap = std::log(2.0 / to_double(pres.cantor_lower)) / 12.0;
        std::ostringstream os;
        os.precision(6);
        os << "bracket [" << pres.pg_lo << ", " << pres.pg_hi << "]";
        d = os.str();
        return pres.contains_zero && pres.contains_zero_exact && halfwidth <= cap + 1e-12;
    });

    run(8, "discriminant scan positivity", [&](std::string& d) {
        auto scan = discriminant_scan({0.0, 0.05, 0.1, 0.2, 0.9, 1.2}, spec, pinned_caps());
        double v0 = scan.entries[0].value_lo;
        for (size_t i = 0; i < 4; ++i) {
            const auto& e = scan.entries[i];
            if (!e.finite) return false;
            if (std::abs(e.value_lo - (e.p + v0)) > 1e-9) return false;
        }
        bool diverges_past_threshold = !scan.entries[5].finite && scan.entries[5].p >= scan.threshold;
        std::ostringstream os;
        os.precision(4);
        os << "threshold=" << scan.threshold << " value(0.9)=" << scan.entries[4].value_lo;
        d = os.str();
        return diverges_past_threshold && scan.positive;
    });

    run(9, "transfer operator spectrum and decay", [&](std::string& d) {
        TransferCaps caps;  // symbols <= 20, depth 6
        auto affine = power_iterate(Potential{spec, 0.0}, caps, 200);
        if (std::abs(affine.lambda - affine.induced_mass) > 1e-10) return false;
        if (!(affine.subleading_ratio < 1.0)) return false;
        ModelSpec pert = spec;
        pert.perturbation = 0.05;
        auto rep = power_iterate(Potential{pert, 0.0}, caps, 200);
        if (!(rep.subleading_ratio < 1.0) || !rep.decay_slope_valid) return false;
        std::ostringstream os;
        os.precision(5);
        os << "lambda=" << affine.lambda << " sub=" << rep.subleading_ratio
           << " slope=" << rep.decay_slope;
        d = os.str();
        return std::abs(rep.decay_slope - std::log(rep.subleading_ratio)) < 0.05;
    });

    run(10, "topological mixing horizon", [&](std::string& d) {
        auto states = mp1_words(6, Mp1Mode::strict_suffix, 4);
        auto table = mixing_check(states, 20);
        for (const auto& e : table)
            if (e.N < 1 || e.N > 20) return false;
        d = std::to_string(states.size()) + " states, all pairs connected";
        return !states.empty();
    });

    run(11, "lyapunov exponent and entropy", [&](std::string& d) {
        double closed = closed_form_lyapunov(spec);
        if (std::abs(closed - 2.0 * std::log(2.0)) > 1e-12) return false;
        if (std::abs(closed_form_entropy(spec) - closed) > 1e-12) return false;
        RunConfig cfg;
        cfg.seed = 42;
        cfg.steps = 1000000;
        auto er = entropy_check(cfg, spec);
        if (std::abs(er.integral.value - closed) > 0.01) return false;
        if (std::abs(er.entropy.value - closed) > 0.01) return false;
        double gap = std::abs(er.entropy.value - er.integral.value);
        double sigma = std::hypot(er.entropy.stderror, er.integral.stderror);
        std::ostringstream os;
        os.precision(6);
        os << "mc=" << er.integral.value << " closed=" << closed;
        d = os.str();
        return gap <= 3.0 * std::max(sigma, 1e-4);
    });

    run(12, "decay of correlations", [&](std::string& d) {
        double eta_max = 0.0;
        for (const char* obs : {"x_centered", "ind_e1_2"}) {
            for (uint64_t seed : {42ULL, 1337ULL}) {
                RunConfig cfg;
                cfg.seed = seed;
                cfg.steps = 1000000;
                auto f = make_observable(obs, spec);
                auto cor = correlation(f, f, cfg, 10, spec);
                if (!cor.fit_ok || cor.eta >= 1.0 || cor.r2 < 0.95) return false;
                eta_max = std::max(eta_max, cor.eta);
                if (std::string(obs) == "x_centered" &&
                    std::abs(cor.values[0] - 1.0 / 12.0) > 3.0 * cor.stderrors[0])
                    return false;
            }
        }
        std::ostringstream os;
        os.precision(4);
        os << "max eta=" << eta_max;
        d = os.str();
        return true;
    });

    run(13, "central limit theorem for block sums", [&](std::string& d) {
        RunConfig cfg;
        cfg.seed = 7;
        auto f = make_observable("x_centered", spec);
        auto main = clt_test(f, cfg, 10000, 10000, spec);
        if (main.degenerate || main.ks_distance >= 0.02) return false;
        // Variance stability across block lengths, within sampling error of
        // the chi-square spread sqrt(2/blocks).
        auto half = clt_test(f, cfg, 5000, 10000, spec);
        auto dbl = clt_test(f, cfg, 20000, 5000, spec);
        auto rel_ok = [&](const CltReport& a, const CltReport& b) {
            double tol = 3.0 * std::sqrt(2.0 / double(a.blocks)) +
                         3.0 * std::sqrt(2.0 / double(b.blocks));
            return std::abs(a.sigma2 - b.sigma2) <= tol * std::max(a.sigma2, b.sigma2) + 1e-3;
        };
        std::ostringstream os;
        os.precision(5);
        os << "ks=" << main.ks_distance << " sigma2=" << main.sigma2;
        d = os.str();
        return rel_ok(main, half) && rel_ok(main, dbl);
    });

    run(14, "variation of the expansion over deepening rectangles", [&](std::string& d) {
        RectangleSpec rect;
        rect.past = {1};
        rect.future = {1};
        ModelSpec pert = spec;
        pert.perturbation = 0.05;
        auto fit = variation_check(rect, 64, pert, 6);
        if (!fit.monotone || !(fit.theta0 < 1.0) || !(fit.theta0 > 0.0)) return false;
        auto flat = variation_check(rect, 64, spec, 6);
        for (const auto& row : flat.rows)
            if (row.variation != 0.0) return false;
        std::ostringstream os;
        os.precision(4);
        os << "theta0=" << fit.theta0 << " theta1=" << fit.theta1;
        d = os.str();
        return flat.C == 0.0;
    });

    run(15, "condition verifier and rigged configurations", [&](std::string& d) {
        auto rep = verify_conditions(spec);
        if (!rep.all_pass() || std::abs(rep.K0 - 2.0) > 1e-12) return false;
        ModelSpec rig1 = spec;
        rig1.width_base = 0.4;
        rig1.width_base_exact = Rational(2, 5);
        rig1.height_base = 0.45;
        for (const auto& e : verify_conditions(rig1).entries)
            if (e.pass != (e.name != "H5")) return false;
        ModelSpec rig2 = spec;
        rig2.perturbation = 0.6;
        for (const auto& e : verify_conditions(rig2).entries)
            if (e.pass != (e.name != "H2")) return false;
        d = "K0=2, rigs fail H5 / H2 only";
        return true;
    });

    std::printf("%s: %d of 15 criteria passed\n", g_failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
                15 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
