// Command-line frontend: wires the library modules to flat config files and
// JSON/CSV artifacts. Exit codes: 0 all checks pass, 1 a check failed,
// 2 configuration problem, 3 numeric/convergence problem.

#include "cms/config.hpp"
#include "cms/measure.hpp"
#include "cms/returns.hpp"
#include "cms/stats.hpp"
#include "cms/thermo.hpp"
#include "cms/transfer.hpp"
#include "cms/word.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

using namespace cms;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Context {
    std::string config_path;
    std::string out_dir = "out";
    int threads = 1;
    Config cfg;

    ModelSpec model() const { return cfg.model(); }

    void load() {
        if (!config_path.empty()) cfg = Config::load(config_path);
    }

    std::filesystem::path out_file(const std::string& name) const {
        std::filesystem::create_directories(out_dir);
        return std::filesystem::path(out_dir) / name;
    }

    void write_json(const std::string& name, json j) const {
        j["version"] = kVersion;
        std::ofstream f(out_file(name + ".json"));
        f << j.dump(2) << "\n";
    }

    void write_csv(const std::string& name, const std::string& header,
                   const std::vector<std::string>& rows) const {
        std::ofstream f(out_file(name + ".csv"));
        f << header << "\n";
        for (const auto& r : rows) f << r << "\n";
    }
};

int g_check_failures = 0;

void verdict(bool pass, const std::string& claim) {
    std::cout << (pass ? "PASS " : "FAIL ") << claim << "\n";
    if (!pass) ++g_check_failures;
}

Word parse_word(const std::string& s) {
    Word w;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        w.push_back(std::stoi(tok));
    }
    return w;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

// ---------------------------------------------------------------------------
// Command bodies. Each returns nothing; failures go through verdict().

void cmd_verify(const Context& ctx) {
    auto rep = verify_conditions(ctx.model());
    json entries = json::array();
    for (const auto& e : rep.entries) {
        verdict(e.pass, e.name + " margin=" + fmt(e.margin) + " (" + e.witness + ")");
        entries.push_back({{"name", e.name},
                           {"pass", e.pass},
                           {"margin", e.margin},
                           {"witness", e.witness}});
    }
    ctx.write_json("verify", {{"all_pass", rep.all_pass()},
                              {"K0", rep.K0},
                              {"C0", rep.C0},
                              {"B0", rep.B0},
                              {"entries", entries}});
}

void cmd_enumerate(const Context& ctx, const std::string& prefix, int length, int cap) {
    auto words = enumerate_admissible(parse_word(prefix), length, cap);
    std::vector<std::string> rows;
    for (const auto& w : words) {
        std::cout << word_to_string(w) << "\n";
        rows.push_back(word_to_string(w));
    }
    ctx.write_csv("enumerate", "word", rows);
    ctx.write_json("enumerate",
                   {{"prefix", prefix}, {"length", length}, {"cap", cap}, {"count", words.size()}});
}

void cmd_gaps(const Context& ctx, int symbol, int order) {
    auto gaps = enumerate_gaps(symbol, order);
    std::vector<std::string> rows;
    for (const auto& g : gaps) {
        std::cout << word_to_string(g.stem) << " gaps at k > " << g.threshold << "\n";
        rows.push_back(word_to_string(g.stem) + "," + std::to_string(g.threshold));
    }
    ctx.write_csv("gaps", "stem,threshold", rows);
    ctx.write_json("gaps", {{"symbol", symbol}, {"order", order}, {"count", gaps.size()}});
}

void cmd_cantor(const Context& ctx, int budget, int depth, int stages) {
    ModelSpec spec = ctx.model();
    auto m = relative_measure(budget, depth, spec);
    std::cout << "rho(" << budget << ") in [" << fmt(m.lower_d()) << ", " << fmt(m.upper_d())
              << "] width " << fmt(m.width_d()) << " at depth " << depth << "\n";
    verdict(m.width_d() < 1e-6, "survival interval width < 1e-6");
    std::vector<std::string> rows;
    for (int n = 1; n <= stages; ++n) {
        auto s = cantor_measure(n, depth, spec);
        rows.push_back(std::to_string(n) + "," + fmt(s.lower_d()) + "," + fmt(s.upper_d()));
    }
    ctx.write_csv("cantor", "stage,lower,upper", rows);
    ctx.write_json("cantor", {{"budget", budget},
                              {"depth", depth},
                              {"lower", m.lower_d()},
                              {"upper", m.upper_d()},
                              {"width", m.width_d()}});
}

void cmd_returns(const Context& ctx, int source, int target) {
    auto words = first_return_words(source, target);
    std::vector<std::string> rows;
    bool all_ok = true;
    for (const auto& rw : words) {
        rows.push_back(word_to_string(rw.word) + "," + std::to_string(rw.return_time));
        all_ok = all_ok && rw.satisfies_predicate() && rw.satisfies_length_bound();
        std::cout << word_to_string(rw.word) << " rt=" << rw.return_time << "\n";
    }
    verdict(all_ok, "all return words satisfy the defining predicate and length cap");
    ctx.write_csv("returns", "word,return_time", rows);
    ctx.write_json("returns",
                   {{"source", source}, {"target", target}, {"count", words.size()}});
}

void cmd_tail(const Context& ctx, int nmax) {
    ModelSpec spec = ctx.model();
    auto fit = return_tail(nmax, spec);
    bool lemma = verify_return_lemma_states(nmax) && fit.lemma_ok;
    verdict(lemma, "non-returned stems end with a symbol >= their length");
    verdict(fit.bounds_ok, "non-returned mass below the symbol-tail bound");
    verdict(fit.beta < 1.0 && fit.r2 >= 0.98,
            "geometric tail fit beta=" + fmt(fit.beta) + " r2=" + fmt(fit.r2));
    std::vector<std::string> rows;
    for (size_t n = 1; n <= fit.mass.size(); ++n)
        rows.push_back(std::to_string(n) + "," + fmt(fit.mass[n - 1].lower_d()) + "," +
                       fmt(fit.mass[n - 1].upper_d()) + "," + fmt(to_double(fit.bound[n - 1])));
    ctx.write_csv("tail", "n,mass_lower,mass_upper,bound", rows);
    ctx.write_json("tail", {{"n_max", nmax},
                            {"beta", fit.beta},
                            {"C", fit.C},
                            {"r2", fit.r2},
                            {"lemma_ok", lemma},
                            {"bounds_ok", fit.bounds_ok}});
}

void cmd_mixing(const Context& ctx, int max_len, int symbol_cap, int horizon) {
    auto states = mp1_words(max_len, Mp1Mode::strict_suffix, symbol_cap);
    auto table = mixing_check(states, horizon);
    bool all = true;
    std::vector<std::string> rows;
    for (const auto& e : table) {
        all = all && e.N >= 1;
        rows.push_back(std::to_string(e.from) + "," + std::to_string(e.to) + "," +
                       std::to_string(e.N));
    }
    verdict(all && !states.empty(),
            "finite mixing horizon for all " + std::to_string(states.size()) + " states");
    ctx.write_csv("mixing", "from,to,N", rows);
    ctx.write_json("mixing", {{"states", states.size()}, {"horizon", horizon}});
}

void cmd_pressure(const Context& ctx, const std::string& mode_s, int nmax, double shift) {
    ModelSpec spec = ctx.model();
    SumMode mode = SumMode::tower;
    if (mode_s == "induced_mp") mode = SumMode::induced_mp;
    else if (mode_s == "induced_t1") mode = SumMode::induced_t1;
    else if (mode_s != "tower") throw ConfigError("unknown pressure mode: " + mode_s);
    auto pres = gurevich_pressure(Potential{spec, shift}, nmax, mode, ctx.cfg.thermo_caps());
    std::vector<std::string> rows;
    for (const auto& z : pres.table) {
        std::cout << "Z_" << z.n << " = " << fmt(z.lo);
        if (z.exact && z.n <= 8)
            std::cout << "  (exactly " << z.exact_lo.str() << ")";
        std::cout << "\n";
        rows.push_back(std::to_string(z.n) + "," + fmt(z.lo) + "," + fmt(z.hi) + "," +
                       fmt(pres.slopes[size_t(z.n - 1)]));
    }
    std::cout << "pressure bracket [" << fmt(pres.pg_lo) << ", " << fmt(pres.pg_hi) << "]\n";
    if (mode == SumMode::tower && shift == 0.0)
        verdict(pres.contains_zero && pres.contains_zero_exact,
                "tower bracket contains zero (exact rational containment)");
    ctx.write_csv("pressure", "n,z_lower,z_upper,slope", rows);
    ctx.write_json("pressure", {{"mode", mode_s},
                                {"shift", shift},
                                {"n_max", nmax},
                                {"pg_lo", pres.pg_lo},
                                {"pg_hi", pres.pg_hi},
                                {"contains_zero", pres.contains_zero}});
}

void cmd_discriminant(const Context& ctx, const std::string& grid_s) {
    ModelSpec spec = ctx.model();
    std::vector<double> grid;
    std::stringstream ss(grid_s);
    std::string tok;
    while (std::getline(ss, tok, ',')) grid.push_back(std::stod(tok));
    auto scan = discriminant_scan(grid, spec, ctx.cfg.thermo_caps());
    std::vector<std::string> rows;
    for (const auto& e : scan.entries) {
        std::cout << "p=" << e.p << "  "
                  << (e.finite ? "value=" + fmt(e.value_lo) : "diverges") << "\n";
        rows.push_back(fmt(e.p) + "," + (e.finite ? fmt(e.value_lo) : "inf") + "," +
                       (e.finite ? fmt(e.value_hi) : "inf"));
    }
    verdict(scan.positive, "discriminant positive below the divergence threshold " +
                               fmt(scan.threshold));
    ctx.write_csv("discriminant", "p,value_lower,value_upper", rows);
    ctx.write_json("discriminant", {{"threshold", scan.threshold},
                                    {"beta", scan.beta},
                                    {"beta_is_fitted", scan.beta_is_fitted},
                                    {"positive", scan.positive}});
}

void cmd_spectrum(const Context& ctx, int iterations) {
    ModelSpec spec = ctx.model();
    auto rep = power_iterate(Potential{spec, 0.0}, ctx.cfg.transfer_caps(), iterations);
    std::cout << "lambda = " << fmt(rep.lambda) << ", direct mass = " << fmt(rep.induced_mass)
              << ", subleading = " << fmt(rep.subleading_ratio) << "\n";
    if (spec.affine())
        verdict(std::abs(rep.lambda - rep.induced_mass) < 1e-10,
                "leading eigenvalue equals the summed induced mass");
    verdict(rep.subleading_ratio < 1.0, "spectral gap (subleading ratio < 1)");
    std::vector<std::string> rows;
    for (size_t n = 0; n < rep.decay.size(); ++n)
        rows.push_back(std::to_string(n + 1) + "," + fmt(rep.decay[n]));
    ctx.write_csv("spectrum_decay", "n,residual", rows);
    ctx.write_json("spectrum", {{"lambda", rep.lambda},
                                {"induced_mass", rep.induced_mass},
                                {"subleading_ratio", rep.subleading_ratio},
                                {"decay_slope", rep.decay_slope},
                                {"decay_slope_valid", rep.decay_slope_valid},
                                {"basis_size", rep.basis.size()},
                                {"iterations", rep.iterations}});
}

void cmd_variation(const Context& ctx, const std::string& past_s, const std::string& future_s,
                   int depth, int samples) {
    ModelSpec spec = ctx.model();
    RectangleSpec rect;
    rect.past = parse_word(past_s);
    rect.future = parse_word(future_s);
    auto fit = variation_check(rect, samples, spec, depth);
    verdict(fit.monotone, "variation nonincreasing in min(past, future) depth");
    if (fit.C == 0.0)
        verdict(true, "variation vanishes identically (affine model)");
    else
        verdict(fit.theta0 < 1.0, "fitted decay base theta0=" + fmt(fit.theta0) + " < 1");
    std::vector<std::string> rows;
    for (const auto& r : fit.rows)
        rows.push_back(std::to_string(r.m) + "," + std::to_string(r.n) + "," + fmt(r.variation));
    ctx.write_csv("variation", "past_depth,future_depth,variation", rows);
    ctx.write_json("variation", {{"theta0", fit.theta0},
                                 {"theta1", fit.theta1},
                                 {"C", fit.C},
                                 {"monotone", fit.monotone}});
}

void cmd_simulate(const Context& ctx, int bins) {
    ModelSpec spec = ctx.model();
    RunConfig cfg = ctx.cfg.mc();
    // Trajectories are independent counter-rng substreams, so they can run on
    // capped workers; merging per-trajectory histograms gives the same result
    // as the serial simulate() for any thread count.
    cfg.validate();
    int workers = std::max(1, std::min(ctx.threads, cfg.samples));
    std::vector<Histogram2D> parts(size_t(cfg.samples));
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int wkr = 0; wkr < workers; ++wkr)
        pool.emplace_back([&]() {
            for (int t; (t = next.fetch_add(1)) < cfg.samples;) {
                Histogram2D& p = parts[size_t(t)];
                p.bins = bins;
                p.counts.assign(size_t(bins) * bins, 0);
                p.symbol_counts.assign(64, 0);
                TrajectoryStream ts(spec, cfg.seed, uint64_t(t));
                for (long long s = 0; s < cfg.steps; ++s) {
                    if (s >= cfg.burn_in) {
                        int bx = std::min(bins - 1, int(ts.x() * bins));
                        int by = std::min(bins - 1, int(ts.y() * bins));
                        ++p.counts[size_t(bx) * bins + by];
                        ++p.symbol_counts[size_t(std::min(ts.symbol(), 64) - 1)];
                        ++p.total;
                    }
                    ts.step();
                }
            }
        });
    for (auto& th : pool) th.join();
    Histogram2D h;
    h.bins = bins;
    h.seed = cfg.seed;
    h.counts.assign(size_t(bins) * bins, 0);
    h.symbol_counts.assign(64, 0);
    for (const auto& p : parts) {
        for (size_t i = 0; i < p.counts.size(); ++i) h.counts[i] += p.counts[i];
        for (size_t i = 0; i < p.symbol_counts.size(); ++i) h.symbol_counts[i] += p.symbol_counts[i];
        h.total += p.total;
    }
    std::vector<std::string> rows;
    for (int bx = 0; bx < bins; ++bx)
        for (int by = 0; by < bins; ++by)
            rows.push_back(std::to_string(bx) + "," + std::to_string(by) + "," +
                           std::to_string(h.at(bx, by)));
    ctx.write_csv("histogram", "x_bin,y_bin,count", rows);
    std::vector<std::string> srows;
    for (size_t i = 0; i < h.symbol_counts.size(); ++i)
        if (h.symbol_counts[i])
            srows.push_back(std::to_string(i + 1) + "," + std::to_string(h.symbol_counts[i]));
    ctx.write_csv("symbols", "symbol,count", srows);
    ctx.write_json("simulate",
                   {{"seed", cfg.seed}, {"steps", cfg.steps}, {"samples", cfg.samples},
                    {"bins", bins}, {"total", h.total}});
    std::cout << "histogram written: " << h.total << " samples\n";
}

void cmd_lyapunov(const Context& ctx) {
    ModelSpec spec = ctx.model();
    RunConfig cfg = ctx.cfg.mc();
    auto est = lyapunov(cfg, spec);
    double closed = closed_form_lyapunov(spec);
    std::cout << "lyapunov mc=" << fmt(est.value) << " +- " << fmt(est.stderror)
              << ", closed form=" << fmt(closed) << "\n";
    verdict(std::abs(est.value - closed) <= std::max(0.01, 5.0 * est.stderror),
            "monte carlo lyapunov matches the closed form");
    ctx.write_json("lyapunov", {{"seed", est.seed},
                                {"value", est.value},
                                {"stderror", est.stderror},
                                {"closed_form", closed},
                                {"steps", cfg.steps}});
}

void cmd_entropy(const Context& ctx) {
    ModelSpec spec = ctx.model();
    RunConfig cfg = ctx.cfg.mc();
    auto rep = entropy_check(cfg, spec);
    std::cout << "entropy plug-in=" << fmt(rep.entropy.value)
              << ", birkhoff=" << fmt(rep.integral.value)
              << ", closed form=" << fmt(rep.closed_form) << "\n";
    double gap = std::abs(rep.entropy.value - rep.integral.value);
    double sigma = std::hypot(rep.entropy.stderror, rep.integral.stderror);
    verdict(gap <= 3.0 * std::max(sigma, 1e-4), "entropy and expansion estimates agree to 3 sigma");
    verdict(std::abs(rep.entropy.value - rep.closed_form) <=
                std::max(0.01, 5.0 * std::max(rep.entropy.stderror, 1e-4)),
            "entropy matches the closed form");
    ctx.write_json("entropy", {{"seed", cfg.seed},
                               {"plugin", rep.entropy.value},
                               {"birkhoff", rep.integral.value},
                               {"closed_form", rep.closed_form}});
}

void cmd_correlate(const Context& ctx, const std::string& f_id, const std::string& g_id,
                   int nmax) {
    ModelSpec spec = ctx.model();
    RunConfig cfg = ctx.cfg.mc();
    auto f = make_observable(f_id, spec);
    auto g = make_observable(g_id, spec);
    auto cor = correlation(f, g, cfg, nmax, spec);
    std::vector<std::string> rows;
    for (size_t i = 0; i < cor.lags.size(); ++i)
        rows.push_back(std::to_string(cor.lags[i]) + "," + fmt(cor.values[i]) + "," +
                       fmt(cor.stderrors[i]));
    std::cout << "C_0=" << fmt(cor.values[0]) << " eta=" << fmt(cor.eta) << " r2=" << fmt(cor.r2)
              << " window=[" << cor.fit_lo << "," << cor.fit_hi << "]\n";
    verdict(cor.fit_ok && cor.eta < 1.0, "exponential decay fit with eta < 1");
    ctx.write_csv("correlation", "lag,value,stderr", rows);
    ctx.write_json("correlate", {{"f", f_id},
                                 {"g", g_id},
                                 {"seed", cor.seed},
                                 {"eta", cor.eta},
                                 {"C", cor.C},
                                 {"r2", cor.r2},
                                 {"gamma_f", cor.gamma_f},
                                 {"gamma_g", cor.gamma_g}});
}

void cmd_clt(const Context& ctx, const std::string& f_id, long long block, long long blocks) {
    ModelSpec spec = ctx.model();
    RunConfig cfg = ctx.cfg.mc();
    auto f = make_observable(f_id, spec);
    auto rep = clt_test(f, cfg, block, blocks, spec);
    if (rep.degenerate) {
        std::cout << "warning: degenerate observable (sigma^2 ~ 0), no Gaussian limit claimed\n";
        ctx.write_json("clt", {{"seed", rep.seed}, {"degenerate", true}});
        return;
    }
    std::cout << "ks=" << fmt(rep.ks_distance) << " sigma2=" << fmt(rep.sigma2) << "\n";
    verdict(rep.ks_distance < 0.02, "block sums pass the KS test against the fitted normal");
    double sigma = std::sqrt(rep.sigma2);
    std::vector<std::string> rows;
    for (size_t k = 0; k < rep.quantiles.size(); ++k)
        rows.push_back(fmt(double(k) / 100.0) + "," + fmt(rep.quantiles[k]) + "," +
                       fmt(normal_cdf((rep.quantiles[k] - rep.mean) / sigma)));
    ctx.write_csv("clt", "quantile,block_sum,normal_cdf", rows);
    ctx.write_json("clt", {{"seed", rep.seed},
                           {"block_n", rep.block_n},
                           {"blocks", rep.blocks},
                           {"sigma2", rep.sigma2},
                           {"ks", rep.ks_distance}});
}

// Aggregated acceptance-style run. quick keeps every entry cheap; full uses
// the documented criterion-scale budgets.
void cmd_all(const Context& ctx, const std::string& profile) {
    bool full = profile == "full";
    if (!full && profile != "quick") throw ConfigError("profile must be quick or full");
    ModelSpec spec = ctx.model();
    json report;
    auto note = [&](int id, bool pass, const std::string& what) {
        report[std::to_string(id)] = {{"pass", pass}, {"check", what}};
        verdict(pass, "criterion " + std::to_string(id) + ": " + what);
    };

    note(1, enumerate_admissible({1}, 3) == std::vector<Word>{{1, 1, 1}, {1, 1, 2}} &&
            enumerate_admissible({1}, 4).size() == 7,
         "enumeration goldens");
    {
        auto g = enumerate_gaps(3, 2);
        bool ok = g.size() == 3;
        for (const auto& e : g) ok = ok && e.threshold == symbol_sum(e.stem);
        note(2, ok, "gap thresholds");
    }
    {
        bool ok = true;
        int cap = full ? 8 : 6;
        for (int s = 1; s <= cap && ok; ++s)
            for (int t = 1; t <= cap && ok; ++t)
                for (const auto& rw : first_return_words(s, t))
                    ok = ok && rw.satisfies_predicate() && rw.satisfies_length_bound();
        auto w13 = first_return_words(1, 3);
        bool worked = false;
        for (const auto& rw : w13) worked |= rw.word == Word{1, 1, 2, 3} && rw.return_time == 3;
        note(3, ok && worked, "return word structure");
    }
    {
        bool ok = true;
        CounterRng rng(9, 0);
        int trials = full ? 100000 : 10000;
        for (int k = 0; k < trials && ok; ++k) {
            Word u{1 + int(rng.next() % 5)};
            for (int i = 0; i < 6; ++i) u.push_back(1 + int(rng.next() % (uint64_t)symbol_sum(u)));
            Word v{u.back()};
            for (int i = 0; i < 6; ++i) v.push_back(1 + int(rng.next() % (uint64_t)symbol_sum(v)));
            ok = is_admissible(overlap_concat(u, v));
        }
        note(4, ok, "overlap concatenation admissible");
    }
    {
        int nmax = full ? 12 : 8;
        auto fit = return_tail(nmax, spec);
        note(5, verify_return_lemma_states(nmax) && fit.lemma_ok && fit.bounds_ok &&
                fit.beta < 1.0 && fit.r2 >= 0.98,
             "return-time tail");
    }
    {
        int depth = full ? 60 : 40;
        auto m = relative_measure(1, depth, spec);
        bool ok = m.width_d() < 1e-6 && m.lower_d() >= 0.288;
        for (int n = 5; n <= (full ? 12 : 8); ++n)
            ok = ok && cantor_measure(n, depth, spec).lower_d() >= 1.0 - std::pow(2.0, 1 - n) - 1e-6;
        note(6, ok, "certified Cantor measures");
    }
    {
        ThermoCaps caps = ctx.cfg.thermo_caps();
        if (caps.beta <= 0.0) caps.beta = 0.3464;
        int nmax = full ? 12 : 8;
        auto pres = gurevich_pressure(Potential{spec, 0.0}, nmax, SumMode::tower, caps);
        note(7, tower_partition_exact(4, spec) == Rational(43, 256) && pres.contains_zero &&
                pres.contains_zero_exact,
             "tower sums and pressure bracket");
        auto scan = discriminant_scan({0.0, 0.1, 0.9, 1.2}, spec, caps);
        note(8, scan.positive && !scan.entries.back().finite, "discriminant positivity");
    }
    {
        TransferCaps caps = ctx.cfg.transfer_caps();
        if (!full) {
            caps.depth = std::min(caps.depth, 4);
            caps.symbol_cap = std::min(caps.symbol_cap, 8);
            caps.word_len_cap = std::min(caps.word_len_cap, 6);
        }
        auto affine = power_iterate(Potential{spec, 0.0}, caps, 200);
        ModelSpec pert = spec;
        pert.perturbation = 0.05;
        auto rep = power_iterate(Potential{pert, 0.0}, caps, 200);
        note(9, std::abs(affine.lambda - affine.induced_mass) < 1e-10 &&
                rep.subleading_ratio < 1.0 && rep.decay_slope_valid &&
                std::abs(rep.decay_slope - std::log(rep.subleading_ratio)) < 0.05,
             "transfer operator spectrum");
    }
    {
        auto states = mp1_words(full ? 6 : 5, Mp1Mode::strict_suffix, 4);
        auto table = mixing_check(states, 20);
        bool ok = !states.empty();
        for (const auto& e : table) ok = ok && e.N >= 1;
        note(10, ok, "topological mixing");
    }
    RunConfig mc = ctx.cfg.mc();
    mc.steps = full ? 1000000 : 100000;
    {
        auto er = entropy_check(mc, spec);
        double closed = closed_form_lyapunov(spec);
        double tol = full ? 0.01 : 0.05;
        note(11, std::abs(closed - 2.0 * std::log(2.0)) < 1e-12 &&
                 std::abs(er.integral.value - closed) < tol &&
                 std::abs(er.entropy.value - closed) < tol,
             "lyapunov and entropy");
    }
    {
        auto f = make_observable("x_centered", spec);
        auto cor = correlation(f, f, mc, 10, spec);
        note(12, cor.fit_ok && cor.eta < 1.0 && cor.r2 >= 0.95 &&
                 std::abs(cor.values[0] - 1.0 / 12.0) <= 3.0 * cor.stderrors[0],
             "decay of correlations");
    }
    {
        auto f = make_observable("x_centered", spec);
        auto rep = clt_test(f, mc, full ? 10000 : 2000, full ? 10000 : 2000, spec);
        note(13, !rep.degenerate && rep.ks_distance < (full ? 0.02 : 0.05), "central limit theorem");
    }
    {
        RectangleSpec rect;
        rect.past = {1};
        rect.future = {1};
        ModelSpec pert = spec;
        pert.perturbation = 0.05;
        auto fit = variation_check(rect, 64, pert, 6);
        auto flat = variation_check(rect, 64, spec, 6);
        note(14, fit.monotone && fit.theta0 < 1.0 && flat.C == 0.0, "variation bound");
    }
    {
        auto rep = verify_conditions(spec);
        note(15, rep.all_pass() && std::abs(rep.K0 - 2.0) < 1e-12, "condition verifier");
    }
    report["profile"] = profile;
    report["seed"] = mc.seed;
    ctx.write_json("all", report);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"countable-shift toy-model toolkit"};
    app.require_subcommand(1);
    // Let --config/--out/--threads be given after the subcommand too.
    app.fallthrough();
    Context ctx;
    app.add_option("--config", ctx.config_path, "flat key = value config file")
        ->configurable(false);
    app.add_option("--out", ctx.out_dir, "artifact output directory");
    app.add_option("--threads", ctx.threads, "worker thread cap for sampled commands");

    auto* c_verify = app.add_subcommand("verify", "check the standing conditions");
    auto* c_enum = app.add_subcommand("enumerate", "list admissible words");
    std::string prefix = "1";
    int length = 4, cap = 0;
    c_enum->add_option("--prefix", prefix, "comma-separated prefix word");
    c_enum->add_option("--length", length, "total word length");
    c_enum->add_option("--cap", cap, "symbol cap (0 = none)");
    auto* c_gaps = app.add_subcommand("gaps", "gap families of a Cantor stage");
    int gsymbol = 3, gorder = 2;
    c_gaps->add_option("--symbol", gsymbol);
    c_gaps->add_option("--order", gorder);
    auto* c_cantor = app.add_subcommand("cantor", "certified survival measures");
    int budget = 1, depth = 60, stages = 12;
    c_cantor->add_option("--budget", budget);
    c_cantor->add_option("--depth", depth);
    c_cantor->add_option("--stages", stages);
    auto* c_returns = app.add_subcommand("returns", "first-return words between symbols");
    int source = 1, target = 3;
    c_returns->add_option("--source", source);
    c_returns->add_option("--target", target);
    auto* c_tail = app.add_subcommand("tail", "return-time tail masses and fit");
    int tail_nmax = 12;
    c_tail->add_option("--nmax", tail_nmax);
    auto* c_mixing = app.add_subcommand("mixing", "mixing horizon over capped states");
    int mix_len = 6, mix_cap = 4, horizon = 20;
    c_mixing->add_option("--max-len", mix_len);
    c_mixing->add_option("--symbol-cap", mix_cap);
    c_mixing->add_option("--horizon", horizon);
    auto* c_pressure = app.add_subcommand("pressure", "partition sums and the pressure bracket");
    std::string mode = "tower";
    int pnmax = 12;
    double shift = 0.0;
    c_pressure->add_option("--mode", mode, "tower | induced_mp | induced_t1");
    c_pressure->add_option("--nmax", pnmax);
    c_pressure->add_option("--shift", shift);
    auto* c_disc = app.add_subcommand("discriminant", "scan shifted induced pressures");
    std::string grid = "0,0.05,0.1,0.2,0.9,1.2";
    c_disc->add_option("--grid", grid, "comma-separated shift values");
    auto* c_spec = app.add_subcommand("spectrum", "truncated transfer operator spectrum");
    int iterations = 200;
    c_spec->add_option("--iterations", iterations);
    auto* c_var = app.add_subcommand("variation", "expansion variation over rectangles");
    std::string past = "1", future = "1";
    int vdepth = 6, vsamples = 64;
    c_var->add_option("--past", past);
    c_var->add_option("--future", future);
    c_var->add_option("--depth", vdepth);
    c_var->add_option("--samples", vsamples);
    auto* c_sim = app.add_subcommand("simulate", "orbit histogram");
    int bins = 64;
    c_sim->add_option("--bins", bins);
    auto* c_ly = app.add_subcommand("lyapunov", "monte carlo lyapunov exponent");
    auto* c_en = app.add_subcommand("entropy", "monte carlo entropy check");
    auto* c_cor = app.add_subcommand("correlate", "autocovariance curve and decay fit");
    std::string f_id = "x_centered", g_id = "x_centered";
    int cnmax = 10;
    c_cor->add_option("--f", f_id);
    c_cor->add_option("--g", g_id);
    c_cor->add_option("--nmax", cnmax);
    auto* c_clt = app.add_subcommand("clt", "block-sum central limit test");
    std::string clt_f = "x_centered";
    long long block = 10000, blocks = 10000;
    c_clt->add_option("--f", clt_f);
    c_clt->add_option("--block", block);
    c_clt->add_option("--blocks", blocks);
    auto* c_all = app.add_subcommand("all", "aggregated criteria run");
    std::string profile = "quick";
    c_all->add_option("--profile", profile, "quick | full");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        ctx.load();
        if (c_verify->parsed()) cmd_verify(ctx);
        if (c_enum->parsed()) cmd_enumerate(ctx, prefix, length, cap);
        if (c_gaps->parsed()) cmd_gaps(ctx, gsymbol, gorder);
        if (c_cantor->parsed()) cmd_cantor(ctx, budget, depth, stages);
        if (c_returns->parsed()) cmd_returns(ctx, source, target);
        if (c_tail->parsed()) cmd_tail(ctx, tail_nmax);
        if (c_mixing->parsed()) cmd_mixing(ctx, mix_len, mix_cap, horizon);
        if (c_pressure->parsed()) cmd_pressure(ctx, mode, pnmax, shift);
        if (c_disc->parsed()) cmd_discriminant(ctx, grid);
        if (c_spec->parsed()) cmd_spectrum(ctx, iterations);
        if (c_var->parsed()) cmd_variation(ctx, past, future, vdepth, vsamples);
        if (c_sim->parsed()) cmd_simulate(ctx, bins);
        if (c_ly->parsed()) cmd_lyapunov(ctx);
        if (c_en->parsed()) cmd_entropy(ctx);
        if (c_cor->parsed()) cmd_correlate(ctx, f_id, g_id, cnmax);
        if (c_clt->parsed()) cmd_clt(ctx, clt_f, block, blocks);
        if (c_all->parsed()) cmd_all(ctx, profile);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DivergenceError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const ConvergenceError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const InsufficientData& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return g_check_failures == 0 ? 0 : 1;
}
