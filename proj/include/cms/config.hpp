#pragma once

#include "cms/model.hpp"
#include "cms/rational.hpp"
#include "cms/stats.hpp"
#include "cms/thermo.hpp"
#include "cms/transfer.hpp"

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace cms {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exact rational value of a plain decimal literal like "0.5" or "-1.25e-3".
inline Rational parse_decimal_rational(const std::string& s) {
    size_t epos = s.find_first_of("eE");
    std::string mant = s.substr(0, epos);
    long long expo = 0;
    if (epos != std::string::npos) expo = std::stoll(s.substr(epos + 1));
    bool neg = false;
    size_t i = 0;
    if (i < mant.size() && (mant[i] == '+' || mant[i] == '-')) neg = mant[i++] == '-';
    BigInt num = 0;
    long long frac_digits = 0;
    bool seen_dot = false, seen_digit = false;
    for (; i < mant.size(); ++i) {
        char c = mant[i];
        if (c == '.') {
            if (seen_dot) throw ConfigError("bad decimal: " + s);
            seen_dot = true;
        } else if (c >= '0' && c <= '9') {
            num = num * 10 + (c - '0');
            if (seen_dot) ++frac_digits;
            seen_digit = true;
        } else {
            throw ConfigError("bad decimal: " + s);
        }
    }
    if (!seen_digit) throw ConfigError("bad decimal: " + s);
    Rational r(num, 1);
    long long net = expo - frac_digits;
    Rational ten(10);
    if (net > 0) r *= rat_pow(ten, unsigned(net));
    if (net < 0) r /= rat_pow(ten, unsigned(-net));
    return neg ? -r : r;
}

// Flat dotted-key config: one `key = value` per line, `#` comments.
struct Config {
    std::map<std::string, std::string> kv;

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read config file: " + path);
        Config c;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            size_t hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            auto trim = [](std::string t) {
                size_t a = t.find_first_not_of(" \t\r");
                size_t b = t.find_last_not_of(" \t\r");
                return a == std::string::npos ? std::string() : t.substr(a, b - a + 1);
            };
            std::string body = trim(line);
            if (body.empty()) continue;
            size_t eq = body.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
            std::string key = trim(body.substr(0, eq));
            std::string val = trim(body.substr(eq + 1));
            if (key.empty() || val.empty())
                throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
            c.kv[key] = val;
        }
        return c;
    }

    bool has(const std::string& key) const { return kv.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& def) const {
        auto it = kv.find(key);
        return it == kv.end() ? def : it->second;
    }
    double get_double(const std::string& key, double def) const {
        auto it = kv.find(key);
        if (it == kv.end()) return def;
        try {
            size_t pos = 0;
            double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing junk");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": bad number '" + it->second + "'");
        }
    }
    long long get_int(const std::string& key, long long def) const {
        auto it = kv.find(key);
        if (it == kv.end()) return def;
        try {
            size_t pos = 0;
            long long v = std::stoll(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing junk");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": bad integer '" + it->second + "'");
        }
    }

    ModelSpec model() const {
        ModelSpec m;
        m.width_base = get_double("model.width_base", m.width_base);
        m.height_base = get_double("model.height_base", m.height_base);
        m.cone_slope = get_double("model.cone_slope", m.cone_slope);
        m.perturbation = get_double("model.perturbation", m.perturbation);
        m.symbol_cap = int(get_int("model.symbol_cap", m.symbol_cap));
        if (has("model.width_base")) m.width_base_exact = parse_decimal_rational(kv.at("model.width_base"));
        try {
            m.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        return m;
    }

    ThermoCaps thermo_caps() const {
        ThermoCaps c;
        c.symbol_cap = int(get_int("caps.symbol_cap", c.symbol_cap));
        c.mp1_len_cap = int(get_int("caps.mp1_len_cap", c.mp1_len_cap));
        c.tail_n_max = int(get_int("caps.tail_n_max", c.tail_n_max));
        c.beta = get_double("caps.beta", c.beta);
        return c;
    }

    TransferCaps transfer_caps() const {
        TransferCaps c;
        c.depth = int(get_int("caps.depth", c.depth));
        c.symbol_cap = int(get_int("caps.symbol_cap", c.symbol_cap));
        c.word_len_cap = int(get_int("caps.word_len_cap", c.word_len_cap));
        return c;
    }

    RunConfig mc() const {
        RunConfig r;
        r.seed = uint64_t(get_int("mc.seed", 1));
        r.burn_in = get_int("mc.burn_in", r.burn_in);
        r.steps = get_int("mc.steps", r.steps);
        r.samples = int(get_int("mc.samples", r.samples));
        try {
            r.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        return r;
    }
};

}  // namespace cms
