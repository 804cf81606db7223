#include <catch2/catch_amalgamated.hpp>

#include "cms/returns.hpp"

#include <algorithm>
#include <functional>
#include <set>

using namespace cms;

namespace {
// Brute-force oracle: all admissible words from j0 to j1 under the length cap
// whose every intermediate suffix of length >= 2 is inadmissible.
std::vector<Word> brute_return_words(int j0, int j1) {
    std::vector<Word> out;
    int max_len = j1 - j0 + 2;
    if (max_len < 2) return out;
    Word w{j0};
    std::function<void(long long)> rec = [&](long long budget) {
        if (int(w.size()) >= 2 && w.back() == j1) {
            bool ok = true;
            for (size_t k = 1; ok && k + 2 <= w.size(); ++k) {
                Word suffix(w.begin() + long(k), w.end());
                if (is_admissible(suffix)) ok = false;
            }
            if (ok) out.push_back(w);
        }
        if (int(w.size()) >= max_len) return;
        for (long long x = 1; x <= budget; ++x) {
            w.push_back(int(x));
            rec(budget + x);
            w.pop_back();
        }
    };
    rec(j0);
    std::sort(out.begin(), out.end());
    return out;
}
}  // namespace

TEST_CASE("worked example: the two return words 1 -> 3 at return time 3") {
    auto words = first_return_words(1, 3);
    std::set<Word> got;
    for (const auto& rw : words) {
        got.insert(rw.word);
        REQUIRE(rw.source == 1);
        REQUIRE(rw.target == 3);
        REQUIRE(rw.satisfies_predicate());
        REQUIRE(rw.satisfies_length_bound());
    }
    REQUIRE(got.count({1, 1, 1, 3}) == 1);
    REQUIRE(got.count({1, 1, 2, 3}) == 1);
    for (const auto& rw : words)
        if (rw.word == Word{1, 1, 1, 3} || rw.word == Word{1, 1, 2, 3})
            REQUIRE(rw.return_time == 3);
}

TEST_CASE("return-word lists are complete and capped, exhaustively to symbol 8") {
    for (int s = 1; s <= 8; ++s)
        for (int t = 1; t <= 8; ++t) {
            auto words = first_return_words(s, t);
            std::vector<Word> got;
            for (const auto& rw : words) {
                REQUIRE(rw.satisfies_predicate());
                REQUIRE(rw.satisfies_length_bound());
                REQUIRE(int(rw.word.size()) <= t - s + 2);
                got.push_back(rw.word);
            }
            std::sort(got.begin(), got.end());
            REQUIRE(got == brute_return_words(s, t));
        }
}

TEST_CASE("first-return-to-base words under the strict suffix predicate") {
    auto words = mp1_words(7);
    REQUIRE(words.size() == 356);
    std::map<int, int> by_rt;
    for (const auto& rw : words) {
        REQUIRE(rw.source == 1);
        REQUIRE(rw.target == 1);
        // Strict suffix predicate: no interior 1 starts an admissible suffix.
        for (size_t k = 1; k + 1 < rw.word.size(); ++k)
            if (rw.word[k] == 1)
                REQUIRE_FALSE(is_admissible(Word(rw.word.begin() + long(k), rw.word.end())));
        by_rt[rw.return_time]++;
    }
    REQUIRE(by_rt[1] == 1);
    REQUIRE(by_rt[2] == 0);
    REQUIRE(by_rt[3] == 1);
    REQUIRE(by_rt[4] == 4);
    REQUIRE(by_rt[5] == 29);
    REQUIRE(by_rt[6] == 321);
    // Banning interior 1s outright is stricter than the suffix predicate.
    REQUIRE(mp1_words(7, Mp1Mode::no_interior_one).size() <= words.size());
}

TEST_CASE("all-targets return words from the base carry the automatic cap") {
    auto words = return_words_from(1, 6);
    REQUIRE_FALSE(words.empty());
    std::set<Word> seen;
    for (const auto& rw : words) {
        REQUIRE(rw.satisfies_predicate());
        REQUIRE(rw.satisfies_length_bound());
        REQUIRE(rw.return_time <= 6);
        REQUIRE(seen.insert(rw.word).second);
    }
}

TEST_CASE("non-returned stems: exact masses match brute force up to length 7") {
    ModelSpec spec;
    auto fit = return_tail(12, spec);
    REQUIRE(fit.mass.size() == 12);
    std::vector<Rational> expect = {Rational(1, 2), Rational(1, 8), Rational(7, 128),
                                    Rational(747, 32768)};
    for (size_t n = 1; n <= 7; ++n) {
        auto [brute, count] = brute_nonreturned_mass(int(n), spec);
        const auto& iv = fit.mass[n - 1];
        REQUIRE(iv.lower <= brute);
        REQUIRE(brute <= iv.upper);
        REQUIRE(to_double(iv.upper - iv.lower) < 1e-15);
        if (n <= expect.size()) REQUIRE(iv.lower == expect[n - 1]);
    }
}

TEST_CASE("return-time tail: lemma, bound, and geometric fit") {
    ModelSpec spec;
    REQUIRE(verify_return_lemma_states(12));
    auto fit = return_tail(12, spec);
    REQUIRE(fit.lemma_ok);
    REQUIRE(fit.bounds_ok);
    for (size_t n = 1; n <= 12; ++n)
        REQUIRE(fit.mass[n - 1].upper <= pow2_inv(unsigned(n)) * 2);
    REQUIRE(fit.beta > 0.0);
    REQUIRE(fit.beta < 1.0);
    REQUIRE(fit.r2 >= 0.98);
    REQUIRE(fit.C > 0.0);
}

TEST_CASE("mass decomposition of the base by first-return words") {
    ModelSpec spec;
    auto kac = kac_mass_check(7, 40, spec);
    REQUIRE(kac.pass);
    REQUIRE(kac.covered.lower <= kac.base.upper);
}

TEST_CASE("topological mixing horizon for capped states") {
    auto states = mp1_words(5, Mp1Mode::strict_suffix, 4);
    REQUIRE_FALSE(states.empty());
    auto table = mixing_check(states, 20);
    REQUIRE(table.size() == states.size() * states.size());
    for (const auto& e : table) {
        REQUIRE(e.N >= 1);
        REQUIRE(e.N <= 20);
    }
}

TEST_CASE("argument validation") {
    REQUIRE_THROWS_AS(first_return_words(0, 3), std::invalid_argument);
    REQUIRE_THROWS_AS(mp1_words(1), std::invalid_argument);
    REQUIRE_THROWS_AS(return_tail(2, ModelSpec{}), std::invalid_argument);
    REQUIRE_THROWS_AS(ReturnWord::from_word({1}), std::invalid_argument);
}
