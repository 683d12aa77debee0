#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include <gapforge/streams.hpp>

#include "oracles.hpp"

using namespace gapforge;

namespace {

u64 to_u64(const mpz_class& v) { return mpz_get_ui(v.get_mpz_t()); }

std::vector<u32> exps_by_trial(u64 v, const std::vector<u64>& primes) {
    std::vector<u32> out;
    for (u64 q : primes) {
        u32 e = 0;
        while (v % q == 0) { v /= q; ++e; }
        out.push_back(e);
    }
    REQUIRE(v == 1);
    return out;
}

} // namespace

TEST_CASE("smooth sequence matches the divisor-filter oracle") {
    const std::vector<std::vector<u64>> sets = {{2}, {2, 3}, {2, 3, 5}, {3, 7}, {7, 11, 13}};
    for (const auto& qs : sets) {
        const prime_set T = prime_set::make(qs);
        const auto got = enumerate_smooth(T, 10000);
        const auto want = oracle::smooth_upto(qs, 10000);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(to_u64(got[i].value) == want[i]);
            CHECK(got[i].exponents == exps_by_trial(want[i], qs));
        }
    }
}

TEST_CASE("smooth sequence starts at the least prime and stays sorted") {
    const prime_set T = prime_set::make({5, 3});
    const auto xs = enumerate_smooth(T, 200);
    REQUIRE_FALSE(xs.empty());
    CHECK(xs.front().value == 3); // the virtual seed 1 is never emitted
    CHECK(std::is_sorted(xs.begin(), xs.end(),
                         [](const sunit& a, const sunit& b) { return a.value < b.value; }));
    CHECK(xs.back().value == 135);
}

TEST_CASE("smooth frontier stays far below the output size") {
    const prime_set T = prime_set::make({2, 3, 5});
    smooth_stream<u64> s(T, 1'000'000);
    std::size_t count = 0;
    while (s.next()) ++count;
    CHECK(count == oracle::smooth_upto({2, 3, 5}, 1'000'000).size());
    CHECK(s.max_frontier_size() >= T.size());
    // The window holds the values in (c/5, c]: one log-order below the count.
    CHECK(s.max_frontier_size() < 200);
    CHECK(count > 500);
}

TEST_CASE("power set matches the double-loop oracle") {
    const std::vector<std::vector<u64>> sets = {{2}, {2, 3}, {3, 7}, {5}};
    for (const auto& qs : sets) {
        const prime_set T = prime_set::make(qs);
        const auto got = enumerate_powers(T, 10000);
        const auto want = oracle::powers_upto(qs, 10000);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            const u64 v = want[i];
            CHECK(to_u64(got[i].value) == v);
            const auto [base, exp] = oracle::canonical_witness(v);
            CHECK(to_u64(got[i].base) == base);
            CHECK(got[i].exponent == exp);
            CHECK(got[i].all_exponents == oracle::valid_exponents(v));
        }
    }
}

TEST_CASE("power set over {5} below 100") {
    // 10^2 and 5^2 touch the prime set; 2^5 = 32 does not.
    const auto got = enumerate_powers(prime_set::make({5}), 100);
    std::vector<u64> values;
    for (const auto& p : got) values.push_back(to_u64(p.value));
    CHECK(values == std::vector<u64>{4, 8, 9, 16, 27, 32, 36, 49, 64, 81});
}

TEST_CASE("every power value appears exactly once with a maximal witness") {
    const auto got = enumerate_powers(prime_set::make({7}), 70000);
    std::set<u64> seen;
    for (const auto& p : got) {
        CHECK(seen.insert(to_u64(p.value)).second);
        // base itself is no power: the witness exponent is maximal
        CHECK_FALSE(is_perfect_power_u64(to_u64(p.base)));
        mpz_class check;
        mpz_pow_ui(check.get_mpz_t(), p.base.get_mpz_t(), p.exponent);
        CHECK(check == p.value);
    }
    CHECK(seen.count(65536)); // 2^16
    CHECK(seen.count(59049)); // 3^10
}

TEST_CASE("fixed-exponent mode admits power bases and canonicalizes witnesses") {
    const prime_set T = prime_set::make({2, 3});
    const auto got = enumerate_powers_fixed(T, 2, 10000);
    const auto want = oracle::powers_fixed_upto({2, 3}, 2, 10000);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(to_u64(got[i].value) == want[i]);

    // 625 = 25^2 enters through base 25 but reports the canonical 5^4.
    const auto it = std::find_if(got.begin(), got.end(),
                                 [](const power_value& p) { return p.value == 625; });
    REQUIRE(it != got.end());
    CHECK(it->base == 5);
    CHECK(it->exponent == 4);
    CHECK(it->all_exponents == std::vector<u32>{2, 4});
}

TEST_CASE("u64 and mpz engines agree") {
    const prime_set T = prime_set::make({2, 3, 5});

    smooth_stream<u64> a(T, 20000);
    smooth_stream<mpz_class> b(T, 20000);
    for (;;) {
        auto va = a.next();
        auto vb = b.next();
        REQUIRE(va.has_value() == vb.has_value());
        if (!va) break;
        CHECK(va->value == vb->value);
        CHECK(va->exponents == vb->exponents);
    }

    power_stream<u64> c(T, 20000);
    power_stream<mpz_class> d(T, 20000);
    for (;;) {
        auto vc = c.next();
        auto vd = d.next();
        REQUIRE(vc.has_value() == vd.has_value());
        if (!vc) break;
        CHECK(vc->value == vd->value);
        CHECK(vc->base == vd->base);
        CHECK(vc->exponent == vd->exponent);
    }
}

TEST_CASE("range drain equals the filtered full enumeration") {
    const prime_set T = prime_set::make({2, 3});
    const auto full = enumerate_powers(T, 5000);

    std::mt19937_64 rng(20260821);
    for (int trial = 0; trial < 12; ++trial) {
        const u64 lo = rng() % 5000;
        const u64 hi = lo + rng() % 2500;
        std::vector<u64> got;
        for_each_power_between(T, lo, std::min<u64>(hi, 5000),
                               [&](const power_value& p) { got.push_back(to_u64(p.value)); });
        std::vector<u64> want;
        for (const auto& p : full) {
            const u64 v = to_u64(p.value);
            if (v >= lo && v <= hi) want.push_back(v);
        }
        CHECK(got == want);
    }

    // Contiguous slices partition the full range.
    std::vector<u64> stitched;
    for (u64 lo = 4; lo <= 5000; lo += 617)
        for_each_power_between(T, lo, std::min<u64>(lo + 616, 5000),
                               [&](const power_value& p) { stitched.push_back(to_u64(p.value)); });
    std::vector<u64> whole;
    for (const auto& p : full) whole.push_back(to_u64(p.value));
    CHECK(stitched == whole);
}

TEST_CASE("prime set construction rejects bad input") {
    CHECK_THROWS_AS(prime_set::make({}), std::invalid_argument);
    CHECK_THROWS_AS(prime_set::make({2, 2}), std::invalid_argument);
    CHECK_THROWS_AS(prime_set::make({2, 9}), std::invalid_argument);
    CHECK_THROWS_AS(prime_set::make({1}), std::invalid_argument);
    CHECK(prime_set::make({3, 2}).primes == std::vector<u64>{2, 3}); // sorted on entry
}

TEST_CASE("enumeration guards") {
    const prime_set T = prime_set::make({2});
    CHECK_THROWS_AS(enumerate_smooth(T, 1), std::invalid_argument);
    CHECK_THROWS_AS(enumerate_powers(T, 3), std::invalid_argument);
    CHECK_THROWS_AS(enumerate_powers_fixed(T, 1, 100), std::invalid_argument);
    CHECK(enumerate_smooth(T, 2).size() == 1);
    CHECK(enumerate_powers(T, 8).empty()); // 4 and 8 touch the prime set
    const auto p = enumerate_powers(prime_set::make({3}), 4);
    REQUIRE(p.size() == 1);
    CHECK(p[0].value == 4);
}

TEST_CASE("radical bookkeeping") {
    const prime_set small = prime_set::make({2, 3, 5});
    CHECK(small.radical == 30);
    CHECK(small.radical_u64 == 30);

    // Nine 10-digit primes overflow 64 bits; the mpz radical stays exact.
    std::vector<u64> big;
    for (u64 q = 9999999900ULL; big.size() < 9; ++q)
        if (is_prime_u64(q)) big.push_back(q);
    const prime_set wide = prime_set::make(big);
    CHECK(wide.radical_u64 == 0);
    mpz_class prod = 1;
    for (u64 q : big) prod *= mpz_class(q);
    CHECK(wide.radical == prod);
}
