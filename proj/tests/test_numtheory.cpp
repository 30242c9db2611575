// Copyright 2026 The qfactor Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#include <doctest.h>

#include <random>
#include <set>

#include "qfactor/error.hpp"
#include "qfactor/numtheory.hpp"

using namespace qfactor;

namespace {

u64 slow_pow(u64 a, u64 e, u64 n) {
    u64 r = 1 % n;
    for (u64 i = 0; i < e; ++i) r = mul_mod(r, a % n, n);
    return r;
}

bool trial_prime(u64 n) {
    if (n < 2) return false;
    for (u64 d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

}  // namespace

TEST_CASE("gcd") {
    CHECK(gcd(15, 7) == 1);
    CHECK(gcd(712321ull * 3, 712321ull * 5) == 712321);
    CHECK(gcd(0, 9) == 9);
    CHECK(gcd(9, 0) == 9);
    CHECK(lcm(4, 6) == 12);
}

TEST_CASE("mod_pow matches repeated multiplication") {
    CHECK(mod_pow(7, 2, 15) == 4);
    CHECK(mod_pow(7, 4, 15) == 1);
    CHECK(mod_pow(5, 0, 1) == 0);
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const u64 n = 1 + rng() % 100000;
        const u64 a = rng();
        const u64 e = rng() % 10001;
        CHECK(mod_pow(a, e, n) == slow_pow(a, e, n));
    }
}

TEST_CASE("mod_pow at the record modulus agrees with the factor-wise oracle") {
    const u64 p = 712321, q = 771781, n = p * q;
    REQUIRE(n == 549755813701ull);
    const u64 e = 549755813700ull;
    const u64 v = mod_pow(2, e, n);
    // Reduce the exponent modulo p-1 and q-1 separately and recombine.
    CHECK(v % p == slow_pow(2, e % (p - 1), p));
    CHECK(v % q == slow_pow(2, e % (q - 1), q));
    // Near-2^62 modulus exercises the 128-bit intermediates.
    const u64 big = (u64{1} << 62) - 57;
    CHECK(mod_pow(big - 1, 2, big) == 1);
}

TEST_CASE("convergents") {
    auto c = convergents(192, 8);
    REQUIRE(c.size() == 3);
    CHECK(c[0] == Convergent{0, 1});
    CHECK(c[1] == Convergent{1, 1});
    CHECK(c[2] == Convergent{3, 4});
    CHECK(convergents(0, 8) == std::vector<Convergent>{{0, 1}});
    CHECK(convergents(128, 8).back() == Convergent{1, 2});
    CHECK_THROWS_AS(convergents(256, 8), Error);

    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        const unsigned t = 1 + rng() % 100;
        const u128 j = ((static_cast<u128>(rng()) << 64) | rng()) & ((u128{1} << t) - 1);
        const auto seq = convergents(j, t);
        for (std::size_t i = 0; i < seq.size(); ++i) {
            const u128 a = seq[i].numerator, b = seq[i].denominator;
            u128 x = a, y = b;
            while (y) { const u128 r = x % y; x = y; y = r; }
            CHECK(x == 1);
            // Non-decreasing, strictly increasing after the second term.
            if (i >= 2) CHECK(seq[i].denominator > seq[i - 1].denominator);
            if (i == 1) CHECK(seq[i].denominator >= seq[0].denominator);
        }
        // Last convergent reproduces j / 2^t exactly.
        const auto& last = seq.back();
        CHECK(last.numerator * (u128{1} << t) == j * last.denominator);
    }
}

TEST_CASE("is_prime") {
    CHECK(is_prime(1021));
    CHECK(!is_prime(1));
    CHECK(!is_prime(0));
    CHECK(is_prime(771781));
    CHECK(is_prime(712321));
    CHECK(!is_prime(549755813701ull));
    for (u64 n = 0; n < 20000; ++n) CHECK(is_prime(n) == trial_prime(n));
    CHECK(!is_prime(3215031751ull));  // strong pseudoprime to bases 2, 3, 5, 7
    CHECK(is_prime((u64{1} << 61) - 1));
}

TEST_CASE("random_semiprime") {
    std::set<u64> seen;
    for (u64 seed = 0; seed < 200; ++seed) {
        const auto s = random_semiprime(3, 3, seed);
        CHECK((s.n == 25 || s.n == 35 || s.n == 49));
        seen.insert(s.n);
    }
    CHECK(seen.size() == 3);
    for (u64 seed = 0; seed < 200; ++seed) {
        const auto s = random_semiprime(10, 14, seed);
        CHECK(s.p * s.q == s.n);
        CHECK(bit_length(s.p) == 10);
        CHECK(bit_length(s.q) == 14);
        CHECK(s.l_p == 10);
        CHECK(s.l_q == 14);
        CHECK(s.p % 2 == 1);
        CHECK(is_prime(s.p));
        CHECK(is_prime(s.q));
        CHECK(s.bit_length_n == bit_length(s.n));
    }
    CHECK(random_semiprime(20, 20, 99) == random_semiprime(20, 20, 99));
    CHECK_THROWS_AS(random_semiprime(2, 5, 0), Error);
    const auto square = Semiprime::from_factors(1021, 1021);
    CHECK(square.n == 1042441);
}

TEST_CASE("multiplicative_order") {
    CHECK(multiplicative_order(7, Semiprime::from_factors(3, 5)) == 4);
    CHECK(multiplicative_order(1, Semiprime::from_factors(3, 5)) == 1);
    CHECK_THROWS_AS(multiplicative_order(5, Semiprime::from_factors(3, 5)), Error);

    for (u64 n : {15ull, 21ull, 33ull, 35ull, 49ull, 77ull}) {
        const auto f = factorize_trial(n);
        const auto s = f.size() == 1 ? Semiprime::from_factors(f[0].first, f[0].first)
                                     : Semiprime::from_factors(f[0].first, f[1].first);
        for (u64 a = 1; a < n; ++a) {
            if (gcd(a, n) != 1) continue;
            u64 r = 1, v = a % n;
            while (v != 1) { v = mul_mod(v, a, n); ++r; }
            CHECK(multiplicative_order(a, s) == r);
        }
    }

    const auto record = Semiprime::from_factors(712321, 771781);
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const u64 a = 2 + rng() % (record.n - 3);
        if (gcd(a, record.n) != 1) continue;
        const u64 r = multiplicative_order(a, record);
        CHECK(mod_pow(a, r, record.n) == 1);
        for (const auto& [d, e] : factorize_trial(r)) CHECK(mod_pow(a, r / d, record.n) != 1);
    }
}
