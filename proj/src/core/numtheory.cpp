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

#include "qfactor/numtheory.hpp"

#include <array>
#include <random>
#include <string>

#include "qfactor/error.hpp"

namespace qfactor {

unsigned bit_length(u64 x) noexcept { return x == 0 ? 0u : 64u - static_cast<unsigned>(__builtin_clzll(x)); }

unsigned bit_length(u128 x) noexcept {
    const auto hi = static_cast<u64>(x >> 64);
    return hi != 0 ? 64u + bit_length(hi) : bit_length(static_cast<u64>(x));
}

u64 gcd(u64 a, u64 b) noexcept {
    while (b != 0) {
        const u64 r = a % b;
        a = b;
        b = r;
    }
    return a;
}

u64 lcm(u64 a, u64 b) {
    if (a == 0 || b == 0) return 0;
    const u128 l = static_cast<u128>(a / gcd(a, b)) * b;
    if (l > ~u64{0}) fail(ErrorCode::Overflow, "lcm exceeds 64 bits");
    return static_cast<u64>(l);
}

u64 mod_pow(u64 a, u128 e, u64 n) noexcept {
    if (n == 1) return 0;
    u64 base = a % n;
    u64 result = 1;
    while (e != 0) {
        if (e & 1) result = mul_mod(result, base, n);
        e >>= 1;
        if (e != 0) base = mul_mod(base, base, n);
    }
    return result;
}

std::vector<Convergent> convergents(u128 j, unsigned t) {
    if (t == 0 || t > 127) fail(ErrorCode::InvalidArgument, "convergents: t must lie in [1, 127]");
    const u128 denom = static_cast<u128>(1) << t;
    if (j >= denom) fail(ErrorCode::InvalidArgument, "convergents: j must be below 2^t");

    std::vector<Convergent> out;
    // h/k recurrences seeded with h_{-1}/k_{-1} = 1/0 and h_{-2}/k_{-2} = 0/1.
    u128 h_prev = 1, h_prev2 = 0;
    u128 k_prev = 0, k_prev2 = 1;
    u128 num = j, den = denom;
    while (den != 0) {
        const u128 term = num / den;
        const u128 rem = num % den;
        const u128 h = term * h_prev + h_prev2;
        const u128 k = term * k_prev + k_prev2;
        out.push_back({h, k});
        h_prev2 = h_prev;
        h_prev = h;
        k_prev2 = k_prev;
        k_prev = k;
        num = den;
        den = rem;
    }
    return out;
}

bool is_prime(u64 n) noexcept {
    if (n < 2) return false;
    static constexpr std::array<u64, 12> kWitnesses{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    for (u64 p : kWitnesses) {
        if (n % p == 0) return n == p;
    }
    u64 d = n - 1;
    unsigned s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (u64 a : kWitnesses) {
        u64 x = mod_pow(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (unsigned i = 1; i < s; ++i) {
            x = mul_mod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

std::vector<std::pair<u64, unsigned>> factorize_trial(u64 n) {
    std::vector<std::pair<u64, unsigned>> out;
    if (n < 2) return out;
    auto peel = [&](u64 d) {
        unsigned e = 0;
        while (n % d == 0) {
            n /= d;
            ++e;
        }
        if (e != 0) out.emplace_back(d, e);
    };
    peel(2);
    for (u64 d = 3; d <= n / d; d += 2) peel(d);
    if (n > 1) out.emplace_back(n, 1);
    return out;
}

Semiprime Semiprime::from_factors(u64 p, u64 q) {
    if (p <= 2 || q <= 2 || !is_prime(p) || !is_prime(q))
        fail(ErrorCode::InvalidArgument, "semiprime factors must be odd primes");
    if (p > q) std::swap(p, q);
    const u128 n = static_cast<u128>(p) * q;
    if (n >= kMaxModulus) fail(ErrorCode::InvalidArgument, "semiprime must be below 2^62");
    Semiprime s;
    s.n = static_cast<u64>(n);
    s.p = p;
    s.q = q;
    s.bit_length_n = bit_length(s.n);
    s.l_p = bit_length(p);
    s.l_q = bit_length(q);
    return s;
}

namespace {

u64 random_prime_with_bits(unsigned bits, std::mt19937_64& rng) {
    const u64 lo = u64{1} << (bits - 1);
    const u64 hi = (u64{1} << bits) - 1;
    // Odd candidates in [lo, hi]; rejection keeps the draw uniform over primes.
    std::uniform_int_distribution<u64> dist(0, (hi - lo) / 2);
    for (;;) {
        const u64 candidate = lo + 1 + 2 * dist(rng);
        if (is_prime(candidate)) return candidate;
    }
}

}  // namespace

Semiprime random_semiprime(unsigned l_p, unsigned l_q, u64 seed) {
    if (l_p < 3 || l_q < 3) fail(ErrorCode::InvalidArgument, "random_semiprime: bit lengths must be >= 3");
    if (l_p + l_q > 62) fail(ErrorCode::InvalidArgument, "random_semiprime: N must stay below 2^62");
    std::mt19937_64 rng(seed);
    const u64 p = random_prime_with_bits(l_p, rng);
    const u64 q = random_prime_with_bits(l_q, rng);
    Semiprime s;
    s.p = p;
    s.q = q;
    s.n = p * q;
    s.bit_length_n = bit_length(s.n);
    s.l_p = l_p;
    s.l_q = l_q;
    return s;
}

u64 carmichael_lambda(const Semiprime& s) {
    if (s.p == s.q) return s.p * (s.p - 1);
    return lcm(s.p - 1, s.q - 1);
}

u64 multiplicative_order(u64 a, const Semiprime& s) {
    a %= s.n;
    if (gcd(a, s.n) != 1)
        fail(ErrorCode::Precondition, "multiplicative_order: gcd(a, N) != 1 for a=" + std::to_string(a));
    const u64 lambda = carmichael_lambda(s);
    // Prime divisors of lambda come from p-1, q-1 (and p itself when N = p^2);
    // factoring those separately keeps trial division at sqrt(p) scale.
    std::vector<u64> primes;
    for (u64 part : {s.p - 1, s.q - 1}) {
        for (const auto& pe : factorize_trial(part)) primes.push_back(pe.first);
    }
    if (s.p == s.q) primes.push_back(s.p);
    u64 r = lambda;
    for (u64 prime : primes) {
        while (r % prime == 0 && mod_pow(a, r / prime, s.n) == 1) r /= prime;
    }
    return r;
}

u64 mix_seed(u64 seed, u64 stream) noexcept {
    u64 z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace qfactor
