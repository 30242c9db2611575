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

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace qfactor {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

//! Largest modulus supported by the 64-bit arithmetic (N < 2^62).
inline constexpr u64 kMaxModulus = u64{1} << 62;

//! Odd composite N = p * q with both factors odd primes. The harness knows
//! the factors; they are ground truth for scoring, never an input to the
//! quantum or annealing pipelines.
struct Semiprime {
    u64 n = 0;
    u64 p = 0;
    u64 q = 0;
    unsigned bit_length_n = 0;
    unsigned l_p = 0;
    unsigned l_q = 0;

    //! Validates primality of both factors and the range of the product.
    static Semiprime from_factors(u64 p, u64 q);

    friend bool operator==(const Semiprime&, const Semiprime&) = default;
};

//! k / r, one step of a continued fraction expansion.
struct Convergent {
    u128 numerator = 0;
    u128 denominator = 1;

    friend bool operator==(const Convergent&, const Convergent&) = default;
};

unsigned bit_length(u64 x) noexcept;
unsigned bit_length(u128 x) noexcept;

u64 gcd(u64 a, u64 b) noexcept;
u64 lcm(u64 a, u64 b);

//! a * b mod n using a 128-bit intermediate.
inline u64 mul_mod(u64 a, u64 b, u64 n) noexcept {
    return static_cast<u64>((static_cast<u128>(a) * b) % n);
}

//! Square-and-multiply. n >= 1; the exponent may exceed 64 bits so that
//! multiplier searches on record-size instances stay exact.
u64 mod_pow(u64 a, u128 e, u64 n) noexcept;

//! Full convergent sequence of j / 2^t (t <= 127, j < 2^t). The last element
//! equals j / 2^t in lowest terms.
std::vector<Convergent> convergents(u128 j, unsigned t);

//! Deterministic Miller-Rabin for the full 64-bit range. n < 2 is not prime.
bool is_prime(u64 n) noexcept;

//! Prime factorisation by trial division, ascending primes with exponents.
std::vector<std::pair<u64, unsigned>> factorize_trial(u64 n);

//! p and q drawn uniformly from the primes with exactly l_p and l_q bits
//! (p == q allowed). Deterministic in seed.
Semiprime random_semiprime(unsigned l_p, unsigned l_q, u64 seed);

//! Carmichael lambda(N) from the known factors.
u64 carmichael_lambda(const Semiprime& s);

//! Smallest r >= 1 with a^r = 1 (mod N), obtained by peeling prime factors
//! off lambda(N). Throws Precondition when gcd(a, N) != 1.
u64 multiplicative_order(u64 a, const Semiprime& s);

//! SplitMix64 step; used to derive independent stream seeds from a root
//! seed and indices.
u64 mix_seed(u64 seed, u64 stream) noexcept;

}  // namespace qfactor
