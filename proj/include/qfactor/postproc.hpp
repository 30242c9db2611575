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

#include <optional>

#include "qfactor/numtheory.hpp"

namespace qfactor {

inline constexpr unsigned kDefaultMultiplierBound = 64;

//! Outcome of post-processing one measured j against the known truth.
//!
//! Category nesting holds by construction:
//!   shor_success  =>  shor_or_lucky()  =>  extended_success
//! lucky_success is exclusive of shor_success; Fig.-style "Shor+Lucky"
//! curves use shor_or_lucky().
struct OutcomeClassification {
    bool shor_success = false;
    bool lucky_success = false;
    bool extended_success = false;
    bool peak = false;
    std::optional<u64> recovered_factor;
    u64 r_basic = 1;

    bool shor_or_lucky() const noexcept { return shor_success || lucky_success; }
};

//! Largest convergent denominator of j / 2^t strictly below N (1 for j = 0).
u64 basic_denominator(u128 j, unsigned t, u64 n);

//! gcd(a^floor(r/2) +- 1, N); the smaller nontrivial divisor when both qualify.
std::optional<u64> extract_factor(u64 a, u128 r, u64 n);

//! Convergent x multiplier sweep: for each convergent denominator r' < N
//! (ascending) and c = 1..c_max, tries extract_factor(a, c r') and then
//! gcd(a^(c r') - 1, N). Returns the first nontrivial divisor.
std::optional<u64> extended_postprocess(u128 j, unsigned t, u64 a, u64 n, unsigned c_max = kDefaultMultiplierBound);

//! |j - k 2^t / r| <= 1/2 for some integer k.
bool is_peak(u128 j, unsigned t, u64 r);

//! round(k 2^t / r) mod 2^t.
u128 synthesize_outcome(u64 k, u64 r, unsigned t);

//! Throws Precondition when a^true_order != 1 (mod N).
OutcomeClassification classify(u128 j, unsigned t, u64 a, const Semiprime& truth, u64 true_order,
                               unsigned c_max = kDefaultMultiplierBound);

}  // namespace qfactor
