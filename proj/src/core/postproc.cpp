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

#include "qfactor/postproc.hpp"

#include <vector>

#include "qfactor/error.hpp"

namespace qfactor {

namespace {

std::vector<u64> denominators_below(u128 j, unsigned t, u64 n) {
    std::vector<u64> out;
    for (const auto& c : convergents(j, t)) {
        if (c.denominator >= n) break;
        const auto d = static_cast<u64>(c.denominator);
        if (out.empty() || out.back() != d) out.push_back(d);
    }
    return out;
}

bool nontrivial(u64 g, u64 n) { return g > 1 && g < n; }

}  // namespace

u64 basic_denominator(u128 j, unsigned t, u64 n) {
    const auto dens = denominators_below(j, t, n);
    return dens.empty() ? 1 : dens.back();
}

std::optional<u64> extract_factor(u64 a, u128 r, u64 n) {
    const u64 x = mod_pow(a, r / 2, n);
    const u64 g_plus = gcd((x + 1) % n, n);
    const u64 g_minus = gcd((x + n - 1) % n, n);
    std::optional<u64> best;
    for (u64 g : {g_plus, g_minus}) {
        if (nontrivial(g, n)) {
            const u64 small = std::min(g, n / g);
            if (!best || small < *best) best = small;
        }
    }
    return best;
}

std::optional<u64> extended_postprocess(u128 j, unsigned t, u64 a, u64 n, unsigned c_max) {
    if (c_max == 0) fail(ErrorCode::InvalidArgument, "extended_postprocess: c_max must be >= 1");
    for (u64 r : denominators_below(j, t, n)) {
        for (unsigned c = 1; c <= c_max; ++c) {
            const u128 candidate = static_cast<u128>(r) * c;
            if (auto f = extract_factor(a, candidate, n)) return f;
            const u64 g = gcd((mod_pow(a, candidate, n) + n - 1) % n, n);
            if (nontrivial(g, n)) return g;
        }
    }
    return std::nullopt;
}

bool is_peak(u128 j, unsigned t, u64 r) {
    if (r == 0) fail(ErrorCode::InvalidArgument, "is_peak: r must be positive");
    // |j r - k 2^t| <= r / 2, checked for the two integers k around j r / 2^t.
    const u128 scaled = j * r;
    const u128 k_low = scaled >> t;
    for (u128 k = k_low; k <= k_low + 1; ++k) {
        const u128 target = k << t;
        const u128 diff = scaled > target ? scaled - target : target - scaled;
        if (2 * diff <= r) return true;
    }
    return false;
}

u128 synthesize_outcome(u64 k, u64 r, unsigned t) {
    if (r == 0 || k >= r) fail(ErrorCode::InvalidArgument, "synthesize_outcome: need 0 <= k < r");
    if (t == 0 || t + bit_length(k) + 1 > 127) fail(ErrorCode::InvalidArgument, "synthesize_outcome: t too large");
    const u128 twice = (static_cast<u128>(k) << (t + 1)) + r;
    const u128 rounded = twice / (2 * static_cast<u128>(r));
    return rounded & ((static_cast<u128>(1) << t) - 1);
}

OutcomeClassification classify(u128 j, unsigned t, u64 a, const Semiprime& truth, u64 true_order, unsigned c_max) {
    const u64 n = truth.n;
    if (true_order == 0 || mod_pow(a, true_order, n) != 1)
        fail(ErrorCode::Precondition, "classify: a^r* != 1 (mod N)");

    OutcomeClassification out;
    out.r_basic = basic_denominator(j, t, n);
    out.peak = is_peak(j, t, true_order);

    const bool theory_holds = out.r_basic == true_order && true_order % 2 == 0 &&
                              mod_pow(a, true_order / 2, n) != n - 1;
    if (theory_holds) {
        if (auto f = extract_factor(a, out.r_basic, n)) {
            out.shor_success = true;
            out.recovered_factor = f;
        }
    }
    if (!out.shor_success) {
        for (u64 r : denominators_below(j, t, n)) {
            if (auto f = extract_factor(a, r, n)) {
                out.lucky_success = true;
                out.recovered_factor = f;
                break;
            }
        }
    }
    if (out.shor_or_lucky()) {
        out.extended_success = true;
    } else if (auto f = extended_postprocess(j, t, a, n, c_max)) {
        out.extended_success = true;
        out.recovered_factor = f;
    }
    return out;
}

}  // namespace qfactor
