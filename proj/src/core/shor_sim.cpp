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

#include "qfactor/shor_sim.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qfactor/error.hpp"

namespace qfactor {

u64 required_memory_bytes(unsigned work_qubits) {
    if (work_qubits + 1 >= 60) fail(ErrorCode::Capacity, "required_memory_bytes: register too large");
    return u64{16} << (work_qubits + 1);
}

StateVector::StateVector(unsigned work_qubits, unsigned max_qubits) : work_qubits_(work_qubits) {
    if (work_qubits + 1 > max_qubits)
        fail(ErrorCode::Capacity, "state of " + std::to_string(work_qubits + 1) + " qubits exceeds the cap of " +
                                      std::to_string(max_qubits));
    const std::size_t work_states = std::size_t{1} << work_qubits;
    amp_.assign(2 * work_states, amplitude{0.0, 0.0});
    in_support_.assign(work_states, 0);
    reset_to_one();
}

void StateVector::track(u64 y) {
    if (!in_support_[y]) {
        in_support_[y] = 1;
        support_.push_back(y);
    }
}

void StateVector::reset_to_one() {
    for (u64 y : support_) {
        amp_[2 * y] = 0.0;
        amp_[2 * y + 1] = 0.0;
        in_support_[y] = 0;
    }
    support_.clear();
    if (work_qubits_ == 0) {
        // Degenerate register: only |0> exists.
        amp_[0] = 1.0;
        track(0);
        return;
    }
    amp_[2] = 1.0;
    track(1);
}

void StateVector::hadamard_control() {
    const double s = std::numbers::sqrt2 / 2.0;
    for (u64 y : support_) {
        const amplitude a0 = amp_[2 * y];
        const amplitude a1 = amp_[2 * y + 1];
        amp_[2 * y] = (a0 + a1) * s;
        amp_[2 * y + 1] = (a0 - a1) * s;
    }
}

void StateVector::controlled_modmul(u64 multiplier, u64 n) {
    if (n < 2 || n > (u64{1} << work_qubits_)) fail(ErrorCode::InvalidArgument, "controlled_modmul: bad modulus");
    multiplier %= n;
    if (gcd(multiplier, n) != 1) fail(ErrorCode::Precondition, "controlled_modmul: multiplier not invertible");
    const std::size_t old_size = support_.size();
    scratch_.resize(old_size);
    for (std::size_t i = 0; i < old_size; ++i) {
        const u64 y = support_[i];
        scratch_[i] = amp_[2 * y + 1];
        amp_[2 * y + 1] = 0.0;
    }
    for (std::size_t i = 0; i < old_size; ++i) {
        const u64 y = support_[i];
        const u64 target = mul_mod(multiplier, y, n);
        amp_[2 * target + 1] = scratch_[i];
        track(target);
    }
}

void StateVector::phase_control(double phase) {
    const amplitude factor = std::polar(1.0, phase);
    for (u64 y : support_) amp_[2 * y + 1] *= factor;
}

double StateVector::control_one_probability() const noexcept {
    double p1 = 0.0;
    for (u64 y : support_) p1 += std::norm(amp_[2 * y + 1]);
    return p1;
}

int StateVector::measure_control(double uniform) {
    double p0 = 0.0, p1 = 0.0;
    for (u64 y : support_) {
        p0 += std::norm(amp_[2 * y]);
        p1 += std::norm(amp_[2 * y + 1]);
    }
    const int outcome = uniform * (p0 + p1) < p1 ? 1 : 0;
    const double keep = outcome ? p1 : p0;
    const double scale = 1.0 / std::sqrt(keep);
    for (u64 y : support_) {
        amp_[2 * y + outcome] *= scale;
        amp_[2 * y + (1 - outcome)] = 0.0;
    }
    return outcome;
}

void StateVector::reset_control(int measured) {
    if (measured == 0) return;
    for (u64 y : support_) {
        amp_[2 * y] = amp_[2 * y + 1];
        amp_[2 * y + 1] = 0.0;
    }
}

int StateVector::iterate(u64 multiplier, u64 n, double phase, double uniform) {
    if (n < 2 || n > (u64{1} << work_qubits_)) fail(ErrorCode::InvalidArgument, "iterate: bad modulus");
    multiplier %= n;
    if (gcd(multiplier, n) != 1) fail(ErrorCode::Precondition, "iterate: multiplier not invertible");
    const bool narrow = n <= (u64{1} << 32);
    const std::size_t old_size = support_.size();
    scratch_.resize(old_size);
    targets_.resize(old_size);
    for (std::size_t i = 0; i < old_size; ++i) {
        const u64 x = support_[i];
        targets_[i] = narrow ? multiplier * x % n : mul_mod(multiplier, x, n);
    }
    // <a| U |a> and the norm. Support order is scattered over the dense array,
    // so loads are prefetched a few entries ahead.
    constexpr std::size_t ahead = 16;
    amplitude overlap = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < old_size; ++i) {
        if (i + ahead < old_size) {
            __builtin_prefetch(&amp_[2 * support_[i + ahead]]);
            __builtin_prefetch(&amp_[2 * targets_[i + ahead]]);
        }
        const amplitude a = amp_[2 * support_[i]];
        scratch_[i] = a;
        overlap += std::conj(amp_[2 * targets_[i]]) * a;
        total += std::norm(a);
    }
    const amplitude rot = std::polar(1.0, phase);
    const double interference = (rot * overlap).real();
    const double p1 = std::max(0.0, (total - interference) / 2.0);
    const double p0 = std::max(0.0, (total + interference) / 2.0);
    const int outcome = uniform * (p0 + p1) < p1 ? 1 : 0;
    const double keep = outcome ? p1 : p0;
    if (keep <= 0.0) fail(ErrorCode::Precondition, "iterate: zero-probability outcome");
    const double scale = 0.5 / std::sqrt(keep);
    const amplitude moved = (outcome ? -rot : rot) * scale;
    for (std::size_t i = 0; i < old_size; ++i) {
        if (i + ahead < old_size) __builtin_prefetch(&amp_[2 * support_[i + ahead]], 1);
        amp_[2 * support_[i]] *= scale;
    }
    for (std::size_t i = 0; i < old_size; ++i) {
        if (i + ahead < old_size) {
            __builtin_prefetch(&amp_[2 * targets_[i + ahead]], 1);
            __builtin_prefetch(&in_support_[targets_[i + ahead]]);
        }
        const u64 y = targets_[i];
        amp_[2 * y] += moved * scratch_[i];
        track(y);
    }
    return outcome;
}

double StateVector::norm_squared() const noexcept {
    double total = 0.0;
    for (const auto& a : amp_) total += std::norm(a);
    return total;
}

double noisy_rotation_phase(unsigned k, double delta, std::mt19937_64& rng) {
    if (k == 0) fail(ErrorCode::InvalidArgument, "noisy_rotation_phase: k must be >= 1");
    std::normal_distribution<double> normal(0.0, 1.0);
    const double r = normal(rng);
    return 2.0 * std::numbers::pi * (1.0 + delta * r) / std::ldexp(1.0, static_cast<int>(k));
}

MeasurementRecord run_shot(const CircuitParams& params, const SimulatorOptions& options) {
    const Semiprime& s = params.semiprime;
    const u64 n = s.n;
    if (params.a < 2 || params.a >= n) fail(ErrorCode::InvalidArgument, "run_shot: a must satisfy 2 <= a < N");
    if (gcd(params.a, n) != 1) fail(ErrorCode::Precondition, "run_shot: gcd(a, N) != 1");
    const unsigned L = bit_length(n);
    const unsigned t = params.t == 0 ? 2 * L : params.t;
    if (t > 63) fail(ErrorCode::InvalidArgument, "run_shot: t must be <= 63");

    StateVector state(L, options.max_qubits);

    // multipliers[k] = a^(2^k) mod N
    std::vector<u64> multipliers(t);
    multipliers[0] = params.a % n;
    for (unsigned k = 1; k < t; ++k) multipliers[k] = mul_mod(multipliers[k - 1], multipliers[k - 1], n);

    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    MeasurementRecord record;
    record.shot_seed = params.seed;
    record.bits.reserve(t);
    for (unsigned k = 0; k < t; ++k) {
        // Feedback: inverse rotation R_{k+1-m} for every earlier bit m that came out 1.
        // Each applied gate gets its own noise draw; the composed phase is applied once.
        double feedback = 0.0;
        for (unsigned m = 0; m < k; ++m) {
            if (record.bits[m] == 0) continue;
            feedback -= noisy_rotation_phase(k + 1 - m, params.delta, rng);
        }
        const int bit = state.iterate(multipliers[t - 1 - k], n, feedback, uniform(rng));
        record.bits.push_back(static_cast<std::uint8_t>(bit));
        if (bit) record.j |= u64{1} << k;
    }
    return record;
}

std::vector<double> exact_distribution(const Semiprime& s, u64 a, unsigned t) {
    if (t == 0 || t > 24) fail(ErrorCode::Capacity, "exact_distribution: t must lie in [1, 24]");
    const u64 r = multiplicative_order(a, s);
    if (r > (u64{1} << 16)) fail(ErrorCode::Capacity, "exact_distribution: order exceeds 2^16");
    const u64 size = u64{1} << t;
    const u64 mask = size - 1;
    // Residue classes x0 < size % r hold one more term than the rest.
    const u64 short_len = size / r;
    const u64 long_count = size % r;
    const u64 short_count = r - long_count;
    auto geometric_norm = [](u64 terms, double half_angle, double sin_half) {
        if (terms == 0) return 0.0;
        const double num = std::sin(static_cast<double>(terms) * half_angle);
        return num * num / (sin_half * sin_half);
    };
    std::vector<double> out(size);
    const double inv = 1.0 / (static_cast<double>(size) * static_cast<double>(size));
    for (u64 j = 0; j < size; ++j) {
        const u64 phase_num = (j * r) & mask;  // j*r mod 2^t
        double total;
        if (phase_num == 0) {
            const double sl = static_cast<double>(short_len);
            total = static_cast<double>(short_count) * sl * sl +
                    static_cast<double>(long_count) * (sl + 1) * (sl + 1);
        } else {
            const double half = std::numbers::pi * static_cast<double>(phase_num) / static_cast<double>(size);
            const double sin_half = std::sin(half);
            total = static_cast<double>(short_count) * geometric_norm(short_len, half, sin_half) +
                    static_cast<double>(long_count) * geometric_norm(short_len + 1, half, sin_half);
        }
        out[j] = total * inv;
    }
    return out;
}

}  // namespace qfactor
