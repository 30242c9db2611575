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

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "qfactor/numtheory.hpp"

namespace qfactor {

inline constexpr unsigned kDefaultQubitCap = 26;

struct CircuitParams {
    Semiprime semiprime;
    u64 a = 2;
    unsigned t = 0;  //!< 0 selects the default 2 * L
    double delta = 0.0;
    u64 seed = 0;
};

//! Measured control bits in measurement order. bits[k] is the k-th measured
//! bit and carries weight 2^k in j (the first measurement yields the least
//! significant bit of the phase estimate).
struct MeasurementRecord {
    std::vector<std::uint8_t> bits;
    u64 j = 0;
    u64 shot_seed = 0;
};

struct SimulatorOptions {
    unsigned max_qubits = kDefaultQubitCap;
};

//! 16 * 2^(L+1): one double-precision complex amplitude per basis state of
//! the L-qubit work register plus the control qubit.
u64 required_memory_bytes(unsigned work_qubits);

//! Dense amplitudes of (work register of L qubits) x (one control qubit).
//! Basis index = 2 * y + c, y the work value, c the control bit.
//!
//! All gates preserve the invariant that the work register is supported on
//! values reachable from |1> by the multipliers applied so far; the support
//! list tracks those values so gate kernels only touch populated entries.
class StateVector {
  public:
    using amplitude = std::complex<double>;

    explicit StateVector(unsigned work_qubits, unsigned max_qubits = kDefaultQubitCap);

    unsigned work_qubits() const noexcept { return work_qubits_; }
    std::size_t size() const noexcept { return amp_.size(); }
    std::span<const amplitude> amplitudes() const noexcept { return amp_; }
    std::span<const u64> support() const noexcept { return support_; }

    //! |y = 1>_work |0>_control.
    void reset_to_one();

    void hadamard_control();
    //! |y>|1> -> |multiplier * y mod n>|1>; |y>|0> untouched. gcd(multiplier, n) = 1.
    void controlled_modmul(u64 multiplier, u64 n);
    //! diag(1, e^{i phase}) on the control.
    void phase_control(double phase);
    //! Projective measurement of the control. `uniform` in [0, 1) picks the
    //! outcome with Born probabilities; the state is collapsed and renormalised.
    int measure_control(double uniform);
    //! Returns the control to |0> after a measurement that yielded `measured`.
    void reset_control(int measured);

    //! One round of the iterative circuit in a single fused sweep: Hadamard,
    //! controlled multiplication, phase(phase), Hadamard, measurement with
    //! `uniform`, reset. Same amplitudes as the gate-by-gate sequence; requires
    //! the control in |0>. Returns the measured bit.
    int iterate(u64 multiplier, u64 n, double phase, double uniform);

    double norm_squared() const noexcept;
    //! Probability of control = 1 over the current state.
    double control_one_probability() const noexcept;

  private:
    void track(u64 y);

    unsigned work_qubits_;
    std::vector<amplitude> amp_;
    std::vector<u64> support_;
    std::vector<std::uint8_t> in_support_;
    std::vector<amplitude> scratch_;
    std::vector<u64> targets_;
};

//! Phase 2 pi (1 + delta * r) / 2^k of the faulty rotation gate, r a fresh
//! standard-normal draw from rng.
double noisy_rotation_phase(unsigned k, double delta, std::mt19937_64& rng);

//! One run of the iterative (single control qubit) order-finding circuit.
MeasurementRecord run_shot(const CircuitParams& params, const SimulatorOptions& options = {});

//! Noiseless outcome law P(j), j in [0, 2^t). Requires t <= 24 and the order
//! of a to be at most 2^16.
std::vector<double> exact_distribution(const Semiprime& s, u64 a, unsigned t);

}  // namespace qfactor
