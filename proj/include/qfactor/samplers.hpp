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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qfactor/hwgraph.hpp"
#include "qfactor/numtheory.hpp"
#include "qfactor/qubo.hpp"

namespace qfactor {

struct SampleRecord {
    std::vector<std::uint8_t> assignment;
    coeff_t energy = 0;  //!< always recomputed locally
    u64 occurrences = 0;
    //! A remote source claimed a different energy for this assignment.
    bool energy_mismatch = false;

    friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

//! Distinct assignments sorted by (energy, assignment).
struct SampleSet {
    std::vector<SampleRecord> records;
    std::string sampler;
    u64 seed = 0;
    std::string schedule;

    u64 num_reads() const noexcept;
    std::size_t num_mismatches() const noexcept;
    friend bool operator==(const SampleSet&, const SampleSet&) = default;
};

//! Merges duplicates, evaluates energies against `model` and sorts.
SampleSet make_sample_set(const QuboModel& model, std::vector<SampleRecord> records, std::string sampler, u64 seed,
                          std::string schedule);

struct ExhaustiveResult {
    coeff_t energy = 0;
    std::vector<std::vector<std::uint8_t>> minimisers;  //!< in counting order, at most the requested limit
    u64 num_minimisers = 0;                              //!< total, even past the limit
};

constexpr unsigned kExhaustiveCap = 30;

//! Enumerates all 2^n assignments (n <= 30).
ExhaustiveResult solve_exhaustive(const QuboModel& model, std::size_t max_minimisers = 1u << 16,
                                  unsigned threads = 0);

struct AnnealSchedule {
    unsigned sweeps = 1000;
    double beta_start = 0.1;
    double beta_end = 10.0;
    //! Divide beta_start by the largest |coefficient|, so the first sweeps
    //! are hot even for factoring models with coefficients near N^2.
    //! beta_end stays in raw units: integer models have gaps of at least 1.
    bool scale_beta_start = true;

    void validate() const;
    std::string to_string() const;
};

//! Independent single-flip Metropolis restarts with a geometric beta ramp.
//! Read r is seeded from mix_seed(seed, r), so results do not depend on the
//! number of threads. `initial`, when given, replaces the random start.
SampleSet sample_sa(const QuboModel& model, const AnnealSchedule& schedule, u64 num_reads, u64 seed,
                    unsigned threads = 0, std::span<const std::uint8_t> initial = {});

struct RemoteOptions {
    unsigned max_attempts = 3;      //!< connection attempts before giving up
    double connect_timeout = 5.0;   //!< seconds
    double read_timeout = 300.0;    //!< seconds
    double retry_delay = 0.2;       //!< seconds, used when no Retry-After is given
};

//! POSTs the model to <endpoint>/v1/sample, for example "http://127.0.0.1:8080".
//! Failures throw RemoteError; nothing is returned unless the whole
//! response validates.
SampleSet remote_sample(const std::string& endpoint, const QuboModel& model, u64 num_reads,
                        const std::map<std::string, std::string>& params = {}, const RemoteOptions& options = {});

//! Request and response bodies of the wire protocol. Values in `params`
//! travel as JSON strings.
std::string encode_sample_request(const QuboModel& model, u64 num_reads, const std::map<std::string, std::string>& params);

struct SampleRequest {
    QuboModel model;  //!< variables carry placeholder roles
    u64 num_reads = 0;
    std::map<std::string, std::string> params;
};
//! Server side of the request; throws Error(Parse) on malformed input.
SampleRequest decode_sample_request(const std::string& body);

//! Response body listing `records`; energies are written as given.
std::string encode_sample_response(const std::vector<SampleRecord>& records);
std::string encode_error_response(const std::string& message);
//! Throws RemoteError(RemoteProtocol) on any malformed field and
//! RemoteError(RemoteRejected) when the document carries an error message.
SampleSet decode_sample_response(const std::string& body, const QuboModel& model, u64 num_reads);

//! Physical samples mapped back through the embedding.
struct UnembeddedSampleSet {
    SampleSet logical;
    u64 broken_reads = 0;  //!< occurrences with at least one broken chain
};
UnembeddedSampleSet unembed_sample_set(const SampleSet& physical, const EmbeddedModel& embedded,
                                       const QuboModel& logical_model);

//! Occurrence-weighted fraction of samples whose factor bits multiply to n.
double success_frequency(const SampleSet& samples, const FactorEncoding& encoding, u64 n);
//! Occurrence-weighted fraction of samples with energy exactly 0.
double global_minimum_frequency(const SampleSet& samples);

}  // namespace qfactor
