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


#include "qfactor/samplers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "qfactor/error.hpp"
#include "qfactor/parallel.hpp"

namespace qfactor {

namespace {

// Row i lists (j, b_ij) for every coupler touching i.
struct Couplings {
    std::vector<std::size_t> start;
    std::vector<std::pair<std::uint32_t, coeff_t>> entries;

    explicit Couplings(const QuboModel& model) : start(model.num_vars() + 1, 0) {
        for (const auto& [key, c] : model.quadratic_terms()) {
            ++start[key.first + 1];
            ++start[key.second + 1];
        }
        for (std::size_t i = 0; i < model.num_vars(); ++i) start[i + 1] += start[i];
        entries.resize(start.back());
        std::vector<std::size_t> fill(start.begin(), start.end() - 1);
        for (const auto& [key, c] : model.quadratic_terms()) {
            entries[fill[key.first]++] = {key.second, c};
            entries[fill[key.second]++] = {key.first, c};
        }
    }
    auto row(std::size_t i) const {
        return std::span(entries.data() + start[i], entries.data() + start[i + 1]);
    }
};

// Every partial sum of the energy stays below the sum of absolute values;
// refuse models where that could leave 64 bits.
void check_energy_range(const QuboModel& model) {
    __int128 total = model.offset() < 0 ? -static_cast<__int128>(model.offset()) : model.offset();
    for (coeff_t a : model.linear_terms()) total += a < 0 ? -static_cast<__int128>(a) : a;
    for (const auto& [key, c] : model.quadratic_terms()) total += c < 0 ? -static_cast<__int128>(c) : c;
    if (total > std::numeric_limits<coeff_t>::max())
        fail(ErrorCode::Overflow, "model energies may exceed the 64-bit range");
}

std::vector<coeff_t> local_fields(const QuboModel& model, const Couplings& couplings,
                                  const std::vector<std::uint8_t>& x) {
    std::vector<coeff_t> h(model.linear_terms());
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i])
            for (auto [j, b] : couplings.row(i)) h[j] += b;
    return h;
}

inline double unit_interval(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

u64 SampleSet::num_reads() const noexcept {
    u64 total = 0;
    for (const auto& r : records) total += r.occurrences;
    return total;
}

std::size_t SampleSet::num_mismatches() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [](const SampleRecord& r) { return r.energy_mismatch; }));
}

SampleSet make_sample_set(const QuboModel& model, std::vector<SampleRecord> records, std::string sampler, u64 seed,
                          std::string schedule) {
    std::map<std::vector<std::uint8_t>, SampleRecord> merged;
    for (auto& r : records) {
        if (r.assignment.size() != model.num_vars())
            fail(ErrorCode::InvalidArgument, "sample has " + std::to_string(r.assignment.size()) +
                                                 " bits, model has " + std::to_string(model.num_vars()));
        if (r.occurrences == 0) fail(ErrorCode::InvalidArgument, "sample with zero occurrences");
        auto [it, fresh] = merged.try_emplace(r.assignment);
        auto& slot = it->second;
        if (fresh) {
            slot.assignment = std::move(r.assignment);
            slot.energy = model.evaluate(slot.assignment);
        }
        slot.occurrences += r.occurrences;
        slot.energy_mismatch = slot.energy_mismatch || r.energy_mismatch;
    }
    SampleSet out;
    out.sampler = std::move(sampler);
    out.seed = seed;
    out.schedule = std::move(schedule);
    out.records.reserve(merged.size());
    for (auto& [key, r] : merged) out.records.push_back(std::move(r));
    std::stable_sort(out.records.begin(), out.records.end(),
                     [](const SampleRecord& a, const SampleRecord& b) { return a.energy < b.energy; });
    return out;
}

// ---------------------------------------------------------------------------
// Exhaustive search

ExhaustiveResult solve_exhaustive(const QuboModel& model, std::size_t max_minimisers, unsigned threads) {
    const std::size_t n = model.num_vars();
    if (n > kExhaustiveCap)
        fail(ErrorCode::Capacity, "exhaustive search is capped at " + std::to_string(kExhaustiveCap) + " variables, model has " +
                                      std::to_string(n));
    check_energy_range(model);
    ExhaustiveResult result;
    if (n == 0) {
        result.energy = model.offset();
        result.minimisers.push_back({});
        result.num_minimisers = 1;
        return result;
    }
    const Couplings couplings(model);
    // The top bits pick a block; each block walks its low bits in Gray-code order.
    const unsigned high = static_cast<unsigned>(std::min<std::size_t>(n, 6));
    const unsigned low = static_cast<unsigned>(n) - high;
    struct Block {
        coeff_t energy = std::numeric_limits<coeff_t>::max();
        std::vector<u64> patterns;
        u64 count = 0;
    };
    std::vector<Block> blocks(std::size_t{1} << high);
    parallel_for(blocks.size(), threads, [&](std::size_t b) {
        std::vector<std::uint8_t> x(n, 0);
        for (unsigned i = 0; i < high; ++i) x[low + i] = (b >> i) & 1;
        auto h = local_fields(model, couplings, x);
        coeff_t energy = model.evaluate(x);
        u64 pattern = static_cast<u64>(b) << low;
        Block& out = blocks[b];
        auto visit = [&] {
            if (energy > out.energy) return;
            if (energy < out.energy) {
                out.energy = energy;
                out.patterns.clear();
                out.count = 0;
            }
            ++out.count;
            if (out.patterns.size() < max_minimisers) out.patterns.push_back(pattern);
        };
        visit();
        const u64 steps = u64{1} << low;
        for (u64 g = 1; g < steps; ++g) {
            const unsigned i = static_cast<unsigned>(std::countr_zero(g));
            const coeff_t delta = x[i] ? -h[i] : h[i];
            energy += delta;
            x[i] ^= 1;
            pattern ^= u64{1} << i;
            const coeff_t sign = x[i] ? 1 : -1;
            for (auto [j, c] : couplings.row(i)) h[j] += sign * c;
            visit();
        }
        std::sort(out.patterns.begin(), out.patterns.end());
    });
    result.energy = std::numeric_limits<coeff_t>::max();
    for (const auto& b : blocks) result.energy = std::min(result.energy, b.energy);
    for (const auto& b : blocks) {
        if (b.energy != result.energy) continue;
        result.num_minimisers += b.count;
        for (u64 pattern : b.patterns) {
            if (result.minimisers.size() >= max_minimisers) break;
            std::vector<std::uint8_t> x(n);
            for (std::size_t i = 0; i < n; ++i) x[i] = (pattern >> i) & 1;
            result.minimisers.push_back(std::move(x));
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Simulated annealing

void AnnealSchedule::validate() const {
    if (sweeps < 1) fail(ErrorCode::InvalidArgument, "anneal schedule needs at least one sweep");
    if (!(beta_start > 0) || !std::isfinite(beta_start))
        fail(ErrorCode::InvalidArgument, "beta_start must be positive and finite");
    if (!(beta_end >= beta_start) || !std::isfinite(beta_end))
        fail(ErrorCode::InvalidArgument, "beta_end must be finite and at least beta_start");
}

std::string AnnealSchedule::to_string() const {
    std::ostringstream out;
    out.precision(17);
    out << "sweeps=" << sweeps << " beta_start=" << beta_start << " beta_end=" << beta_end
        << " interpolation=geometric beta_start_scale=" << (scale_beta_start ? "max_abs_coefficient" : "none");
    return out.str();
}

SampleSet sample_sa(const QuboModel& model, const AnnealSchedule& schedule, u64 num_reads, u64 seed,
                    unsigned threads, std::span<const std::uint8_t> initial) {
    schedule.validate();
    if (num_reads < 1) fail(ErrorCode::InvalidArgument, "sample_sa needs at least one read");
    const std::size_t n = model.num_vars();
    if (!initial.empty() && initial.size() != n)
        fail(ErrorCode::InvalidArgument, "initial state has the wrong number of bits");
    check_energy_range(model);
    const Couplings couplings(model);
    const double beta0 = schedule.scale_beta_start && model.max_abs_coefficient() > 0
                             ? schedule.beta_start / static_cast<double>(model.max_abs_coefficient())
                             : schedule.beta_start;
    std::vector<double> betas(schedule.sweeps);
    for (unsigned s = 0; s < schedule.sweeps; ++s) {
        const double t = schedule.sweeps == 1 ? 0.0 : static_cast<double>(s) / (schedule.sweeps - 1);
        betas[s] = beta0 * std::pow(schedule.beta_end / beta0, t);
    }
    std::vector<std::vector<std::uint8_t>> finals(num_reads);
    parallel_for(num_reads, threads, [&](std::size_t read) {
        std::mt19937_64 rng(mix_seed(seed, read));
        std::vector<std::uint8_t> x(n);
        if (initial.empty())
            for (auto& bit : x) bit = rng() >> 63;
        else
            std::copy(initial.begin(), initial.end(), x.begin());
        auto h = local_fields(model, couplings, x);
        for (double beta : betas)
            for (std::size_t i = 0; i < n; ++i) {
                const coeff_t delta = x[i] ? -h[i] : h[i];
                if (delta > 0 && unit_interval(rng) >= std::exp(-beta * static_cast<double>(delta))) continue;
                x[i] ^= 1;
                const coeff_t sign = x[i] ? 1 : -1;
                for (auto [j, c] : couplings.row(i)) h[j] += sign * c;
            }
        finals[read] = std::move(x);
    });
    std::vector<SampleRecord> records;
    records.reserve(num_reads);
    for (auto& x : finals) records.push_back({std::move(x), 0, 1, false});
    return make_sample_set(model, std::move(records), "sa", seed, schedule.to_string());
}

// ---------------------------------------------------------------------------
// Frequencies

UnembeddedSampleSet unembed_sample_set(const SampleSet& physical, const EmbeddedModel& embedded,
                                       const QuboModel& logical_model) {
    UnembeddedSampleSet out;
    std::vector<SampleRecord> records;
    records.reserve(physical.records.size());
    for (const auto& r : physical.records) {
        auto u = unembed_sample(r.assignment, embedded.local);
        if (u.broken_chains > 0) out.broken_reads += r.occurrences;
        records.push_back({std::move(u.logical), 0, r.occurrences, r.energy_mismatch});
    }
    out.logical = make_sample_set(logical_model, std::move(records), physical.sampler, physical.seed, physical.schedule);
    return out;
}

double success_frequency(const SampleSet& samples, const FactorEncoding& encoding, u64 n) {
    const u64 reads = samples.num_reads();
    if (reads == 0) fail(ErrorCode::Precondition, "success_frequency: empty sample set");
    u64 hits = 0;
    for (const auto& r : samples.records) {
        const auto f = decode_sample(r.assignment, encoding);
        if (static_cast<unsigned __int128>(f.p) * f.q == n) hits += r.occurrences;
    }
    return static_cast<double>(hits) / static_cast<double>(reads);
}

double global_minimum_frequency(const SampleSet& samples) {
    const u64 reads = samples.num_reads();
    if (reads == 0) fail(ErrorCode::Precondition, "global_minimum_frequency: empty sample set");
    u64 hits = 0;
    for (const auto& r : samples.records)
        if (r.energy == 0) hits += r.occurrences;
    return static_cast<double>(hits) / static_cast<double>(reads);
}

}  // namespace qfactor
