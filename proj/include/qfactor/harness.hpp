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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qfactor/numtheory.hpp"
#include "qfactor/postproc.hpp"
#include "qfactor/qubo.hpp"
#include "qfactor/samplers.hpp"

namespace qfactor {

// ---------------------------------------------------------------------------
// Shor noise sweep

struct ShorSweepSpec {
    unsigned L = 19;
    std::vector<double> delta_grid{0.0};
    unsigned problems_per_delta = 200;
    unsigned shots_per_problem = 50;
    unsigned t = 0;  //!< 0 selects 2 L
    unsigned c_max = kDefaultMultiplierBound;
    unsigned max_qubits = 26;
    u64 seed = 1;

    void validate() const;
    unsigned counting_bits() const noexcept { return t == 0 ? 2 * L : t; }
};

//! Semiprime with exactly L bits; factor lengths ceil((L+1)/2) and the rest.
Semiprime semiprime_with_bits(unsigned L, u64 seed);

struct ShorProblemRow {
    double delta = 0;
    unsigned problem = 0;
    u64 n = 0, p = 0, q = 0, a = 0, order = 0;
    unsigned shots = 0;
    unsigned shor = 0, shor_or_lucky = 0, extended = 0, peak = 0;
    unsigned rejected_bases = 0;  //!< draws of a with gcd(a, N) != 1, each a factor found by accident

    friend bool operator==(const ShorProblemRow&, const ShorProblemRow&) = default;
};

struct CategoryStats {
    double mean = 0;
    double stderr_mean = 0;  //!< unbiased sample standard deviation / sqrt(problems)
    friend bool operator==(const CategoryStats&, const CategoryStats&) = default;
};

struct ShorSweepRow {
    double delta = 0;
    unsigned problems = 0;
    CategoryStats shor, shor_or_lucky, extended, peak;
    unsigned rejected_bases = 0;
    friend bool operator==(const ShorSweepRow&, const ShorSweepRow&) = default;
};

struct ShorSweepResult {
    ShorSweepSpec spec;
    std::vector<ShorSweepRow> rows;          //!< one per delta, grid order
    std::vector<ShorProblemRow> problems;    //!< delta-major, problem order
};

//! Problem k uses the same semiprime and base at every delta; shot seeds
//! differ per delta. Parallel over problems, output independent of threads.
ShorSweepResult run_shor_sweep(const ShorSweepSpec& spec, unsigned threads = 0);

CategoryStats category_stats(const std::vector<double>& per_problem);

// Single problem with per-shot detail.
struct ShorRunSpec {
    u64 p = 0, q = 0;  //!< factors of N; both 0 draws an L-bit semiprime from the seed
    unsigned L = 19;
    u64 a = 0;         //!< 0 draws a base from the seed
    unsigned t = 0;
    double delta = 0;
    unsigned shots = 50;
    unsigned c_max = kDefaultMultiplierBound;
    unsigned max_qubits = 26;
    u64 seed = 1;
};

struct ShotRow {
    unsigned shot = 0;
    u64 j = 0;
    std::string bits;  //!< measurement order, first measured bit first
    bool shor = false, lucky = false, extended = false, peak = false;
    u64 factor = 0;  //!< 0 when none was recovered
    u64 r_basic = 0;
};

struct ShorRunResult {
    ShorRunSpec spec;
    Semiprime semiprime;
    u64 a = 0, order = 0;
    unsigned t = 0;
    std::vector<ShotRow> shots;
};

ShorRunResult run_shor_problem(const ShorRunSpec& spec, unsigned threads = 0);

// ---------------------------------------------------------------------------
// Annealing benchmark

enum class SamplerKind { Sa, Exhaustive, Remote };
const char* to_string(SamplerKind k) noexcept;
SamplerKind parse_sampler(const std::string& text);

struct AnnealBenchSpec {
    Method method = Method::Direct;
    std::vector<unsigned> l_values{4, 6, 8, 10};
    unsigned semiprimes_per_l = 10;
    u64 reads_per_problem = 10000;
    SamplerKind sampler = SamplerKind::Sa;
    AnnealSchedule schedule;
    std::string endpoint;           //!< remote sampler only
    unsigned pegasus_m = 0;         //!< nonzero: embed into ideal Pegasus of this size first
    //! Semiprimes get a seed-drawn split and each problem walks
    //! unknown_bit_splits until some read factors N.
    bool sweep_split = false;
    u64 seed = 1;

    void validate() const;
};

//! Splits of l unknown bits tried for one semiprime group: the balanced
//! split first, then moving bits from p to q.
std::vector<std::pair<unsigned, unsigned>> unknown_bit_splits(unsigned l, bool sweep);

struct AnnealProblemRow {
    unsigned l = 0;
    unsigned index = 0;
    unsigned l_p = 0, l_q = 0;  //!< full factor lengths (unknown + 2) of the last split tried
    unsigned splits_tried = 0;
    u64 n = 0, p = 0, q = 0;
    std::size_t variables = 0;
    std::size_t qubits = 0;          //!< 0 when not embedded
    u64 reads = 0;                   //!< reads of the last split tried
    double success = 0;
    double global_minimum = 0;
    double broken_fraction = 0;
    std::string error;               //!< nonempty when the problem failed

    friend bool operator==(const AnnealProblemRow&, const AnnealProblemRow&) = default;
};

struct LevelSummary {
    unsigned l = 0;
    unsigned problems = 0;  //!< completed problems
    double success_median = 0, success_p25 = 0, success_p75 = 0;
    double global_minimum_median = 0;
    double baseline = 0;  //!< 2^-l
    friend bool operator==(const LevelSummary&, const LevelSummary&) = default;
};

struct ScalingFit {
    double exponent = 0;   //!< b in median ~ 2^(b l + intercept)
    double intercept = 0;
    double residual_norm = 0;
    std::vector<unsigned> used;      //!< l values in the fit
    std::vector<unsigned> excluded;  //!< zero medians
};

struct AnnealBenchResult {
    AnnealBenchSpec spec;
    std::vector<AnnealProblemRow> problems;
    std::vector<LevelSummary> levels;
    std::optional<ScalingFit> fit;  //!< absent when fewer than two usable levels
};

AnnealBenchResult run_anneal_benchmark(const AnnealBenchSpec& spec, unsigned threads = 0);

//! Linear interpolation between closest ranks; sorts a copy.
double percentile(std::vector<double> values, double fraction);

struct ScalingPoint {
    double l = 0;
    double median = 0;
};
//! Least squares of log2(median) on l over the points with median > 0.
ScalingFit fit_scaling(const std::vector<ScalingPoint>& points);

// ---------------------------------------------------------------------------
// Solving one model

struct SolveSpec {
    SamplerKind sampler = SamplerKind::Sa;
    u64 reads = 1000;
    AnnealSchedule schedule;
    std::string endpoint;
    u64 n = 0;  //!< nonzero: score reads against this N through the model's factor bits
    u64 seed = 1;

    void validate() const;
};

struct SolveResult {
    SolveSpec spec;
    SampleSet samples;
    bool has_factor_bits = false;
    FactorEncoding encoding;       //!< valid when has_factor_bits
    u64 exhaustive_minimisers = 0; //!< total count, exhaustive sampler only
};

SolveResult solve_model(const QuboModel& model, const SolveSpec& spec, unsigned threads = 0);

struct FitResult {
    std::vector<ScalingPoint> points;
    ScalingFit fit;
};
FitResult run_fit(const std::vector<ScalingPoint>& points);

// ---------------------------------------------------------------------------
// Output

enum class OutputFormat { Csv, Summary };
OutputFormat parse_format(const std::string& text);

//! csv: per-row CSV files, plot files and the summary document;
//! summary: the summary document only. Returns the paths written.
std::vector<std::filesystem::path> emit_results(const ShorSweepResult& r, const std::filesystem::path& dir,
                                                OutputFormat format);
std::vector<std::filesystem::path> emit_results(const ShorRunResult& r, const std::filesystem::path& dir,
                                                OutputFormat format);
std::vector<std::filesystem::path> emit_results(const AnnealBenchResult& r, const std::filesystem::path& dir,
                                                OutputFormat format);
std::vector<std::filesystem::path> emit_results(const SolveResult& r, const std::filesystem::path& dir,
                                                OutputFormat format);
std::vector<std::filesystem::path> emit_results(const FitResult& r, const std::filesystem::path& dir,
                                                OutputFormat format);

std::string summary_document(const ShorSweepResult& r);
std::string summary_document(const ShorRunResult& r);
std::string summary_document(const AnnealBenchResult& r);
std::string summary_document(const SolveResult& r);
std::string summary_document(const FitResult& r);

//! energy,occurrences,p,q,assignment (variable 0 first); p and q empty
//! for models without factor bits.
std::string samples_csv(const SolveResult& r);

std::string shor_problems_csv(const std::vector<ShorProblemRow>& rows);
std::vector<ShorProblemRow> parse_shor_problems_csv(const std::string& text);
std::string anneal_problems_csv(const std::vector<AnnealProblemRow>& rows);
std::vector<AnnealProblemRow> parse_anneal_problems_csv(const std::string& text);

//! Plot-ready lines "x y", sorted by x.
std::string plot_data(std::vector<std::pair<double, double>> points);
//! Reads whitespace or comma separated (l, median) pairs; '#' starts a comment,
//! a non-numeric first line is taken as a header.
std::vector<ScalingPoint> parse_scaling_points(const std::string& text);

// Specs as structured text (JSON objects keyed by field name). Missing keys keep defaults.
ShorSweepSpec parse_shor_sweep_spec(const std::string& text);
ShorRunSpec parse_shor_run_spec(const std::string& text);
AnnealBenchSpec parse_anneal_bench_spec(const std::string& text);
AnnealSchedule parse_anneal_schedule(const std::string& text);
SolveSpec parse_solve_spec(const std::string& text);

}  // namespace qfactor
