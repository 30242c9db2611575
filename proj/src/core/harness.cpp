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


#include "qfactor/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qfactor/error.hpp"
#include "qfactor/hwgraph.hpp"
#include "qfactor/parallel.hpp"
#include "qfactor/shor_sim.hpp"

namespace qfactor {
namespace {

using json = nlohmann::json;

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// CSV

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n') {
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        } else if (c != '\r') {
            field += c;
            any = true;
        }
    }
    if (quoted) fail(ErrorCode::Parse, "csv: unterminated quoted field");
    if (any) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

template <typename T>
T parse_number(const std::string& s, const char* what) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        fail(ErrorCode::Parse, std::string("csv: bad ") + what + " '" + s + "'");
    return v;
}

// Rows after a header that must match `columns` exactly.
std::vector<std::vector<std::string>> csv_body(const std::string& text, const std::vector<std::string>& columns) {
    auto rows = parse_csv(text);
    if (rows.empty() || rows.front() != columns) fail(ErrorCode::Parse, "csv: unexpected header");
    rows.erase(rows.begin());
    for (const auto& r : rows)
        if (r.size() != columns.size()) fail(ErrorCode::Parse, "csv: wrong number of fields");
    return rows;
}

std::string join_header(const std::vector<std::string>& columns) {
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
    return out + "\n";
}

const std::vector<std::string> kShorProblemColumns = {
    "delta", "problem", "n", "p", "q", "a", "order", "shots", "shor", "shor_or_lucky", "extended", "peak",
    "rejected_bases"};

const std::vector<std::string> kShorRowColumns = {
    "delta", "problems", "shor_mean", "shor_sem", "shor_lucky_mean", "shor_lucky_sem", "extended_mean",
    "extended_sem", "peak_mean", "peak_sem", "rejected_bases"};

const std::vector<std::string> kShotColumns = {"shot", "j", "bits", "shor", "lucky", "extended", "peak",
                                               "factor", "r_basic"};

const std::vector<std::string> kAnnealProblemColumns = {
    "l", "index", "l_p", "l_q", "splits_tried", "n", "p", "q", "variables", "qubits", "reads", "success",
    "global_minimum", "broken_fraction", "error"};

const std::vector<std::string> kSampleColumns = {"energy", "occurrences", "p", "q", "assignment"};

const std::vector<std::string> kLevelColumns = {"l", "problems", "success_median", "success_p25", "success_p75",
                                                "global_minimum_median", "baseline"};

// ---------------------------------------------------------------------------
// Files

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    out << content;
    out.close();
    if (!out) fail(ErrorCode::Io, "write failed: " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
}

// ---------------------------------------------------------------------------
// Structured-text specs

class Fields {
  public:
    Fields(const std::string& text, const char* what) : what_(what) {
        try {
            doc_ = json::parse(text);
        } catch (const json::parse_error& e) {
            fail(ErrorCode::Parse, std::string(what) + ": " + e.what());
        }
        if (!doc_.is_object()) fail(ErrorCode::Parse, std::string(what) + ": expected an object");
        for (auto it = doc_.begin(); it != doc_.end(); ++it) unused_.insert(it.key());
    }

    template <typename T>
    void get(const char* key, T& out) {
        auto it = doc_.find(key);
        if (it == doc_.end()) return;
        unused_.erase(key);
        try {
            if constexpr (std::is_same_v<T, bool>) {
                if (!it->is_boolean()) throw std::invalid_argument("expected a boolean");
                out = it->template get<bool>();
            } else if constexpr (std::is_integral_v<T>) {
                if (!it->is_number_integer() || (it->is_number_integer() && !it->is_number_unsigned() &&
                                                 it->template get<long long>() < 0))
                    throw std::invalid_argument("expected a non-negative integer");
                const auto v = it->template get<unsigned long long>();
                if (v > std::numeric_limits<T>::max()) throw std::invalid_argument("out of range");
                out = static_cast<T>(v);
            } else if constexpr (std::is_floating_point_v<T>) {
                if (!it->is_number()) throw std::invalid_argument("expected a number");
                out = it->template get<double>();
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!it->is_string()) throw std::invalid_argument("expected a string");
                out = it->template get<std::string>();
            } else {
                if (!it->is_array()) throw std::invalid_argument("expected an array");
                out.clear();
                for (const auto& e : *it) {
                    typename T::value_type v{};
                    if constexpr (std::is_integral_v<typename T::value_type>) {
                        if (!e.is_number_unsigned()) throw std::invalid_argument("expected non-negative integers");
                        const auto x = e.template get<unsigned long long>();
                        if (x > std::numeric_limits<typename T::value_type>::max())
                            throw std::invalid_argument("out of range");
                        v = static_cast<typename T::value_type>(x);
                    } else {
                        if (!e.is_number()) throw std::invalid_argument("expected numbers");
                        v = e.template get<double>();
                    }
                    out.push_back(v);
                }
            }
        } catch (const std::exception& e) {
            fail(ErrorCode::Parse, std::string(what_) + ": field '" + key + "': " + e.what());
        }
    }

    std::string raw(const char* key) {
        auto it = doc_.find(key);
        if (it == doc_.end()) return {};
        unused_.erase(key);
        return it->dump();
    }

    void finish() const {
        if (!unused_.empty()) fail(ErrorCode::Parse, std::string(what_) + ": unknown field '" + *unused_.begin() + "'");
    }

  private:
    json doc_;
    const char* what_;
    std::set<std::string> unused_;
};

json to_json(const AnnealSchedule& s) {
    return {{"sweeps", s.sweeps},
            {"beta_start", s.beta_start},
            {"beta_end", s.beta_end},
            {"scale_beta_start", s.scale_beta_start}};
}

json to_json(const ShorSweepSpec& s) {
    return {{"L", s.L},
            {"delta_grid", s.delta_grid},
            {"problems_per_delta", s.problems_per_delta},
            {"shots_per_problem", s.shots_per_problem},
            {"t", s.counting_bits()},
            {"c_max", s.c_max},
            {"max_qubits", s.max_qubits},
            {"seed", s.seed}};
}

json to_json(const ShorRunSpec& s) {
    return {{"p", s.p}, {"q", s.q}, {"L", s.L}, {"a", s.a}, {"t", s.t}, {"delta", s.delta},
            {"shots", s.shots}, {"c_max", s.c_max}, {"max_qubits", s.max_qubits}, {"seed", s.seed}};
}

json to_json(const AnnealBenchSpec& s) {
    return {{"method", to_string(s.method)},
            {"l_values", s.l_values},
            {"semiprimes_per_l", s.semiprimes_per_l},
            {"reads_per_problem", s.reads_per_problem},
            {"sampler", to_string(s.sampler)},
            {"schedule", to_json(s.schedule)},
            {"endpoint", s.endpoint},
            {"pegasus_m", s.pegasus_m},
            {"sweep_split", s.sweep_split},
            {"seed", s.seed}};
}

json to_json(const SolveSpec& s) {
    return {{"sampler", to_string(s.sampler)},
            {"reads", s.reads},
            {"schedule", to_json(s.schedule)},
            {"endpoint", s.endpoint},
            {"n", s.n},
            {"seed", s.seed}};
}

json to_json(const ScalingFit& f) {
    return {{"exponent", f.exponent},
            {"intercept", f.intercept},
            {"residual_norm", f.residual_norm},
            {"used_l", f.used},
            {"excluded_zero_median_l", f.excluded}};
}

json to_json(const CategoryStats& c) { return {{"mean", c.mean}, {"stderr", c.stderr_mean}}; }

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

}  // namespace

// ---------------------------------------------------------------------------
// Shor sweep

void ShorSweepSpec::validate() const {
    if (L < 5 || L > 61) fail(ErrorCode::InvalidArgument, "shor sweep: L must lie in [5, 61]");
    if (delta_grid.empty()) fail(ErrorCode::InvalidArgument, "shor sweep: delta_grid is empty");
    for (double d : delta_grid)
        if (!(d >= 0) || !std::isfinite(d)) fail(ErrorCode::InvalidArgument, "shor sweep: deltas must be finite and >= 0");
    if (problems_per_delta == 0 || shots_per_problem == 0)
        fail(ErrorCode::InvalidArgument, "shor sweep: problem and shot counts must be >= 1");
    if (counting_bits() > 127) fail(ErrorCode::InvalidArgument, "shor sweep: t must be <= 127");
    if (L + 1 > max_qubits)
        fail(ErrorCode::Capacity, "shor sweep: L + 1 = " + std::to_string(L + 1) + " qubits exceeds the cap of " +
                                      std::to_string(max_qubits));
}

Semiprime semiprime_with_bits(unsigned L, u64 seed) {
    if (L < 5 || L > 61) fail(ErrorCode::InvalidArgument, "semiprime_with_bits: L must lie in [5, 61]");
    const unsigned l_p = (L + 2) / 2;
    const unsigned l_q = L + 1 - l_p;
    for (u64 attempt = 0; attempt < 4096; ++attempt) {
        const Semiprime s = random_semiprime(l_p, l_q, mix_seed(seed, attempt));
        if (s.bit_length_n == L) return s;
    }
    fail(ErrorCode::Precondition, "semiprime_with_bits: no " + std::to_string(L) + "-bit product found");
}

CategoryStats category_stats(const std::vector<double>& x) {
    CategoryStats out;
    if (x.empty()) return out;
    double sum = 0;
    for (double v : x) sum += v;
    out.mean = sum / static_cast<double>(x.size());
    if (x.size() > 1) {
        double ss = 0;
        for (double v : x) ss += (v - out.mean) * (v - out.mean);
        const double var = ss / static_cast<double>(x.size() - 1);
        out.stderr_mean = std::sqrt(var / static_cast<double>(x.size()));
    }
    return out;
}

namespace {

struct DrawnBase {
    u64 a = 0;
    unsigned rejected = 0;
};

// Uniform over [2, N-1], redrawn while gcd(a, N) != 1.
DrawnBase draw_base(const Semiprime& s, u64 seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<u64> dist(2, s.n - 1);
    DrawnBase out;
    for (;;) {
        const u64 a = dist(rng);
        if (gcd(a, s.n) == 1) {
            out.a = a;
            return out;
        }
        ++out.rejected;
    }
}

}  // namespace

ShorSweepResult run_shor_sweep(const ShorSweepSpec& spec, unsigned threads) {
    spec.validate();
    const unsigned t = spec.counting_bits();
    const std::size_t P = spec.problems_per_delta, D = spec.delta_grid.size();

    struct Problem {
        Semiprime s;
        DrawnBase base;
        u64 order = 0;
        u64 seed = 0;
    };
    std::vector<Problem> problems(P);
    parallel_for(P, threads, [&](std::size_t k) {
        Problem& pr = problems[k];
        pr.seed = mix_seed(spec.seed, k);
        pr.s = semiprime_with_bits(spec.L, mix_seed(pr.seed, 0));
        pr.base = draw_base(pr.s, mix_seed(pr.seed, 1));
        pr.order = multiplicative_order(pr.base.a, pr.s);
    });

    ShorSweepResult result;
    result.spec = spec;
    result.problems.resize(P * D);
    // One work item per (delta, problem): each shot is a full state-vector run.
    parallel_for(P * D, threads, [&](std::size_t item) {
        const std::size_t d = item / P, k = item % P;
        const Problem& pr = problems[k];
        const u64 delta_seed = mix_seed(pr.seed, 2 + d);
        ShorProblemRow row;
        row.delta = spec.delta_grid[d];
        row.problem = static_cast<unsigned>(k);
        row.n = pr.s.n;
        row.p = pr.s.p;
        row.q = pr.s.q;
        row.a = pr.base.a;
        row.order = pr.order;
        row.shots = spec.shots_per_problem;
        row.rejected_bases = pr.base.rejected;
        for (unsigned shot = 0; shot < spec.shots_per_problem; ++shot) {
            const auto rec = run_shot({pr.s, pr.base.a, t, row.delta, mix_seed(delta_seed, shot)}, {spec.max_qubits});
            const auto c = classify(rec.j, t, pr.base.a, pr.s, pr.order, spec.c_max);
            row.shor += c.shor_success;
            row.shor_or_lucky += c.shor_or_lucky();
            row.extended += c.extended_success;
            row.peak += c.peak;
        }
        result.problems[item] = row;
    });

    for (std::size_t d = 0; d < D; ++d) {
        std::vector<double> shor, lucky, ext, peak;
        ShorSweepRow row;
        row.delta = spec.delta_grid[d];
        row.problems = static_cast<unsigned>(P);
        for (std::size_t k = 0; k < P; ++k) {
            const auto& pr = result.problems[d * P + k];
            const double n = pr.shots;
            shor.push_back(pr.shor / n);
            lucky.push_back(pr.shor_or_lucky / n);
            ext.push_back(pr.extended / n);
            peak.push_back(pr.peak / n);
            row.rejected_bases += pr.rejected_bases;
        }
        row.shor = category_stats(shor);
        row.shor_or_lucky = category_stats(lucky);
        row.extended = category_stats(ext);
        row.peak = category_stats(peak);
        result.rows.push_back(row);
    }
    return result;
}

ShorRunResult run_shor_problem(const ShorRunSpec& spec, unsigned threads) {
    if (spec.shots == 0) fail(ErrorCode::InvalidArgument, "shor run: shots must be >= 1");
    if (!(spec.delta >= 0) || !std::isfinite(spec.delta))
        fail(ErrorCode::InvalidArgument, "shor run: delta must be finite and >= 0");
    ShorRunResult result;
    result.spec = spec;
    if (spec.p == 0 && spec.q == 0) {
        result.semiprime = semiprime_with_bits(spec.L, mix_seed(spec.seed, 0));
    } else {
        result.semiprime = Semiprime::from_factors(spec.p, spec.q);
    }
    const Semiprime& s = result.semiprime;
    if (spec.a == 0) {
        result.a = draw_base(s, mix_seed(spec.seed, 1)).a;
    } else {
        if (spec.a < 2 || spec.a >= s.n) fail(ErrorCode::InvalidArgument, "shor run: a must lie in [2, N-1]");
        if (gcd(spec.a, s.n) != 1)
            fail(ErrorCode::Precondition, "shor run: gcd(a, N) = " + std::to_string(gcd(spec.a, s.n)) +
                                              " already factors N");
        result.a = spec.a;
    }
    result.order = multiplicative_order(result.a, s);
    result.t = spec.t == 0 ? 2 * s.bit_length_n : spec.t;
    if (result.t > 127) fail(ErrorCode::InvalidArgument, "shor run: t must be <= 127");
    if (s.bit_length_n + 1 > spec.max_qubits)
        fail(ErrorCode::Capacity, "shor run: " + std::to_string(s.bit_length_n + 1) + " qubits exceed the cap of " +
                                      std::to_string(spec.max_qubits));

    result.shots.resize(spec.shots);
    const u64 shot_root = mix_seed(spec.seed, 2);
    parallel_for(spec.shots, threads, [&](std::size_t k) {
        const auto rec = run_shot({s, result.a, result.t, spec.delta, mix_seed(shot_root, k)}, {spec.max_qubits});
        const auto c = classify(rec.j, result.t, result.a, s, result.order, spec.c_max);
        ShotRow row;
        row.shot = static_cast<unsigned>(k);
        row.j = rec.j;
        for (auto b : rec.bits) row.bits += b ? '1' : '0';
        row.shor = c.shor_success;
        row.lucky = c.lucky_success;
        row.extended = c.extended_success;
        row.peak = c.peak;
        row.factor = c.recovered_factor.value_or(0);
        row.r_basic = c.r_basic;
        result.shots[k] = std::move(row);
    });
    return result;
}

// ---------------------------------------------------------------------------
// Annealing benchmark

const char* to_string(SamplerKind k) noexcept {
    switch (k) {
        case SamplerKind::Sa: return "sa";
        case SamplerKind::Exhaustive: return "exhaustive";
        case SamplerKind::Remote: return "remote";
    }
    return "?";
}

SamplerKind parse_sampler(const std::string& text) {
    if (text == "sa") return SamplerKind::Sa;
    if (text == "exhaustive") return SamplerKind::Exhaustive;
    if (text == "remote") return SamplerKind::Remote;
    fail(ErrorCode::InvalidArgument, "unknown sampler '" + text + "' (expected sa, exhaustive or remote)");
}

void AnnealBenchSpec::validate() const {
    if (l_values.empty()) fail(ErrorCode::InvalidArgument, "anneal bench: l_values is empty");
    for (unsigned l : l_values)
        if (l < 2 || l > 56) fail(ErrorCode::InvalidArgument, "anneal bench: l must lie in [2, 56]");
    if (semiprimes_per_l == 0 || reads_per_problem == 0)
        fail(ErrorCode::InvalidArgument, "anneal bench: semiprime and read counts must be >= 1");
    if (sampler == SamplerKind::Sa) schedule.validate();
    if (sampler == SamplerKind::Remote && endpoint.empty())
        fail(ErrorCode::InvalidArgument, "anneal bench: the remote sampler needs an endpoint");
}

std::vector<std::pair<unsigned, unsigned>> unknown_bit_splits(unsigned l, bool sweep) {
    if (l < 2) fail(ErrorCode::InvalidArgument, "unknown_bit_splits: l must be >= 2");
    std::vector<std::pair<unsigned, unsigned>> out;
    unsigned lp = l / 2, lq = l - l / 2;
    out.emplace_back(lp, lq);
    if (!sweep) return out;
    while (lp > 1) out.emplace_back(--lp, ++lq);
    return out;
}

double percentile(std::vector<double> values, double fraction) {
    if (values.empty()) fail(ErrorCode::InvalidArgument, "percentile: no values");
    if (!(fraction >= 0 && fraction <= 1)) fail(ErrorCode::InvalidArgument, "percentile: fraction outside [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = fraction * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return values[lo] + w * (values[hi] - values[lo]);
}

ScalingFit fit_scaling(const std::vector<ScalingPoint>& points) {
    ScalingFit fit;
    std::vector<std::pair<double, double>> xy;
    for (const auto& pt : points) {
        if (!std::isfinite(pt.l) || !std::isfinite(pt.median) || pt.median < 0)
            fail(ErrorCode::InvalidArgument, "fit_scaling: medians must be finite and >= 0");
        const auto l = static_cast<unsigned>(std::lround(pt.l));
        if (pt.median == 0) {
            fit.excluded.push_back(l);
            continue;
        }
        fit.used.push_back(l);
        xy.emplace_back(pt.l, std::log2(pt.median));
    }
    if (xy.size() < 2) fail(ErrorCode::InvalidArgument, "fit_scaling: fewer than two nonzero medians");
    double mx = 0, my = 0;
    for (auto [x, y] : xy) {
        mx += x;
        my += y;
    }
    mx /= static_cast<double>(xy.size());
    my /= static_cast<double>(xy.size());
    double sxx = 0, sxy = 0;
    for (auto [x, y] : xy) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (sxx == 0) fail(ErrorCode::InvalidArgument, "fit_scaling: all usable points share one l");
    fit.exponent = sxy / sxx;
    fit.intercept = my - fit.exponent * mx;
    double rr = 0;
    for (auto [x, y] : xy) {
        const double r = y - (fit.intercept + fit.exponent * x);
        rr += r * r;
    }
    fit.residual_norm = std::sqrt(rr);
    return fit;
}

namespace {

SampleSet exhaustive_samples(const QuboModel& model, u64 reads, unsigned threads, u64* total = nullptr) {
    const auto ex = solve_exhaustive(model, 1u << 16, threads);
    if (total) *total = ex.num_minimisers;
    std::vector<SampleRecord> records;
    const u64 k = ex.minimisers.size();
    for (u64 i = 0; i < k && i < reads; ++i) {
        SampleRecord r;
        r.assignment = ex.minimisers[i];
        r.occurrences = reads / k + (i < reads % k ? 1 : 0);
        records.push_back(std::move(r));
    }
    return make_sample_set(model, std::move(records), "exhaustive", 0, "");
}

struct Sampled {
    SampleSet logical;
    u64 broken_reads = 0;
    std::size_t qubits = 0;
};

}  // namespace

AnnealBenchResult run_anneal_benchmark(const AnnealBenchSpec& spec, unsigned threads) {
    spec.validate();
    AnnealBenchResult result;
    result.spec = spec;

    std::optional<HardwareGraph> graph;
    if (spec.pegasus_m != 0) graph = build_pegasus_ideal(spec.pegasus_m);

    auto sample = [&](const QuboModel& model, const std::optional<CfaBuild>& cfa, u64 seed) {
        auto draw = [&](const QuboModel& m) -> SampleSet {
            switch (spec.sampler) {
                case SamplerKind::Sa: return sample_sa(m, spec.schedule, spec.reads_per_problem, seed, threads);
                case SamplerKind::Exhaustive: return exhaustive_samples(m, spec.reads_per_problem, threads);
                case SamplerKind::Remote:
                    return remote_sample(spec.endpoint, m, spec.reads_per_problem, {{"seed", std::to_string(seed)}});
            }
            fail(ErrorCode::InvalidArgument, "unknown sampler");
        };
        Sampled out;
        if (!graph) {
            out.logical = draw(model);
            return out;
        }
        const Embedding emb = cfa ? build_cfa_placement(*cfa, *graph) : embed_heuristic(model, *graph, seed);
        const EmbeddedModel em = embed_model(model, *graph, emb);
        const auto un = unembed_sample_set(draw(em.model), em, model);
        out.logical = un.logical;
        out.broken_reads = un.broken_reads;
        out.qubits = emb.num_qubits();
        return out;
    };

    for (unsigned l : spec.l_values) {
        const auto splits = unknown_bit_splits(l, spec.sweep_split);
        for (unsigned i = 0; i < spec.semiprimes_per_l; ++i) {
            const u64 pseed = mix_seed(mix_seed(spec.seed, l), i);
            AnnealProblemRow row;
            row.l = l;
            row.index = i;
            try {
                std::size_t truth = 0;
                if (spec.sweep_split) truth = static_cast<std::size_t>(mix_seed(pseed, 0) % splits.size());
                const Semiprime s =
                    random_semiprime(splits[truth].first + 2, splits[truth].second + 2, mix_seed(pseed, 1));
                row.n = s.n;
                row.p = s.p;
                row.q = s.q;
                for (std::size_t k = 0; k < splits.size(); ++k) {
                    row.l_p = splits[k].first + 2;
                    row.l_q = splits[k].second + 2;
                    row.splits_tried = static_cast<unsigned>(k + 1);
                    std::optional<CfaBuild> cfa;
                    QuboModel model;
                    FactorEncoding enc;
                    if (spec.method == Method::Cfa && graph) {
                        cfa = build_cfa(s.n, row.l_p, row.l_q);
                        model = cfa->model;
                        enc = cfa->encoding;
                    } else {
                        auto built = build_model(spec.method, s.n, row.l_p, row.l_q);
                        model = std::move(built.model);
                        enc = built.encoding;
                    }
                    row.variables = model.num_vars();
                    const auto got = sample(model, cfa, mix_seed(pseed, 2 + k));
                    row.qubits = got.qubits;
                    row.reads = got.logical.num_reads();
                    row.success = success_frequency(got.logical, enc, s.n);
                    row.global_minimum = global_minimum_frequency(got.logical);
                    row.broken_fraction =
                        row.reads ? static_cast<double>(got.broken_reads) / static_cast<double>(row.reads) : 0.0;
                    if (row.success > 0) break;
                }
            } catch (const std::exception& e) {
                row.error = e.what();
                row.success = row.global_minimum = row.broken_fraction = 0;
            }
            result.problems.push_back(std::move(row));
        }
    }

    std::vector<ScalingPoint> points;
    for (unsigned l : spec.l_values) {
        std::vector<double> succ, gmin;
        for (const auto& r : result.problems)
            if (r.l == l && r.error.empty()) {
                succ.push_back(r.success);
                gmin.push_back(r.global_minimum);
            }
        LevelSummary lv;
        lv.l = l;
        lv.problems = static_cast<unsigned>(succ.size());
        lv.baseline = std::ldexp(1.0, -static_cast<int>(l));
        if (!succ.empty()) {
            lv.success_median = percentile(succ, 0.5);
            lv.success_p25 = percentile(succ, 0.25);
            lv.success_p75 = percentile(succ, 0.75);
            lv.global_minimum_median = percentile(gmin, 0.5);
            points.push_back({static_cast<double>(l), lv.success_median});
        }
        result.levels.push_back(lv);
    }
    std::set<double> usable;
    for (const auto& p : points)
        if (p.median > 0) usable.insert(p.l);
    if (usable.size() >= 2) result.fit = fit_scaling(points);
    return result;
}

// ---------------------------------------------------------------------------
// Output

OutputFormat parse_format(const std::string& text) {
    if (text == "csv") return OutputFormat::Csv;
    if (text == "summary") return OutputFormat::Summary;
    fail(ErrorCode::InvalidArgument, "unknown format '" + text + "' (expected csv or summary)");
}

std::string shor_problems_csv(const std::vector<ShorProblemRow>& rows) {
    std::string out = join_header(kShorProblemColumns);
    for (const auto& r : rows) {
        out += format_double(r.delta) + "," + std::to_string(r.problem) + "," + std::to_string(r.n) + "," +
               std::to_string(r.p) + "," + std::to_string(r.q) + "," + std::to_string(r.a) + "," +
               std::to_string(r.order) + "," + std::to_string(r.shots) + "," + std::to_string(r.shor) + "," +
               std::to_string(r.shor_or_lucky) + "," + std::to_string(r.extended) + "," + std::to_string(r.peak) +
               "," + std::to_string(r.rejected_bases) + "\n";
    }
    return out;
}

std::vector<ShorProblemRow> parse_shor_problems_csv(const std::string& text) {
    std::vector<ShorProblemRow> out;
    for (const auto& f : csv_body(text, kShorProblemColumns)) {
        ShorProblemRow r;
        r.delta = parse_number<double>(f[0], "delta");
        r.problem = parse_number<unsigned>(f[1], "problem");
        r.n = parse_number<u64>(f[2], "n");
        r.p = parse_number<u64>(f[3], "p");
        r.q = parse_number<u64>(f[4], "q");
        r.a = parse_number<u64>(f[5], "a");
        r.order = parse_number<u64>(f[6], "order");
        r.shots = parse_number<unsigned>(f[7], "shots");
        r.shor = parse_number<unsigned>(f[8], "shor");
        r.shor_or_lucky = parse_number<unsigned>(f[9], "shor_or_lucky");
        r.extended = parse_number<unsigned>(f[10], "extended");
        r.peak = parse_number<unsigned>(f[11], "peak");
        r.rejected_bases = parse_number<unsigned>(f[12], "rejected_bases");
        out.push_back(r);
    }
    return out;
}

std::string anneal_problems_csv(const std::vector<AnnealProblemRow>& rows) {
    std::string out = join_header(kAnnealProblemColumns);
    for (const auto& r : rows) {
        out += std::to_string(r.l) + "," + std::to_string(r.index) + "," + std::to_string(r.l_p) + "," +
               std::to_string(r.l_q) + "," + std::to_string(r.splits_tried) + "," + std::to_string(r.n) + "," +
               std::to_string(r.p) + "," + std::to_string(r.q) + "," + std::to_string(r.variables) + "," +
               std::to_string(r.qubits) + "," + std::to_string(r.reads) + "," + format_double(r.success) + "," +
               format_double(r.global_minimum) + "," + format_double(r.broken_fraction) + "," + csv_field(r.error) +
               "\n";
    }
    return out;
}

std::vector<AnnealProblemRow> parse_anneal_problems_csv(const std::string& text) {
    std::vector<AnnealProblemRow> out;
    for (const auto& f : csv_body(text, kAnnealProblemColumns)) {
        AnnealProblemRow r;
        r.l = parse_number<unsigned>(f[0], "l");
        r.index = parse_number<unsigned>(f[1], "index");
        r.l_p = parse_number<unsigned>(f[2], "l_p");
        r.l_q = parse_number<unsigned>(f[3], "l_q");
        r.splits_tried = parse_number<unsigned>(f[4], "splits_tried");
        r.n = parse_number<u64>(f[5], "n");
        r.p = parse_number<u64>(f[6], "p");
        r.q = parse_number<u64>(f[7], "q");
        r.variables = parse_number<std::size_t>(f[8], "variables");
        r.qubits = parse_number<std::size_t>(f[9], "qubits");
        r.reads = parse_number<u64>(f[10], "reads");
        r.success = parse_number<double>(f[11], "success");
        r.global_minimum = parse_number<double>(f[12], "global_minimum");
        r.broken_fraction = parse_number<double>(f[13], "broken_fraction");
        r.error = f[14];
        out.push_back(std::move(r));
    }
    return out;
}

std::string plot_data(std::vector<std::pair<double, double>> points) {
    std::stable_sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::string out;
    for (auto [x, y] : points) out += format_double(x) + " " + format_double(y) + "\n";
    return out;
}

std::vector<ScalingPoint> parse_scaling_points(const std::string& text) {
    std::vector<ScalingPoint> out;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        std::string a, b, extra;
        if (!(fields >> a)) continue;
        const bool was_first = first;
        first = false;
        if (!(fields >> b) || (fields >> extra)) fail(ErrorCode::Parse, "fit data: expected two columns in '" + line + "'");
        double x{}, y{};
        const auto rx = std::from_chars(a.data(), a.data() + a.size(), x);
        const auto ry = std::from_chars(b.data(), b.data() + b.size(), y);
        const bool ok = rx.ec == std::errc() && rx.ptr == a.data() + a.size() && ry.ec == std::errc() &&
                        ry.ptr == b.data() + b.size();
        if (!ok) {
            if (was_first) continue;  // header
            fail(ErrorCode::Parse, "fit data: non-numeric line '" + line + "'");
        }
        out.push_back({x, y});
    }
    return out;
}

std::string summary_document(const ShorSweepResult& r) {
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"delta", row.delta},
                        {"problems", row.problems},
                        {"shor", to_json(row.shor)},
                        {"shor_or_lucky", to_json(row.shor_or_lucky)},
                        {"extended", to_json(row.extended)},
                        {"peak", to_json(row.peak)},
                        {"rejected_bases", row.rejected_bases}});
    return dump({{"kind", "shor_sweep"}, {"spec", to_json(r.spec)}, {"seed", r.spec.seed}, {"rows", rows}});
}

std::string summary_document(const ShorRunResult& r) {
    unsigned shor = 0, lucky = 0, ext = 0, peak = 0;
    for (const auto& s : r.shots) {
        shor += s.shor;
        lucky += s.shor || s.lucky;
        ext += s.extended;
        peak += s.peak;
    }
    const double n = static_cast<double>(r.shots.size());
    return dump({{"kind", "shor_run"},
                 {"spec", to_json(r.spec)},
                 {"seed", r.spec.seed},
                 {"n", r.semiprime.n},
                 {"p", r.semiprime.p},
                 {"q", r.semiprime.q},
                 {"a", r.a},
                 {"order", r.order},
                 {"t", r.t},
                 {"shots", r.shots.size()},
                 {"success",
                  {{"shor", shor / n}, {"shor_or_lucky", lucky / n}, {"extended", ext / n}, {"peak", peak / n}}}});
}

std::string summary_document(const AnnealBenchResult& r) {
    json levels = json::array();
    unsigned failed = 0;
    for (const auto& p : r.problems) failed += !p.error.empty();
    for (const auto& lv : r.levels)
        levels.push_back({{"l", lv.l},
                          {"problems", lv.problems},
                          {"success_median", lv.success_median},
                          {"success_p25", lv.success_p25},
                          {"success_p75", lv.success_p75},
                          {"global_minimum_median", lv.global_minimum_median},
                          {"baseline", lv.baseline},
                          {"zero_median", lv.problems > 0 && lv.success_median == 0}});
    return dump({{"kind", "anneal_bench"},
                 {"spec", to_json(r.spec)},
                 {"seed", r.spec.seed},
                 {"levels", levels},
                 {"failed_problems", failed},
                 {"fit", r.fit ? to_json(*r.fit) : json(nullptr)}});
}

std::string summary_document(const FitResult& r) {
    json points = json::array();
    for (const auto& p : r.points) points.push_back({{"l", p.l}, {"median", p.median}});
    return dump({{"kind", "fit"}, {"points", points}, {"fit", to_json(r.fit)}});
}

std::string samples_csv(const SolveResult& r) {
    std::string out = join_header(kSampleColumns);
    for (const auto& rec : r.samples.records) {
        std::string p, q;
        if (r.has_factor_bits) {
            const auto d = decode_sample(rec.assignment, r.encoding);
            p = std::to_string(d.p);
            q = std::to_string(d.q);
        }
        std::string bits;
        for (auto b : rec.assignment) bits += b ? '1' : '0';
        out += std::to_string(rec.energy) + "," + std::to_string(rec.occurrences) + "," + p + "," + q + "," + bits +
               "\n";
    }
    return out;
}

std::string summary_document(const SolveResult& r) {
    const auto& recs = r.samples.records;
    json doc = {{"kind", "qubo_solve"},
                {"spec", to_json(r.spec)},
                {"seed", r.spec.seed},
                {"sampler", r.samples.sampler},
                {"schedule", r.samples.schedule},
                {"reads", r.samples.num_reads()},
                {"distinct", recs.size()},
                {"energy_mismatches", r.samples.num_mismatches()},
                {"global_minimum_frequency", global_minimum_frequency(r.samples)}};
    if (!recs.empty()) {
        doc["lowest_energy"] = recs.front().energy;
        u64 hits = 0;
        for (const auto& rec : recs)
            if (rec.energy == recs.front().energy) hits += rec.occurrences;
        doc["lowest_energy_reads"] = hits;
        if (r.has_factor_bits) {
            const auto d = decode_sample(recs.front().assignment, r.encoding);
            doc["lowest_energy_factors"] = {d.p, d.q};
        }
    }
    if (r.spec.sampler == SamplerKind::Exhaustive) doc["exhaustive_minimisers"] = r.exhaustive_minimisers;
    if (r.spec.n != 0 && r.has_factor_bits) doc["success_frequency"] = success_frequency(r.samples, r.encoding, r.spec.n);
    return dump(doc);
}

std::vector<std::filesystem::path> emit_results(const SolveResult& r, const std::filesystem::path& dir,
                                                OutputFormat format) {
    if (r.samples.records.empty()) fail(ErrorCode::InvalidArgument, "emit_results: no samples");
    ensure_dir(dir);
    std::vector<std::filesystem::path> written;
    if (format == OutputFormat::Csv) {
        written.push_back(dir / "samples.csv");
        write_file(written.back(), samples_csv(r));
    }
    written.push_back(dir / "summary.json");
    write_file(written.back(), summary_document(r));
    return written;
}

std::vector<std::filesystem::path> emit_results(const FitResult& r, const std::filesystem::path& dir,
                                                OutputFormat format) {
    if (r.points.empty()) fail(ErrorCode::InvalidArgument, "emit_results: no points");
    ensure_dir(dir);
    std::vector<std::filesystem::path> written;
    if (format == OutputFormat::Csv) {
        std::vector<std::pair<double, double>> data, line;
        for (const auto& p : r.points) {
            data.emplace_back(p.l, p.median);
            if (p.median > 0) line.emplace_back(p.l, std::exp2(r.fit.exponent * p.l + r.fit.intercept));
        }
        written.push_back(dir / "fit_points.dat");
        write_file(written.back(), plot_data(data));
        written.push_back(dir / "fit_line.dat");
        write_file(written.back(), plot_data(line));
    }
    written.push_back(dir / "summary.json");
    write_file(written.back(), summary_document(r));
    return written;
}

void SolveSpec::validate() const {
    if (reads == 0) fail(ErrorCode::InvalidArgument, "solve: reads must be >= 1");
    if (sampler == SamplerKind::Sa) schedule.validate();
    if (sampler == SamplerKind::Remote && endpoint.empty())
        fail(ErrorCode::InvalidArgument, "solve: the remote sampler needs an endpoint");
}

SolveResult solve_model(const QuboModel& model, const SolveSpec& spec, unsigned threads) {
    spec.validate();
    SolveResult r;
    r.spec = spec;
    r.encoding = FactorEncoding::from_roles(model);
    r.has_factor_bits = !r.encoding.p_vars.empty() && !r.encoding.q_vars.empty();
    switch (spec.sampler) {
        case SamplerKind::Sa: r.samples = sample_sa(model, spec.schedule, spec.reads, spec.seed, threads); break;
        case SamplerKind::Exhaustive: {
            u64 total = 0;
            r.samples = exhaustive_samples(model, spec.reads, threads, &total);
            r.exhaustive_minimisers = total;
            break;
        }
        case SamplerKind::Remote:
            r.samples = remote_sample(spec.endpoint, model, spec.reads, {{"seed", std::to_string(spec.seed)}});
            break;
    }
    return r;
}

FitResult run_fit(const std::vector<ScalingPoint>& points) {
    FitResult r;
    r.points = points;
    r.fit = fit_scaling(points);
    return r;
}

std::vector<std::filesystem::path> emit_results(const ShorSweepResult& r, const std::filesystem::path& dir,
                                                OutputFormat format) {
    if (r.rows.empty()) fail(ErrorCode::InvalidArgument, "emit_results: no rows");
    ensure_dir(dir);
    std::vector<std::filesystem::path> written;
    auto put = [&](const char* name, const std::string& content) {
        written.push_back(dir / name);
        write_file(written.back(), content);
    };
    if (format == OutputFormat::Csv) {
        put("shor_sweep_problems.csv", shor_problems_csv(r.problems));
        std::string rows = join_header(kShorRowColumns);
        for (const auto& row : r.rows)
            rows += format_double(row.delta) + "," + std::to_string(row.problems) + "," +
                    format_double(row.shor.mean) + "," + format_double(row.shor.stderr_mean) + "," +
                    format_double(row.shor_or_lucky.mean) + "," + format_double(row.shor_or_lucky.stderr_mean) + "," +
                    format_double(row.extended.mean) + "," + format_double(row.extended.stderr_mean) + "," +
                    format_double(row.peak.mean) + "," + format_double(row.peak.stderr_mean) + "," +
                    std::to_string(row.rejected_bases) + "\n";
        put("shor_sweep.csv", rows);
        auto curve = [&](const char* name, auto pick) {
            std::vector<std::pair<double, double>> pts;
            for (const auto& row : r.rows) pts.emplace_back(row.delta, pick(row).mean);
            put(name, plot_data(pts));
        };
        curve("shor_sweep_shor.dat", [](const ShorSweepRow& x) { return x.shor; });
        curve("shor_sweep_shor_lucky.dat", [](const ShorSweepRow& x) { return x.shor_or_lucky; });
        curve("shor_sweep_extended.dat", [](const ShorSweepRow& x) { return x.extended; });
        curve("shor_sweep_peak.dat", [](const ShorSweepRow& x) { return x.peak; });
    }
    put("summary.json", summary_document(r));
    return written;
}

std::vector<std::filesystem::path> emit_results(const ShorRunResult& r, const std::filesystem::path& dir,
                                                OutputFormat format) {
    if (r.shots.empty()) fail(ErrorCode::InvalidArgument, "emit_results: no shots");
    ensure_dir(dir);
    std::vector<std::filesystem::path> written;
    auto put = [&](const char* name, const std::string& content) {
        written.push_back(dir / name);
        write_file(written.back(), content);
    };
    if (format == OutputFormat::Csv) {
        std::string out = join_header(kShotColumns);
        std::vector<std::pair<double, double>> hist;
        std::map<u64, unsigned> counts;
        for (const auto& s : r.shots) {
            out += std::to_string(s.shot) + "," + std::to_string(s.j) + "," + s.bits + "," + std::to_string(s.shor) +
                   "," + std::to_string(s.lucky) + "," + std::to_string(s.extended) + "," + std::to_string(s.peak) +
                   "," + std::to_string(s.factor) + "," + std::to_string(s.r_basic) + "\n";
            ++counts[s.j];
        }
        put("shor_run_shots.csv", out);
        for (auto [j, c] : counts)
            hist.emplace_back(static_cast<double>(j), c / static_cast<double>(r.shots.size()));
        put("shor_run_outcomes.dat", plot_data(hist));
    }
    put("summary.json", summary_document(r));
    return written;
}

std::vector<std::filesystem::path> emit_results(const AnnealBenchResult& r, const std::filesystem::path& dir,
                                                OutputFormat format) {
    if (r.problems.empty()) fail(ErrorCode::InvalidArgument, "emit_results: no problems");
    ensure_dir(dir);
    std::vector<std::filesystem::path> written;
    auto put = [&](const char* name, const std::string& content) {
        written.push_back(dir / name);
        write_file(written.back(), content);
    };
    if (format == OutputFormat::Csv) {
        put("anneal_problems.csv", anneal_problems_csv(r.problems));
        std::string levels = join_header(kLevelColumns);
        for (const auto& lv : r.levels)
            levels += std::to_string(lv.l) + "," + std::to_string(lv.problems) + "," +
                      format_double(lv.success_median) + "," + format_double(lv.success_p25) + "," +
                      format_double(lv.success_p75) + "," + format_double(lv.global_minimum_median) + "," +
                      format_double(lv.baseline) + "\n";
        put("anneal_levels.csv", levels);
        auto curve = [&](const char* name, auto pick) {
            std::vector<std::pair<double, double>> pts;
            for (const auto& lv : r.levels)
                if (lv.problems > 0) pts.emplace_back(lv.l, pick(lv));
            put(name, plot_data(pts));
        };
        curve("anneal_success_median.dat", [](const LevelSummary& x) { return x.success_median; });
        curve("anneal_success_p25.dat", [](const LevelSummary& x) { return x.success_p25; });
        curve("anneal_success_p75.dat", [](const LevelSummary& x) { return x.success_p75; });
        curve("anneal_global_minimum_median.dat", [](const LevelSummary& x) { return x.global_minimum_median; });
        curve("anneal_baseline.dat", [](const LevelSummary& x) { return x.baseline; });
    }
    put("summary.json", summary_document(r));
    return written;
}

// ---------------------------------------------------------------------------
// Spec parsing

AnnealSchedule parse_anneal_schedule(const std::string& text) {
    AnnealSchedule s;
    Fields f(text, "schedule");
    f.get("sweeps", s.sweeps);
    f.get("beta_start", s.beta_start);
    f.get("beta_end", s.beta_end);
    f.get("scale_beta_start", s.scale_beta_start);
    f.finish();
    return s;
}

ShorSweepSpec parse_shor_sweep_spec(const std::string& text) {
    ShorSweepSpec s;
    Fields f(text, "shor sweep config");
    f.get("L", s.L);
    f.get("delta_grid", s.delta_grid);
    f.get("problems_per_delta", s.problems_per_delta);
    f.get("shots_per_problem", s.shots_per_problem);
    f.get("t", s.t);
    f.get("c_max", s.c_max);
    f.get("max_qubits", s.max_qubits);
    f.get("seed", s.seed);
    f.finish();
    return s;
}

ShorRunSpec parse_shor_run_spec(const std::string& text) {
    ShorRunSpec s;
    Fields f(text, "shor run config");
    f.get("p", s.p);
    f.get("q", s.q);
    f.get("L", s.L);
    f.get("a", s.a);
    f.get("t", s.t);
    f.get("delta", s.delta);
    f.get("shots", s.shots);
    f.get("c_max", s.c_max);
    f.get("max_qubits", s.max_qubits);
    f.get("seed", s.seed);
    f.finish();
    return s;
}

AnnealBenchSpec parse_anneal_bench_spec(const std::string& text) {
    AnnealBenchSpec s;
    Fields f(text, "anneal bench config");
    std::string method, sampler;
    f.get("method", method);
    if (!method.empty()) s.method = parse_method(method);
    f.get("l_values", s.l_values);
    f.get("semiprimes_per_l", s.semiprimes_per_l);
    f.get("reads_per_problem", s.reads_per_problem);
    f.get("sampler", sampler);
    if (!sampler.empty()) s.sampler = parse_sampler(sampler);
    if (auto sched = f.raw("schedule"); !sched.empty()) s.schedule = parse_anneal_schedule(sched);
    f.get("endpoint", s.endpoint);
    f.get("pegasus_m", s.pegasus_m);
    f.get("sweep_split", s.sweep_split);
    f.get("seed", s.seed);
    f.finish();
    return s;
}

SolveSpec parse_solve_spec(const std::string& text) {
    SolveSpec s;
    Fields f(text, "solve config");
    std::string sampler;
    f.get("sampler", sampler);
    if (!sampler.empty()) s.sampler = parse_sampler(sampler);
    f.get("reads", s.reads);
    if (auto sched = f.raw("schedule"); !sched.empty()) s.schedule = parse_anneal_schedule(sched);
    f.get("endpoint", s.endpoint);
    f.get("n", s.n);
    f.get("seed", s.seed);
    f.finish();
    return s;
}

}  // namespace qfactor
