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


#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qfactor/error.hpp"
#include "qfactor/harness.hpp"
#include "qfactor/loopback.hpp"

using namespace qfactor;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("qfactor_harness_" + name);
    fs::remove_all(dir);
    return dir;
}

ShorSweepSpec small_sweep() {
    ShorSweepSpec s;
    s.L = 7;
    s.delta_grid = {0.0, 1.2};
    s.problems_per_delta = 6;
    s.shots_per_problem = 10;
    s.seed = 11;
    return s;
}

}  // namespace

TEST_CASE("semiprimes of an exact bit length") {
    for (unsigned L = 5; L <= 40; ++L) {
        const auto s = semiprime_with_bits(L, 1000 + L);
        CHECK(s.bit_length_n == L);
        CHECK(s.p * s.q == s.n);
        CHECK(s.l_p + s.l_q == L + 1);
    }
    CHECK(semiprime_with_bits(19, 5) == semiprime_with_bits(19, 5));
    CHECK_THROWS_AS(semiprime_with_bits(4, 1), Error);
}

TEST_CASE("mean and unbiased standard error") {
    const auto c = category_stats({0.0, 1.0});
    CHECK(c.mean == doctest::Approx(0.5));
    CHECK(c.stderr_mean == doctest::Approx(0.5));
    const auto d = category_stats({0.2, 0.4, 0.6, 0.8});
    CHECK(d.mean == doctest::Approx(0.5));
    CHECK(d.stderr_mean == doctest::Approx(std::sqrt((0.09 + 0.01 + 0.01 + 0.09) / 3 / 4)));
    CHECK(category_stats({0.3}).stderr_mean == 0);
}

TEST_CASE("shor sweep structure") {
    const auto spec = small_sweep();
    const auto r = run_shor_sweep(spec, 1);
    REQUIRE(r.rows.size() == 2);
    REQUIRE(r.problems.size() == 12);
    for (const auto& row : r.rows) {
        CHECK(row.problems == 6);
        CHECK(row.extended.mean >= row.shor_or_lucky.mean);
        CHECK(row.shor_or_lucky.mean >= row.shor.mean);
    }
    for (const auto& p : r.problems) {
        CHECK(p.shor <= p.shor_or_lucky);
        CHECK(p.shor_or_lucky <= p.extended);
        CHECK(p.shots == 10);
        CHECK(p.p * p.q == p.n);
        CHECK(p.n >= 64);
        CHECK(p.n < 128);
    }
    // Paired design: same semiprime and base at every delta.
    for (unsigned k = 0; k < 6; ++k) {
        CHECK(r.problems[k].n == r.problems[6 + k].n);
        CHECK(r.problems[k].a == r.problems[6 + k].a);
        CHECK(r.problems[k].delta == 0.0);
        CHECK(r.problems[6 + k].delta == 1.2);
    }
}

TEST_CASE("shor sweep is deterministic and thread invariant") {
    const auto spec = small_sweep();
    const auto a = run_shor_sweep(spec, 1);
    const auto b = run_shor_sweep(spec, 3);
    CHECK(a.problems == b.problems);
    CHECK(a.rows == b.rows);
    auto other = spec;
    other.seed = 12;
    CHECK(run_shor_sweep(other, 1).problems != a.problems);
}

TEST_CASE("shor sweep validation") {
    auto s = small_sweep();
    s.delta_grid = {};
    CHECK_THROWS_AS(run_shor_sweep(s), Error);
    s = small_sweep();
    s.delta_grid = {-0.1};
    CHECK_THROWS_AS(run_shor_sweep(s), Error);
    s = small_sweep();
    s.shots_per_problem = 0;
    CHECK_THROWS_AS(run_shor_sweep(s), Error);
    s = small_sweep();
    s.L = 30;
    try {
        run_shor_sweep(s);
        FAIL("expected a capacity error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Capacity);
    }
}

TEST_CASE("single shor problem") {
    ShorRunSpec spec;
    spec.p = 5;
    spec.q = 7;
    spec.a = 2;
    spec.shots = 40;
    spec.seed = 3;
    const auto r = run_shor_problem(spec, 2);
    CHECK(r.semiprime.n == 35);
    CHECK(r.order == 12);
    CHECK(r.t == 12);
    REQUIRE(r.shots.size() == 40);
    unsigned found = 0;
    for (const auto& s : r.shots) {
        REQUIRE(s.bits.size() == 12);
        u64 j = 0;
        for (std::size_t k = 0; k < s.bits.size(); ++k) j |= u64(s.bits[k] == '1') << k;
        CHECK(j == s.j);
        if (s.factor) {
            CHECK(35 % s.factor == 0);
            ++found;
        }
        CHECK(!(s.shor && s.lucky));
    }
    CHECK(found > 0);
    CHECK(run_shor_problem(spec, 1).shots.size() == 40);

    spec.a = 7;
    try {
        run_shor_problem(spec);
        FAIL("expected a precondition error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Precondition);
    }
    spec.a = 0;
    spec.p = spec.q = 0;
    spec.L = 9;
    const auto drawn = run_shor_problem(spec);
    CHECK(drawn.semiprime.bit_length_n == 9);
    CHECK(drawn.a >= 2);
}

TEST_CASE("percentiles interpolate linearly") {
    CHECK(percentile({4, 1, 3, 2}, 0.5) == doctest::Approx(2.5));
    CHECK(percentile({4, 1, 3, 2}, 0.25) == doctest::Approx(1.75));
    CHECK(percentile({4, 1, 3, 2}, 0.75) == doctest::Approx(3.25));
    CHECK(percentile({7}, 0.25) == 7);
    CHECK(percentile({1, 2, 3}, 0.0) == 1);
    CHECK(percentile({1, 2, 3}, 1.0) == 3);
    CHECK_THROWS_AS(percentile({}, 0.5), Error);
}

TEST_CASE("fit recovers planted exponents") {
    for (double b : {-0.5, -1.0, -1.1}) {
        std::vector<ScalingPoint> pts;
        for (int l = 4; l <= 20; ++l) pts.push_back({double(l), std::exp2(b * l)});
        const auto fit = fit_scaling(pts);
        CHECK(std::abs(fit.exponent - b) <= 1e-9);
        CHECK(std::abs(fit.intercept) <= 1e-9);
        CHECK(fit.residual_norm <= 1e-9);
        CHECK(fit.used.size() == 17);
    }
    const auto shifted = fit_scaling({{4, std::exp2(-2.0 + 3)}, {8, std::exp2(-4.0 + 3)}});
    CHECK(shifted.exponent == doctest::Approx(-0.5));
    CHECK(shifted.intercept == doctest::Approx(3.0));
}

TEST_CASE("fit excludes zero medians") {
    const auto fit = fit_scaling({{4, 0.25}, {6, 0.0}, {8, 1.0 / 64}});
    CHECK(fit.exponent == doctest::Approx(-1.0));
    CHECK(fit.used == std::vector<unsigned>{4, 8});
    CHECK(fit.excluded == std::vector<unsigned>{6});
    CHECK_THROWS_AS(fit_scaling({{4, 0.25}, {6, 0.0}}), Error);
    CHECK_THROWS_AS(fit_scaling({{4, 0.25}, {4, 0.5}}), Error);
    CHECK_THROWS_AS(fit_scaling({{4, -0.1}, {6, 0.5}}), Error);
}

TEST_CASE("unknown bit splits") {
    using V = std::vector<std::pair<unsigned, unsigned>>;
    CHECK(unknown_bit_splits(7, false) == V{{3, 4}});
    CHECK(unknown_bit_splits(7, true) == V{{3, 4}, {2, 5}, {1, 6}});
    CHECK(unknown_bit_splits(2, true) == V{{1, 1}});
    CHECK_THROWS_AS(unknown_bit_splits(1, false), Error);
}

TEST_CASE("exhaustive benchmark at l = 2 always factors") {
    for (Method m : {Method::Direct, Method::Mc, Method::Cfa}) {
        AnnealBenchSpec spec;
        spec.method = m;
        spec.l_values = {2};
        spec.semiprimes_per_l = 5;
        spec.reads_per_problem = 100;
        spec.sampler = SamplerKind::Exhaustive;
        const auto r = run_anneal_benchmark(spec, 1);
        REQUIRE(r.problems.size() == 5);
        for (const auto& p : r.problems) {
            CHECK(p.error.empty());
            CHECK(p.success == 1.0);
            CHECK(p.global_minimum == 1.0);
            CHECK(p.reads == 100);
            CHECK(p.l_p == 3);
            CHECK(p.l_q == 3);
        }
        REQUIRE(r.levels.size() == 1);
        CHECK(r.levels[0].success_median == 1.0);
        CHECK(r.levels[0].baseline == 0.25);
        CHECK_FALSE(r.fit.has_value());
    }
}

TEST_CASE("SA benchmark frequencies") {
    AnnealBenchSpec spec;
    spec.l_values = {4, 6};
    spec.semiprimes_per_l = 4;
    spec.reads_per_problem = 200;
    spec.schedule.sweeps = 200;
    spec.seed = 9;
    const auto r = run_anneal_benchmark(spec, 1);
    REQUIRE(r.problems.size() == 8);
    for (const auto& p : r.problems) {
        CHECK(p.error.empty());
        CHECK(p.global_minimum >= 0);
        CHECK(p.global_minimum <= p.success);
        CHECK(p.success <= 1);
        CHECK(p.qubits == 0);
    }
    for (const auto& lv : r.levels) {
        CHECK(lv.success_p25 <= lv.success_median);
        CHECK(lv.success_median <= lv.success_p75);
    }
    CHECK(run_anneal_benchmark(spec, 2).problems == r.problems);
}

TEST_CASE("embedded benchmark reports chain breaks") {
    AnnealBenchSpec spec;
    spec.l_values = {4};
    spec.semiprimes_per_l = 2;
    spec.reads_per_problem = 100;
    spec.schedule.sweeps = 200;
    spec.pegasus_m = 4;
    const auto r = run_anneal_benchmark(spec, 1);
    for (const auto& p : r.problems) {
        CHECK(p.error.empty());
        CHECK(p.qubits >= p.variables);
        CHECK(p.broken_fraction >= 0);
        CHECK(p.broken_fraction <= 1);
        CHECK(p.global_minimum <= p.success);
    }
    spec.method = Method::Cfa;
    spec.pegasus_m = 6;
    for (const auto& p : run_anneal_benchmark(spec, 1).problems) {
        CHECK(p.error.empty());
        CHECK(p.qubits >= p.variables);
    }
}

TEST_CASE("split sweep walks until a read factors N") {
    AnnealBenchSpec spec;
    spec.l_values = {6};
    spec.semiprimes_per_l = 6;
    spec.reads_per_problem = 50;
    spec.sampler = SamplerKind::Exhaustive;
    spec.sweep_split = true;
    for (const auto& p : run_anneal_benchmark(spec, 1).problems) {
        CHECK(p.success == 1.0);
        CHECK(p.l_p + p.l_q == 10);
        CHECK(p.splits_tried == (p.l_p == 5 ? 1u : p.l_p == 4 ? 2u : 3u));
    }
}

TEST_CASE("remote benchmark against the loopback server") {
    LoopbackServer server;
    server.start();
    AnnealBenchSpec spec;
    spec.l_values = {2, 4};
    spec.semiprimes_per_l = 2;
    spec.reads_per_problem = 20;
    spec.sampler = SamplerKind::Remote;
    spec.endpoint = server.endpoint();
    const auto r = run_anneal_benchmark(spec, 1);
    for (const auto& p : r.problems) {
        CHECK(p.error.empty());
        CHECK(p.success == 1.0);
    }
    server.stop();
}

TEST_CASE("per-problem failures are recorded, not thrown") {
    AnnealBenchSpec spec;
    spec.l_values = {2};
    spec.semiprimes_per_l = 2;
    spec.reads_per_problem = 10;
    spec.sampler = SamplerKind::Remote;
    spec.endpoint = "http://127.0.0.1:1";
    const auto r = run_anneal_benchmark(spec, 1);
    REQUIRE(r.problems.size() == 2);
    for (const auto& p : r.problems) CHECK_FALSE(p.error.empty());
    CHECK(r.levels[0].problems == 0);

    spec.endpoint.clear();
    CHECK_THROWS_AS(run_anneal_benchmark(spec), Error);
}

TEST_CASE("CSV round trips") {
    std::vector<AnnealProblemRow> rows(3);
    rows[0] = {4, 0, 4, 4, 1, 143, 11, 13, 12, 0, 10000, 0.1, 1.0 / 3, 0.0, ""};
    rows[1] = {6, 1, 5, 5, 2, 667, 23, 29, 30, 77, 9999, 0.0037, 1e-300, 0.123456789012345, "bad, \"quoted\"\nline"};
    rows[2] = {8, 2, 6, 6, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, "x"};
    CHECK(parse_anneal_problems_csv(anneal_problems_csv(rows)) == rows);

    const auto sweep = run_shor_sweep(small_sweep(), 1);
    CHECK(parse_shor_problems_csv(shor_problems_csv(sweep.problems)) == sweep.problems);

    CHECK_THROWS_AS(parse_anneal_problems_csv("l,index\n1,2\n"), Error);
    CHECK_THROWS_AS(parse_shor_problems_csv(shor_problems_csv({}) + "1,2\n"), Error);
}

TEST_CASE("plot data and scaling points") {
    CHECK(plot_data({{8, 0.5}, {4, 0.25}, {6, 1}}) == "4 0.25\n6 1\n8 0.5\n");
    const auto pts = parse_scaling_points("l,median\n# comment\n4, 0.25\n\n6 0.125 # trailing\n");
    REQUIRE(pts.size() == 2);
    CHECK(pts[1].l == 6);
    CHECK(pts[1].median == 0.125);
    CHECK_THROWS_AS(parse_scaling_points("4 0.1\nfoo bar\n"), Error);
    CHECK_THROWS_AS(parse_scaling_points("4 0.1 7\n"), Error);
}

TEST_CASE("emitted files") {
    const auto sweep = run_shor_sweep(small_sweep(), 1);
    const auto dir = scratch_dir("sweep");
    const auto files = emit_results(sweep, dir, OutputFormat::Csv);
    CHECK(files.size() == 7);
    for (const auto& f : files) CHECK(fs::exists(f));
    const std::string summary = slurp(dir / "summary.json");
    CHECK(summary.find("\"seed\": 11") != std::string::npos);
    CHECK(summary.find("\"delta\": 1.2") != std::string::npos);
    CHECK(summary.find("\"delta\": 0.0") != std::string::npos);
    CHECK(parse_shor_problems_csv(slurp(dir / "shor_sweep_problems.csv")) == sweep.problems);
    CHECK(slurp(dir / "shor_sweep_shor.dat").rfind("0 ", 0) == 0);

    // Byte-stable rerun.
    const auto again = scratch_dir("sweep2");
    emit_results(run_shor_sweep(small_sweep(), 2), again, OutputFormat::Csv);
    for (const auto& f : files) CHECK(slurp(f) == slurp(again / f.filename()));

    const auto only = scratch_dir("summary");
    const auto s = emit_results(sweep, only, OutputFormat::Summary);
    REQUIRE(s.size() == 1);
    CHECK(s[0].filename() == "summary.json");
    CHECK(std::distance(fs::directory_iterator(only), fs::directory_iterator()) == 1);

    AnnealBenchSpec spec;
    spec.l_values = {2, 4};
    spec.semiprimes_per_l = 3;
    spec.reads_per_problem = 30;
    spec.sampler = SamplerKind::Exhaustive;
    spec.seed = 77;
    const auto bench = run_anneal_benchmark(spec, 1);
    const auto bdir = scratch_dir("bench");
    emit_results(bench, bdir, OutputFormat::Csv);
    const std::string bs = slurp(bdir / "summary.json");
    CHECK(bs.find("\"seed\": 77") != std::string::npos);
    CHECK(bs.find("\"l\": 2") != std::string::npos);
    CHECK(bs.find("\"l\": 4") != std::string::npos);
    CHECK(parse_anneal_problems_csv(slurp(bdir / "anneal_problems.csv")) == bench.problems);

    for (const auto& d : {dir, again, only, bdir}) fs::remove_all(d);
    CHECK_THROWS_AS(emit_results(ShorSweepResult{}, scratch_dir("empty"), OutputFormat::Csv), Error);
}

TEST_CASE("spec documents") {
    const auto s = parse_shor_sweep_spec(R"({"L": 11, "delta_grid": [0, 0.4], "seed": 5, "shots_per_problem": 3})");
    CHECK(s.L == 11);
    CHECK(s.delta_grid == std::vector<double>{0, 0.4});
    CHECK(s.seed == 5);
    CHECK(s.shots_per_problem == 3);
    CHECK(s.problems_per_delta == 200);

    const auto b = parse_anneal_bench_spec(
        R"({"method": "mc", "l_values": [4, 6], "sampler": "exhaustive", "schedule": {"sweeps": 10}})");
    CHECK(b.method == Method::Mc);
    CHECK(b.sampler == SamplerKind::Exhaustive);
    CHECK(b.schedule.sweeps == 10);
    CHECK(b.schedule.beta_end == 10.0);
    CHECK(b.reads_per_problem == 10000);

    const auto r = parse_shor_run_spec(R"({"p": 5, "q": 7, "delta": 0.5})");
    CHECK(r.p == 5);
    CHECK(r.delta == 0.5);

    for (const char* bad : {"[1]", "{\"L\": -3}", "{\"L\": 1.5}", "{\"bogus\": 1}", "{\"delta_grid\": 0}", "{"}) {
        try {
            parse_shor_sweep_spec(bad);
            FAIL("accepted " << bad);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Parse);
        }
    }
    CHECK_THROWS_AS(parse_anneal_bench_spec(R"({"sampler": "qpu"})"), Error);
    CHECK_THROWS_AS(parse_anneal_bench_spec(R"({"schedule": {"sweep": 3}})"), Error);
}

TEST_CASE("solving a single model") {
    const auto built = build_model(Method::Direct, 143, 4, 4);
    SolveSpec spec;
    spec.sampler = SamplerKind::Exhaustive;
    spec.reads = 10;
    spec.n = 143;
    const auto ex = solve_model(built.model, spec, 1);
    CHECK(ex.has_factor_bits);
    CHECK(ex.exhaustive_minimisers == 2);
    CHECK(ex.samples.num_reads() == 10);
    CHECK(success_frequency(ex.samples, ex.encoding, 143) == 1.0);
    const std::string csv = samples_csv(ex);
    CHECK(csv.rfind("energy,occurrences,p,q,assignment\n", 0) == 0);
    CHECK(csv.find("0,5,11,13,") != std::string::npos);
    CHECK(csv.find("0,5,13,11,") != std::string::npos);
    CHECK(summary_document(ex).find("\"success_frequency\": 1.0") != std::string::npos);

    spec.sampler = SamplerKind::Sa;
    spec.reads = 50;
    spec.schedule.sweeps = 100;
    CHECK(solve_model(built.model, spec, 1).samples == solve_model(built.model, spec, 2).samples);

    QuboModel plain;
    plain.add_variable({RoleKind::Reduction, 1, 1});
    plain.add_linear(0, -1);
    const auto p = solve_model(plain, spec, 1);
    CHECK_FALSE(p.has_factor_bits);
    CHECK(samples_csv(p).find("-1,50,,,1\n") != std::string::npos);

    const auto back = parse_solve_spec(R"({"sampler": "exhaustive", "reads": 7, "n": 143})");
    CHECK(back.sampler == SamplerKind::Exhaustive);
    CHECK(back.reads == 7);
    spec.reads = 0;
    CHECK_THROWS_AS(solve_model(plain, spec), Error);
}

TEST_CASE("fit results emit the fitted line") {
    const auto r = run_fit({{8, 1.0 / 256}, {4, 1.0 / 16}, {6, 0.0}});
    CHECK(r.fit.exponent == doctest::Approx(-1.0));
    const auto dir = scratch_dir("fit");
    emit_results(r, dir, OutputFormat::Csv);
    CHECK(slurp(dir / "fit_points.dat") == "4 0.0625\n6 0\n8 0.00390625\n");
    CHECK(slurp(dir / "fit_line.dat").rfind("4 0.0625", 0) == 0);
    CHECK(slurp(dir / "summary.json").find("\"excluded_zero_median_l\": [\n      6") != std::string::npos);
    fs::remove_all(dir);
}
