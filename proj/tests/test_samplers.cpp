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

#include <random>

#include "qfactor/error.hpp"
#include "qfactor/loopback.hpp"
#include "qfactor/samplers.hpp"

using namespace qfactor;

namespace {

QuboModel random_model(unsigned n, std::uint64_t seed, int range = 6) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> coeff(-range, range);
    QuboModel m;
    for (unsigned i = 0; i < n; ++i) m.add_variable({RoleKind::Reduction, i, 0});
    m.add_offset(coeff(rng));
    for (unsigned i = 0; i < n; ++i) m.add_linear(i, coeff(rng));
    for (unsigned i = 0; i < n; ++i)
        for (unsigned j = i + 1; j < n; ++j)
            if (rng() % 2) m.add_quadratic(i, j, coeff(rng));
    return m;
}

// Straight enumeration through evaluate().
ExhaustiveResult brute_force(const QuboModel& m) {
    ExhaustiveResult r;
    r.energy = std::numeric_limits<coeff_t>::max();
    std::vector<std::uint8_t> x(m.num_vars());
    for (u64 bits = 0; bits < (u64{1} << m.num_vars()); ++bits) {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = (bits >> i) & 1;
        const coeff_t e = m.evaluate(x);
        if (e < r.energy) {
            r.energy = e;
            r.minimisers.clear();
        }
        if (e == r.energy) r.minimisers.push_back(x);
    }
    r.num_minimisers = r.minimisers.size();
    return r;
}

std::vector<u64> as_patterns(const std::vector<std::vector<std::uint8_t>>& states) {
    std::vector<u64> out;
    for (const auto& s : states) {
        u64 v = 0;
        for (std::size_t i = 0; i < s.size(); ++i) v |= u64{s[i]} << i;
        out.push_back(v);
    }
    return out;
}

}  // namespace

TEST_CASE("exhaustive search matches plain enumeration") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const auto m = random_model(2 + seed % 12, seed, seed % 3 == 0 ? 1 : 6);
        const auto want = brute_force(m);
        const auto got = solve_exhaustive(m);
        CHECK(got.energy == want.energy);
        CHECK(got.num_minimisers == want.num_minimisers);
        CHECK(as_patterns(got.minimisers) == as_patterns(want.minimisers));
        CHECK(solve_exhaustive(m, 1u << 16, 1).minimisers == got.minimisers);
    }
}

TEST_CASE("exhaustive search edge cases") {
    QuboModel empty;
    empty.add_offset(7);
    auto r = solve_exhaustive(empty);
    CHECK(r.energy == 7);
    REQUIRE(r.minimisers.size() == 1);
    CHECK(r.minimisers[0].empty());

    QuboModel one;
    one.add_variable({RoleKind::Reduction, 0, 0});
    one.add_offset(3);
    one.add_linear(0, -1);
    r = solve_exhaustive(one);
    CHECK(r.energy == 2);
    CHECK(r.minimisers == std::vector<std::vector<std::uint8_t>>{{1}});

    QuboModel flat;
    for (unsigned i = 0; i < 10; ++i) flat.add_variable({RoleKind::Reduction, i, 0});
    r = solve_exhaustive(flat, 5);
    CHECK(r.num_minimisers == 1024);
    CHECK(r.minimisers.size() == 5);

    QuboModel big;
    for (unsigned i = 0; i < 31; ++i) big.add_variable({RoleKind::Reduction, i, 0});
    CHECK_THROWS_AS(solve_exhaustive(big), Error);
}

TEST_CASE("exhaustive search of the direct N=25 model") {
    const auto build = build_direct(25, 3, 3);
    const auto r = solve_exhaustive(build.model);
    CHECK(r.energy == 0);
    REQUIRE(r.num_minimisers == r.minimisers.size());
    CHECK(r.minimisers.size() == 1);  // 5 x 5 is symmetric: (p, q) and (q, p) coincide
    for (const auto& x : r.minimisers) {
        const auto f = decode_sample(x, build.encoding);
        CHECK(f.p == 5);
        CHECK(f.q == 5);
    }
    const auto r35 = solve_exhaustive(build_direct(35, 3, 3).model);
    CHECK(r35.energy == 0);
    CHECK(r35.minimisers.size() == 2);
}

TEST_CASE("sample sets merge and rescore") {
    QuboModel m;
    for (unsigned i = 0; i < 2; ++i) m.add_variable({RoleKind::Reduction, i, 0});
    m.add_linear(0, 2);
    m.add_quadratic(0, 1, -5);
    std::vector<SampleRecord> recs{{{1, 1}, 99, 2, false}, {{0, 0}, 0, 1, false}, {{1, 1}, 0, 3, true}};
    const auto s = make_sample_set(m, recs, "test", 4, "");
    REQUIRE(s.records.size() == 2);
    CHECK(s.records[0].assignment == std::vector<std::uint8_t>{1, 1});
    CHECK(s.records[0].energy == -3);
    CHECK(s.records[0].occurrences == 5);
    CHECK(s.records[0].energy_mismatch);
    CHECK(s.num_reads() == 6);
    CHECK_THROWS_AS(make_sample_set(m, {{{1}, 0, 1, false}}, "x", 0, ""), Error);
    CHECK_THROWS_AS(make_sample_set(m, {{{1, 0}, 0, 0, false}}, "x", 0, ""), Error);
}

TEST_CASE("simulated annealing finds unique minima") {
    int models = 0;
    for (std::uint64_t seed = 1; models < 5; ++seed) {
        const auto m = random_model(4 + seed % 5, seed);
        const auto exact = solve_exhaustive(m);
        if (exact.num_minimisers != 1) continue;
        ++models;
        const auto s = sample_sa(m, AnnealSchedule{}, 1000, seed);
        CHECK(s.num_reads() == 1000);
        u64 hits = 0;
        for (const auto& r : s.records)
            if (r.assignment == exact.minimisers[0]) hits += r.occurrences;
        CHECK(hits >= 990);
        for (const auto& r : s.records) CHECK(r.energy == m.evaluate(r.assignment));
    }
}

TEST_CASE("simulated annealing is deterministic and thread-count invariant") {
    const auto m = random_model(14, 9);
    AnnealSchedule sched;
    sched.sweeps = 50;
    const auto a = sample_sa(m, sched, 300, 42, 1);
    const auto b = sample_sa(m, sched, 300, 42, 4);
    const auto c = sample_sa(m, sched, 300, 42, 3);
    CHECK(a == b);
    CHECK(a == c);
    CHECK_FALSE(a == sample_sa(m, sched, 300, 43, 1));
}

TEST_CASE("frozen schedule keeps a planted local minimum") {
    const auto build = build_direct(143, 4, 4);
    const auto planted = forward_assignment(build, 11, 13);
    AnnealSchedule frozen;
    frozen.sweeps = 20;
    frozen.beta_start = frozen.beta_end = 1e9;
    const auto s = sample_sa(build.model, frozen, 10, 1, 0, planted);
    REQUIRE(s.records.size() == 1);
    CHECK(s.records[0].assignment == planted);
    CHECK(s.records[0].energy == 0);
}

TEST_CASE("anneal schedule validation") {
    AnnealSchedule s;
    s.sweeps = 0;
    CHECK_THROWS_AS(s.validate(), Error);
    s = {};
    s.beta_start = 0;
    CHECK_THROWS_AS(s.validate(), Error);
    s = {};
    s.beta_end = 0.05;
    CHECK_THROWS_AS(s.validate(), Error);
    CHECK_THROWS_AS(sample_sa(random_model(3, 1), AnnealSchedule{}, 0, 1), Error);
}

TEST_CASE("success and global-minimum frequencies") {
    const auto build = build_mc(143, 4, 4);
    const auto planted = forward_assignment(build, 11, 13);
    auto freq = [&](std::vector<SampleRecord> recs) { return make_sample_set(build.model, std::move(recs), "t", 0, ""); };

    auto all = freq({{planted, 0, 10, false}});
    CHECK(success_frequency(all, build.encoding, 143) == 1.0);
    CHECK(global_minimum_frequency(all) == 1.0);

    // Correct factor bits with one ancilla flipped: success, not a global minimum.
    auto broken = planted;
    std::size_t ancilla = 0;
    while (build.model.roles()[ancilla].is_factor_bit()) ++ancilla;
    broken[ancilla] ^= 1;
    REQUIRE(build.model.evaluate(broken) >= 1);
    auto mixed = freq({{planted, 0, 37, false}, {broken, 0, 63, false}});
    CHECK(success_frequency(mixed, build.encoding, 143) == 1.0);
    CHECK(global_minimum_frequency(mixed) == doctest::Approx(0.37));

    std::vector<std::uint8_t> zero(build.model.num_vars(), 0);
    auto wrong = freq({{zero, 0, 10, false}});
    CHECK(success_frequency(wrong, build.encoding, 143) == 0.0);
    CHECK(global_minimum_frequency(wrong) == 0.0);

    auto scale = freq({{planted, 0, 37, false}, {zero, 0, 9963, false}});
    CHECK(success_frequency(scale, build.encoding, 143) == doctest::Approx(0.0037));
    CHECK_THROWS_AS(success_frequency(SampleSet{}, build.encoding, 143), Error);
}

TEST_CASE("global minimum never exceeds success on builder models") {
    for (auto method : {Method::Direct, Method::Mc, Method::Cfa}) {
        const auto b = build_model(method, 143, 4, 4);
        AnnealSchedule sched;
        sched.sweeps = 100;
        const auto s = sample_sa(b.model, sched, 200, 3);
        CHECK(global_minimum_frequency(s) <= success_frequency(s, b.encoding, 143));
    }
}

TEST_CASE("unembedding a physical sample set") {
    const auto g = build_pegasus_ideal(4);
    const auto build = build_direct(35, 3, 3);
    const auto e = embed_heuristic(build.model, g, 3);
    const auto em = embed_model(build.model, g, e);
    const auto planted = forward_assignment(build, 5, 7);
    auto phys = spread_sample(planted, em);
    std::vector<SampleRecord> recs{{phys, 0, 4, false}};
    // Break the longest chain in a second record.
    std::size_t longest = 0;
    for (std::size_t v = 0; v < em.local.chains.size(); ++v)
        if (em.local.chains[v].size() > em.local.chains[longest].size()) longest = v;
    if (em.local.chains[longest].size() >= 2) {
        auto bent = phys;
        bent[em.local.chains[longest].front()] ^= 1;
        recs.push_back({bent, 0, 1, false});
    }
    const auto ps = make_sample_set(em.model, recs, "t", 0, "");
    const auto u = unembed_sample_set(ps, em, build.model);
    CHECK(u.logical.num_reads() == ps.num_reads());
    CHECK(u.broken_reads == ps.num_reads() - 4);
    CHECK(success_frequency(u.logical, build.encoding, 35) == 1.0);
}

TEST_CASE("wire request round-trip") {
    auto m = random_model(6, 5);
    const std::string body = encode_sample_request(m, 17, {{"label", "x"}});
    const auto req = decode_sample_request(body);
    CHECK(req.num_reads == 17);
    CHECK(req.params.at("label") == "x");
    CHECK(req.model.offset() == m.offset());
    CHECK(req.model.linear_terms() == m.linear_terms());
    CHECK(req.model.quadratic_terms() == m.quadratic_terms());
    CHECK_THROWS_AS(decode_sample_request("{"), Error);
    CHECK_THROWS_AS(decode_sample_request(R"({"n":2,"offset":0,"terms":[[1,0,3]],"num_reads":1})"), Error);
    CHECK_THROWS_AS(decode_sample_request(R"({"n":2,"offset":0.5,"terms":[],"num_reads":1})"), Error);
    CHECK_THROWS_AS(decode_sample_request(R"({"n":2,"offset":0,"terms":[],"num_reads":0})"), Error);
}

TEST_CASE("wire response validation") {
    QuboModel m;
    for (unsigned i = 0; i < 2; ++i) m.add_variable({RoleKind::Reduction, i, 0});
    m.add_linear(1, -2);
    auto decode = [&](const std::string& body) { return decode_sample_response(body, m, 3); };
    const auto ok = decode(R"({"samples":[[0,1],[1,1]],"energies":[-2,-2.0],"occurrences":[2,1]})");
    CHECK(ok.num_reads() == 3);
    CHECK(ok.num_mismatches() == 0);
    const auto flagged = decode(R"({"samples":[[0,1]],"energies":[5],"occurrences":[3]})");
    CHECK(flagged.num_mismatches() == 1);
    CHECK(flagged.records[0].energy == -2);

    auto code_of = [&](const std::string& body) {
        try {
            decode(body);
        } catch (const RemoteError& e) {
            return e.code();
        }
        return ErrorCode::InvalidArgument;
    };
    CHECK(code_of("not json") == ErrorCode::RemoteProtocol);
    CHECK(code_of("[1,2]") == ErrorCode::RemoteProtocol);
    CHECK(code_of(R"({"samples":[[0,1]],"energies":[-2]})") == ErrorCode::RemoteProtocol);
    CHECK(code_of(R"({"samples":[[0]],"energies":[0],"occurrences":[3]})") == ErrorCode::RemoteProtocol);
    CHECK(code_of(R"({"samples":[[0,3]],"energies":[0],"occurrences":[3]})") == ErrorCode::RemoteProtocol);
    CHECK(code_of(R"({"samples":[[0,1]],"energies":["x"],"occurrences":[3]})") == ErrorCode::RemoteProtocol);
    CHECK(code_of(R"({"samples":[[0,1]],"energies":[0],"occurrences":[2]})") == ErrorCode::RemoteProtocol);
    CHECK(code_of(R"({"samples":[[0,1]],"energies":[0],"occurrences":[0]})") == ErrorCode::RemoteProtocol);
    CHECK(code_of(R"({"samples":[[0,1]],"energies":[0],"occurrences":[1.5]})") == ErrorCode::RemoteProtocol);
    CHECK(code_of(R"({"samples":[],"energies":[],"occurrences":[]})") == ErrorCode::RemoteProtocol);
    CHECK(code_of(R"({"error":"too big"})") == ErrorCode::RemoteRejected);
    CHECK(code_of(R"({"error":7})") == ErrorCode::RemoteProtocol);
}

TEST_CASE("loopback server agrees with exhaustive search") {
    LoopbackServer server;
    server.start();
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const auto m = random_model(4 + 3 * seed % 17, seed);
        const auto exact = solve_exhaustive(m);
        const auto s = remote_sample(server.endpoint(), m, 25);
        CHECK(s.num_reads() == 25);
        CHECK(s.num_mismatches() == 0);
        for (const auto& r : s.records) {
            CHECK(r.energy == exact.energy);
            CHECK(std::find(exact.minimisers.begin(), exact.minimisers.end(), r.assignment) != exact.minimisers.end());
        }
    }
    QuboModel too_big;
    for (unsigned i = 0; i < 21; ++i) too_big.add_variable({RoleKind::Reduction, i, 0});
    CHECK_THROWS_AS(remote_sample(server.endpoint(), too_big, 1), RemoteError);
    server.stop();
}

TEST_CASE("loopback faults surface as typed errors") {
    const auto m = random_model(5, 2);
    using F = LoopbackServer::Fault;
    for (auto [fault, code] : {std::pair{F::NotJson, ErrorCode::RemoteProtocol},
                               std::pair{F::MissingField, ErrorCode::RemoteProtocol},
                               std::pair{F::ShortSample, ErrorCode::RemoteProtocol},
                               std::pair{F::NonBinary, ErrorCode::RemoteProtocol},
                               std::pair{F::WrongOccurrences, ErrorCode::RemoteProtocol},
                               std::pair{F::Reject, ErrorCode::RemoteRejected}}) {
        LoopbackServer server({20, fault});
        server.start();
        ErrorCode got = ErrorCode::InvalidArgument;
        try {
            remote_sample(server.endpoint(), m, 4);
        } catch (const RemoteError& e) {
            got = e.code();
        }
        CHECK(got == code);
    }
    {
        LoopbackServer server({20, F::WrongEnergy});
        server.start();
        const auto s = remote_sample(server.endpoint(), m, 4);
        CHECK(s.num_mismatches() == s.records.size());
        CHECK(s.records[0].energy == solve_exhaustive(m).energy);
    }
    {
        LoopbackServer server({20, F::Busy});
        server.start();
        const auto s = remote_sample(server.endpoint(), m, 4);
        CHECK(s.num_reads() == 4);
        CHECK(server.requests() == 2);
    }
}

TEST_CASE("unreachable endpoint") {
    int port;
    {
        LoopbackServer probe;
        probe.start();
        port = probe.port();
    }
    RemoteOptions opts;
    opts.max_attempts = 2;
    opts.retry_delay = 0.01;
    opts.connect_timeout = 0.5;
    try {
        remote_sample("http://127.0.0.1:" + std::to_string(port), random_model(3, 1), 1, {}, opts);
        FAIL("expected a connection error");
    } catch (const RemoteError& e) {
        CHECK(e.code() == ErrorCode::RemoteConnection);
        CHECK(e.retry_after().has_value());
    }
}
