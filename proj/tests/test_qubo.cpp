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
#include <set>
#include <sstream>

#include "qfactor/error.hpp"
#include "qfactor/qubo.hpp"

using namespace qfactor;

namespace {

struct Minima {
    coeff_t energy = 0;
    std::vector<std::vector<std::uint8_t>> states;
};

Minima enumerate(const QuboModel& m) {
    REQUIRE(m.num_vars() <= 24);
    Minima out;
    out.energy = std::numeric_limits<coeff_t>::max();
    std::vector<std::uint8_t> x(m.num_vars());
    for (u64 bits = 0; bits < (u64{1} << m.num_vars()); ++bits) {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = (bits >> i) & 1;
        const coeff_t e = m.evaluate(x);
        if (e < out.energy) {
            out.energy = e;
            out.states.clear();
        }
        if (e == out.energy) out.states.push_back(x);
    }
    return out;
}

// Enumerates a penalty over `vars` and compares the minimum over `hidden` with
// the validity predicate on the remaining variables.
template <class Valid>
void check_truth_table(const QuboModel& m, std::size_t visible, Valid valid) {
    const std::size_t n = m.num_vars();
    std::map<u64, coeff_t> best;
    std::vector<std::uint8_t> x(n);
    for (u64 bits = 0; bits < (u64{1} << n); ++bits) {
        for (std::size_t i = 0; i < n; ++i) x[i] = (bits >> i) & 1;
        const u64 key = bits & ((u64{1} << visible) - 1);
        const coeff_t e = m.evaluate(x);
        CHECK(e >= 0);
        auto it = best.find(key);
        if (it == best.end() || e < it->second) best[key] = e;
    }
    unsigned valid_rows = 0;
    for (const auto& [key, e] : best) {
        if (valid(key)) {
            CHECK(e == 0);
            ++valid_rows;
        } else {
            CHECK(e >= 1);
        }
    }
    CHECK(valid_rows > 0);
}

std::vector<std::uint8_t> planted(const BuiltModel& b, u64 p, u64 q) {
    switch (b.method) {
        case Method::Direct: return forward_assignment(build_direct(p * q, b.encoding.l_p, b.encoding.l_q), p, q);
        case Method::Mc: return forward_assignment(build_mc(p * q, b.encoding.l_p, b.encoding.l_q), p, q);
        case Method::Cfa: return forward_assignment(build_cfa(p * q, b.encoding.l_p, b.encoding.l_q), p, q);
    }
    return {};
}

}  // namespace

TEST_CASE("roles round-trip") {
    for (VariableRole r : {VariableRole{RoleKind::FactorP, 3, 0}, VariableRole{RoleKind::FactorQ, 1, 0},
                           VariableRole{RoleKind::Reduction, 2, 5}, VariableRole{RoleKind::And, 1, 1},
                           VariableRole{RoleKind::Sum, 7, 0}, VariableRole{RoleKind::Carry, 4, 2}})
        CHECK(VariableRole::parse(r.to_string()) == r);
    CHECK(VariableRole{RoleKind::Reduction, 2, 5}.to_string() == "reduction:2:5");
    CHECK_THROWS_AS(VariableRole::parse("x:1"), Error);
    CHECK_THROWS_AS(VariableRole::parse("p:1:2"), Error);
    CHECK_THROWS_AS(VariableRole::parse("and:1"), Error);
    CHECK_THROWS_AS(VariableRole::parse("sum:a:1"), Error);
}

TEST_CASE("model arithmetic and evaluation") {
    QuboModel m;
    CHECK(m.evaluate({}) == 0);
    m.add_variable({});
    m.add_linear(0, 2);
    m.add_offset(5);
    const std::vector<std::uint8_t> one{1}, zero{0};
    CHECK(m.evaluate(one) == 7);
    CHECK(m.evaluate(zero) == 5);

    m.add_variable({RoleKind::FactorQ, 1, 0});
    m.add_quadratic(1, 0, 3);
    CHECK(m.quadratic(0, 1) == 3);
    CHECK(m.quadratic_terms().begin()->first == QuboModel::Pair{0, 1});
    m.add_quadratic(0, 1, -3);
    CHECK(m.quadratic_terms().empty());
    m.add_quadratic(1, 1, 4);
    CHECK(m.linear(1) == 4);
    CHECK_THROWS_AS(m.add_linear(2, 1), Error);
    CHECK_THROWS_AS(m.evaluate(one), Error);
    m.add_linear(0, std::numeric_limits<coeff_t>::max() - 2);
    CHECK_THROWS_AS(m.add_linear(0, 1), Error);
}

TEST_CASE("text format round-trips") {
    const auto b = build_mc(3548021, 15, 8);
    std::stringstream ss;
    write_qubo(ss, b.model);
    const std::string text = ss.str();
    CHECK(text.rfind("# qubo n=" + std::to_string(b.model.num_vars()) + " offset=", 0) == 0);
    const QuboModel back = read_qubo(ss);
    CHECK(back == b.model);
    std::stringstream again;
    write_qubo(again, back);
    CHECK(again.str() == text);

    std::istringstream dup("# qubo n=2 offset=0\n# var 0 p:1\n# var 1 q:1\n0 1 3\n0 1 4\n");
    CHECK_THROWS_AS(read_qubo(dup), Error);
    std::istringstream missing("# qubo n=2 offset=0\n# var 0 p:1\n0 1 3\n");
    CHECK_THROWS_AS(read_qubo(missing), Error);
    std::istringstream lower("# qubo n=2 offset=0\n# var 0 p:1\n# var 1 q:1\n1 0 3\n");
    CHECK_THROWS_AS(read_qubo(lower), Error);
    std::istringstream header("qubo n=2\n");
    CHECK_THROWS_AS(read_qubo(header), Error);
}

TEST_CASE("gate penalties: exhaustive truth tables") {
    {
        QuboModel m;
        for (int i = 0; i < 3; ++i) m.add_variable({});
        add_and_penalty(m, 0, 1, 2);
        check_truth_table(m, 3, [](u64 k) { return ((k >> 2) & 1) == ((k & 1) & ((k >> 1) & 1)); });
        CHECK(m.evaluate(std::vector<std::uint8_t>{1, 1, 0}) == 1);
        CHECK(m.evaluate(std::vector<std::uint8_t>{0, 0, 1}) == 3);
    }
    {
        QuboModel m;  // a b s c
        for (int i = 0; i < 4; ++i) m.add_variable({});
        add_squared(m, {0, {{0, 1}, {1, 1}, {2, -1}, {3, -2}}});
        check_truth_table(m, 4, [](u64 k) {
            return (k & 1) + ((k >> 1) & 1) == ((k >> 2) & 1) + 2 * ((k >> 3) & 1);
        });
    }
    {
        QuboModel m;  // a b cin s cout
        for (int i = 0; i < 5; ++i) m.add_variable({});
        add_squared(m, {0, {{0, 1}, {1, 1}, {2, 1}, {3, -1}, {4, -2}}});
        check_truth_table(m, 5, [](u64 k) {
            return (k & 1) + ((k >> 1) & 1) + ((k >> 2) & 1) == ((k >> 3) & 1) + 2 * ((k >> 4) & 1);
        });
    }
    {
        // CFA tile: q p s_in c_in s_out c_out visible, product ancilla hidden.
        QuboModel m;
        for (int i = 0; i < 7; ++i) m.add_variable({});
        CfaTile tile;
        tile.q = Signal::variable(0);
        tile.p = Signal::variable(1);
        tile.s_in = Signal::variable(2);
        tile.c_in = Signal::variable(3);
        tile.s_out = Signal::variable(4);
        tile.c_out = Signal::variable(5);
        tile.product = Signal::variable(6);
        tile.product_is_ancilla = true;
        add_cfa_penalty(m, tile);
        unsigned valid = 0;
        auto rule = [&](u64 k) {
            auto b = [&](int i) { return static_cast<unsigned>((k >> i) & 1); };
            return b(0) * b(1) + b(2) + b(3) == b(4) + 2 * b(5);
        };
        for (u64 k = 0; k < 64; ++k) valid += rule(k);
        CHECK(valid == 16);
        check_truth_table(m, 6, rule);
    }
}

TEST_CASE("direct builder") {
    auto b = build_direct(25, 3, 3);
    CHECK(b.model.num_vars() == 3);
    CHECK(b.n_reduction == 1);
    auto mins = enumerate(b.model);
    CHECK(mins.energy == 0);
    REQUIRE(mins.states.size() == 1);
    CHECK(mins.states[0] == std::vector<std::uint8_t>{0, 0, 0});
    const auto d = decode_sample(mins.states[0], b.encoding);
    CHECK(d.p == 5);
    CHECK(d.q == 5);

    b = build_direct(35, 3, 3);
    mins = enumerate(b.model);
    CHECK(mins.energy == 0);
    std::set<std::pair<u64, u64>> decoded;
    for (const auto& s : mins.states) {
        const auto f = decode_sample(s, b.encoding);
        decoded.insert({f.p, f.q});
    }
    CHECK(decoded == std::set<std::pair<u64, u64>>{{5, 7}, {7, 5}});

    CHECK(build_direct(1042441, 10, 10).model.num_vars() == 80);
    CHECK_THROWS_AS(build_direct(26, 3, 3), Error);
    CHECK_THROWS_AS(build_direct(25, 2, 3), Error);
}

TEST_CASE("decode_sample") {
    FactorEncoding enc;
    enc.l_p = 3;
    enc.l_q = 3;
    enc.p_vars = {0};
    enc.q_vars = {1};
    CHECK(decode_sample(std::vector<std::uint8_t>{0, 0}, enc).p == 5);
    enc.l_p = 4;
    enc.p_vars = {0, 2};
    CHECK(decode_sample(std::vector<std::uint8_t>{1, 0, 1}, enc).p == 15);

    const auto b = build_direct(1042441, 10, 10);
    std::vector<std::uint8_t> x(b.model.num_vars(), 0);
    encode_factors(b.encoding, 1021, 1021, x);
    std::vector<std::uint8_t> p_bits;
    for (auto v : b.encoding.p_vars) p_bits.push_back(x[v]);
    CHECK(p_bits == std::vector<std::uint8_t>{0, 1, 1, 1, 1, 1, 1, 1});
    CHECK(decode_sample(x, b.encoding).p == 1021);
    CHECK(FactorEncoding::from_roles(b.model).p_vars == b.encoding.p_vars);
}

TEST_CASE("small instances: exhaustive minima decode to the factors") {
    for (Method method : {Method::Direct, Method::Mc, Method::Cfa}) {
        for (auto [p, q] : {std::pair<u64, u64>{5, 5}, {5, 7}, {7, 7}, {11, 13}, {11, 11}}) {
            const unsigned lp = bit_length(p), lq = bit_length(q);
            const auto b = build_model(method, p * q, lp, lq);
            if (b.model.num_vars() > 22) continue;
            const auto mins = enumerate(b.model);
            CAPTURE(to_string(method));
            CAPTURE(p * q);
            CHECK(mins.energy == 0);
            for (const auto& s : mins.states) {
                const auto f = decode_sample(s, b.encoding);
                CHECK(f.p * f.q == p * q);
            }
            CHECK(b.model.evaluate(planted(b, p, q)) == 0);
        }
    }
}

TEST_CASE("census formulas") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        const unsigned lp = 3 + rng() % 6, lq = 3 + rng() % 6;
        const auto s = random_semiprime(lp, lq, rng());
        const unsigned l = lp + lq - 4;
        const auto d = build_direct(s.n, lp, lq);
        CHECK(d.model.num_vars() == l + d.n_reduction);
        CHECK(d.n_reduction == (lp - 2) * (lq - 2));
        const auto m = build_mc(s.n, lp, lq);
        CHECK(m.model.num_vars() == l + m.n_and + m.n_sum + m.n_carry);
        CHECK(m.n_and == (lp - 2) * (lq - 2));
        unsigned roles = 0;
        for (const auto& r : m.model.roles()) roles += !r.is_factor_bit();
        CHECK(roles == m.n_and + m.n_sum + m.n_carry);
    }
}

TEST_CASE("planted assignments have zero energy") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        const unsigned l = 2 + rng() % 13;
        const unsigned lp = 2 + l / 2, lq = 2 + (l - l / 2);
        const auto s = random_semiprime(lp, lq, rng());
        for (Method method : {Method::Direct, Method::Mc, Method::Cfa}) {
            const auto b = build_model(method, s.n, lp, lq);
            CHECK(b.model.evaluate(planted(b, s.p, s.q)) == 0);
            CHECK(decode_sample(planted(b, s.p, s.q), b.encoding).p == s.p);
        }
    }
}

TEST_CASE("multiplier example: 15 x 8 bits") {
    const u64 n = 3548021;
    REQUIRE(21767ull * 163 == n);
    const auto b = build_cfa(n, 15, 8);
    CHECK(b.rows == 7);
    CHECK(b.cols == 15);
    CHECK(b.tiles.size() == 7 * 15);
    const auto x = forward_assignment(b, 21767, 163);
    CHECK(b.model.evaluate(x) == 0);
    // Every factor-bit assignment with forward ancillas: zero exactly at the answer.
    unsigned zeros = 0;
    const unsigned l = b.encoding.unknown_bits();
    for (u64 bits = 0; bits < (u64{1} << l); ++bits) {
        const u64 p = 1 | (u64{1} << 14) | ((bits & ((1u << 13) - 1)) << 1);
        const u64 q = 1 | (u64{1} << 7) | ((bits >> 13) << 1);
        const coeff_t e = b.model.evaluate(forward_assignment(b, p, q));
        if (e == 0) {
            ++zeros;
            CHECK(p == 21767);
            CHECK(q == 163);
        } else {
            CHECK(e >= 1);
        }
    }
    CHECK(zeros == 1);
}
