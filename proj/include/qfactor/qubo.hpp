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
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qfactor/numtheory.hpp"

namespace qfactor {

using coeff_t = std::int64_t;

enum class RoleKind : std::uint8_t { FactorP, FactorQ, Reduction, And, Sum, Carry };

//! What a binary variable stands for. For factor bits `i` is the bit
//! position (1-based, p_i has weight 2^i). Ancillas carry builder-specific
//! coordinates: (i, k) of the product p_i q_k for reduction/and ancillas,
//! (column, ordinal) for MC sum/carry bits, (row, column) of the CFA tile.
struct VariableRole {
    RoleKind kind = RoleKind::FactorP;
    std::uint32_t i = 0;
    std::uint32_t k = 0;

    bool is_factor_bit() const noexcept { return kind == RoleKind::FactorP || kind == RoleKind::FactorQ; }
    std::string to_string() const;
    static VariableRole parse(const std::string& text);

    friend bool operator==(const VariableRole&, const VariableRole&) = default;
};

//! E(x) = offset + sum_i a_i x_i + sum_{i<j} b_ij x_i x_j over x in {0,1}^n
//! with integer coefficients. Zero-valued entries are never stored.
class QuboModel {
  public:
    using Pair = std::pair<std::uint32_t, std::uint32_t>;

    QuboModel() = default;

    std::size_t num_vars() const noexcept { return linear_.size(); }
    std::uint32_t add_variable(VariableRole role);

    void add_offset(coeff_t v);
    void add_linear(std::size_t i, coeff_t v);
    //! i == j folds into the linear term (x^2 = x); order of i, j is irrelevant.
    void add_quadratic(std::size_t i, std::size_t j, coeff_t v);

    coeff_t offset() const noexcept { return offset_; }
    coeff_t linear(std::size_t i) const { return linear_.at(i); }
    coeff_t quadratic(std::size_t i, std::size_t j) const;
    const std::vector<coeff_t>& linear_terms() const noexcept { return linear_; }
    const std::map<Pair, coeff_t>& quadratic_terms() const noexcept { return quadratic_; }
    const std::vector<VariableRole>& roles() const noexcept { return roles_; }

    //! Exact energy; throws Overflow if the result leaves the 64-bit range.
    coeff_t evaluate(std::span<const std::uint8_t> assignment) const;
    coeff_t max_abs_coefficient() const noexcept;

    friend bool operator==(const QuboModel&, const QuboModel&) = default;

  private:
    coeff_t offset_ = 0;
    std::vector<coeff_t> linear_;
    std::map<Pair, coeff_t> quadratic_;
    std::vector<VariableRole> roles_;
};

//! constant + sum coeff * x_var
struct LinearForm {
    coeff_t constant = 0;
    std::vector<std::pair<std::uint32_t, coeff_t>> terms;
};

//! Adds weight * form^2, reduced with x^2 = x.
void add_squared(QuboModel& model, const LinearForm& form, coeff_t weight = 1);

//! x y - 2 x z - 2 y z + 3 z: zero iff z = x AND y, at least 1 otherwise.
void add_and_penalty(QuboModel& model, std::uint32_t x, std::uint32_t y, std::uint32_t z, coeff_t weight = 1);

//! Text format:
//!   # qubo n=<n> offset=<integer>
//!   # var <index> <role>
//!   <i> <j> <coefficient>      (i <= j, i == j is linear)
void write_qubo(std::ostream& out, const QuboModel& model);
QuboModel read_qubo(std::istream& in);

// ---------------------------------------------------------------------------
// Factoring encodings

//! p = 1 p_{l_p*} ... p_1 1 and q likewise; unknown bits occupy variables
//! 0 .. l_p*-1 (p_1 ..) followed by l_p* .. l-1 (q_1 ..).
struct FactorEncoding {
    unsigned l_p = 0;
    unsigned l_q = 0;
    std::vector<std::uint32_t> p_vars;  //!< p_vars[i-1] is the variable of p_i
    std::vector<std::uint32_t> q_vars;

    unsigned unknown_p() const noexcept { return l_p - 2; }
    unsigned unknown_q() const noexcept { return l_q - 2; }
    unsigned unknown_bits() const noexcept { return unknown_p() + unknown_q(); }

    //! Recovers the encoding from the factor-bit roles of a model.
    static FactorEncoding from_roles(const QuboModel& model);
};

//! Binary signal of a gate network: a model variable or a fixed bit.
struct Signal {
    bool is_const = true;
    std::uint32_t value = 0;  //!< variable index, or the bit when is_const

    static Signal constant(bool bit) { return {true, bit ? 1u : 0u}; }
    static Signal variable(std::uint32_t index) { return {false, index}; }
    friend bool operator==(const Signal&, const Signal&) = default;
};

enum class GateKind : std::uint8_t { And, HalfAdder, FullAdder };

//! Logic gate of the long-multiplication network.
//!   And:       inputs {x, y}         outputs {z}         z = x y
//!   HalfAdder: inputs {a, b}         outputs {s, c}      a + b = s + 2c
//!   FullAdder: inputs {a, b, c_in}   outputs {s, c_out}  a + b + c_in = s + 2 c_out
struct Gate {
    GateKind kind = GateKind::And;
    std::vector<Signal> inputs;
    std::vector<Signal> outputs;
    unsigned column = 0;
};

//! Controlled full adder q p + s_in + c_in = s_out + 2 c_out at row i (bit q_i)
//! and column j (bit p_j). `product` is q p: a tile-local ancilla when both
//! are variables, otherwise the signal it reduces to.
struct CfaTile {
    unsigned row = 0;
    unsigned col = 0;
    Signal q, p, s_in, c_in, s_out, c_out, product;
    bool product_is_ancilla = false;
};

struct DirectBuild {
    QuboModel model;
    FactorEncoding encoding;
    unsigned n_reduction = 0;
};

struct McBuild {
    QuboModel model;
    FactorEncoding encoding;
    std::vector<Gate> gates;
    unsigned n_and = 0, n_sum = 0, n_carry = 0;
};

struct CfaBuild {
    QuboModel model;
    FactorEncoding encoding;
    std::vector<CfaTile> tiles;  //!< row-major: row 1..l_q-1, column 0..l_p-1
    unsigned rows = 0, cols = 0;
};

DirectBuild build_direct(u64 n, unsigned l_p, unsigned l_q);
McBuild build_mc(u64 n, unsigned l_p, unsigned l_q);
CfaBuild build_cfa(u64 n, unsigned l_p, unsigned l_q);

//! Penalty of a CFA tile over its signals; a single tile with fresh
//! variables is laid out as (q, p, s_in, c_in, s_out, c_out, product).
void add_cfa_penalty(QuboModel& model, const CfaTile& tile);

//! Full assignment with ancillas set by evaluating the network forward from
//! the factor bits (those of p, q as given).
std::vector<std::uint8_t> forward_assignment(const McBuild& build, u64 p, u64 q);
std::vector<std::uint8_t> forward_assignment(const CfaBuild& build, u64 p, u64 q);
//! Reduction ancillas set to w_ik = p_i q_k.
std::vector<std::uint8_t> forward_assignment(const DirectBuild& build, u64 p, u64 q);

//! Factor bits of p and q written into an assignment of size num_vars.
void encode_factors(const FactorEncoding& enc, u64 p, u64 q, std::span<std::uint8_t> assignment);

struct DecodedFactors {
    u64 p = 0;
    u64 q = 0;
};
//! Ancillas are ignored.
DecodedFactors decode_sample(std::span<const std::uint8_t> assignment, const FactorEncoding& enc);

enum class Method { Direct, Mc, Cfa };
const char* to_string(Method m) noexcept;
Method parse_method(const std::string& text);

//! Common view over the three builders.
struct BuiltModel {
    Method method = Method::Direct;
    QuboModel model;
    FactorEncoding encoding;
};
BuiltModel build_model(Method method, u64 n, unsigned l_p, unsigned l_q);

}  // namespace qfactor
