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

#include "qfactor/qubo.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "qfactor/error.hpp"

namespace qfactor {

namespace {

using wide = __int128;

coeff_t narrow(wide v) {
    if (v > std::numeric_limits<coeff_t>::max() || v < std::numeric_limits<coeff_t>::min())
        fail(ErrorCode::Overflow, "QUBO coefficient exceeds the 64-bit range");
    return static_cast<coeff_t>(v);
}

coeff_t checked_add(coeff_t a, coeff_t b) {
    coeff_t out;
    if (__builtin_add_overflow(a, b, &out)) fail(ErrorCode::Overflow, "QUBO coefficient exceeds the 64-bit range");
    return out;
}

bool bit_of(u64 x, unsigned i) { return i < 64 && ((x >> i) & 1) != 0; }

const char* role_name(RoleKind kind) {
    switch (kind) {
        case RoleKind::FactorP: return "p";
        case RoleKind::FactorQ: return "q";
        case RoleKind::Reduction: return "reduction";
        case RoleKind::And: return "and";
        case RoleKind::Sum: return "sum";
        case RoleKind::Carry: return "carry";
    }
    return "?";
}

}  // namespace

// ---------------------------------------------------------------------------
// VariableRole

std::string VariableRole::to_string() const {
    std::string out = role_name(kind);
    out += ':' + std::to_string(i);
    if (!is_factor_bit()) out += ':' + std::to_string(k);
    return out;
}

VariableRole VariableRole::parse(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    auto number = [&](const std::string& s) -> std::uint32_t {
        if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
            fail(ErrorCode::Parse, "bad role index in '" + text + "'");
        return static_cast<std::uint32_t>(std::stoul(s));
    };
    if (parts.empty()) fail(ErrorCode::Parse, "empty role");
    VariableRole role;
    const std::string& name = parts[0];
    if (name == "p" || name == "q") {
        if (parts.size() != 2) fail(ErrorCode::Parse, "bad role '" + text + "'");
        role.kind = name == "p" ? RoleKind::FactorP : RoleKind::FactorQ;
        role.i = number(parts[1]);
        return role;
    }
    if (name == "reduction") role.kind = RoleKind::Reduction;
    else if (name == "and") role.kind = RoleKind::And;
    else if (name == "sum") role.kind = RoleKind::Sum;
    else if (name == "carry") role.kind = RoleKind::Carry;
    else fail(ErrorCode::Parse, "unknown role '" + text + "'");
    if (parts.size() != 3) fail(ErrorCode::Parse, "bad role '" + text + "'");
    role.i = number(parts[1]);
    role.k = number(parts[2]);
    return role;
}

// ---------------------------------------------------------------------------
// QuboModel

std::uint32_t QuboModel::add_variable(VariableRole role) {
    linear_.push_back(0);
    roles_.push_back(role);
    return static_cast<std::uint32_t>(linear_.size() - 1);
}

void QuboModel::add_offset(coeff_t v) { offset_ = checked_add(offset_, v); }

void QuboModel::add_linear(std::size_t i, coeff_t v) {
    if (i >= linear_.size()) fail(ErrorCode::InvalidArgument, "add_linear: variable out of range");
    linear_[i] = checked_add(linear_[i], v);
}

void QuboModel::add_quadratic(std::size_t i, std::size_t j, coeff_t v) {
    if (i == j) {
        add_linear(i, v);
        return;
    }
    if (i >= linear_.size() || j >= linear_.size())
        fail(ErrorCode::InvalidArgument, "add_quadratic: variable out of range");
    if (v == 0) return;
    if (i > j) std::swap(i, j);
    const Pair key{static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)};
    auto it = quadratic_.find(key);
    if (it == quadratic_.end()) {
        quadratic_.emplace(key, v);
        return;
    }
    it->second = checked_add(it->second, v);
    if (it->second == 0) quadratic_.erase(it);
}

coeff_t QuboModel::quadratic(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    auto it = quadratic_.find({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
    return it == quadratic_.end() ? 0 : it->second;
}

coeff_t QuboModel::evaluate(std::span<const std::uint8_t> x) const {
    if (x.size() != linear_.size()) fail(ErrorCode::InvalidArgument, "evaluate: assignment length mismatch");
    wide e = offset_;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i]) e += linear_[i];
    for (const auto& [key, b] : quadratic_)
        if (x[key.first] && x[key.second]) e += b;
    return narrow(e);
}

coeff_t QuboModel::max_abs_coefficient() const noexcept {
    coeff_t m = 0;
    for (coeff_t a : linear_) m = std::max(m, a < 0 ? -a : a);
    for (const auto& [key, b] : quadratic_) m = std::max(m, b < 0 ? -b : b);
    return m;
}

void add_squared(QuboModel& model, const LinearForm& form, coeff_t weight) {
    std::map<std::uint32_t, wide> merged;
    for (const auto& [var, c] : form.terms) merged[var] += c;
    std::vector<std::pair<std::uint32_t, wide>> terms;
    for (const auto& [var, c] : merged)
        if (c != 0) terms.emplace_back(var, c);
    const wide c0 = form.constant;
    const wide w = weight;
    model.add_offset(narrow(w * c0 * c0));
    for (std::size_t a = 0; a < terms.size(); ++a) {
        const wide ca = terms[a].second;
        model.add_linear(terms[a].first, narrow(w * (ca * ca + 2 * c0 * ca)));
        for (std::size_t b = a + 1; b < terms.size(); ++b)
            model.add_quadratic(terms[a].first, terms[b].first, narrow(w * 2 * ca * terms[b].second));
    }
}

void add_and_penalty(QuboModel& model, std::uint32_t x, std::uint32_t y, std::uint32_t z, coeff_t weight) {
    const wide w = weight;
    model.add_quadratic(x, y, narrow(w));
    model.add_quadratic(x, z, narrow(-2 * w));
    model.add_quadratic(y, z, narrow(-2 * w));
    model.add_linear(z, narrow(3 * w));
}

// ---------------------------------------------------------------------------
// Text format

void write_qubo(std::ostream& out, const QuboModel& model) {
    out << "# qubo n=" << model.num_vars() << " offset=" << model.offset() << '\n';
    for (std::size_t i = 0; i < model.num_vars(); ++i) out << "# var " << i << ' ' << model.roles()[i].to_string() << '\n';
    // Linear entry (i, i) sorts before every (i, j > i).
    auto quad = model.quadratic_terms().begin();
    const auto quad_end = model.quadratic_terms().end();
    for (std::size_t i = 0; i < model.num_vars(); ++i) {
        if (model.linear(i) != 0) out << i << ' ' << i << ' ' << model.linear(i) << '\n';
        for (; quad != quad_end && quad->first.first == i; ++quad)
            out << quad->first.first << ' ' << quad->first.second << ' ' << quad->second << '\n';
    }
}

QuboModel read_qubo(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    auto bad = [&](const std::string& why) {
        fail(ErrorCode::Parse, "qubo line " + std::to_string(line_no) + ": " + why);
    };
    if (!std::getline(in, line)) fail(ErrorCode::Parse, "qubo: empty input");
    ++line_no;
    std::size_t n = 0;
    long long offset = 0;
    {
        std::istringstream hs(line);
        std::string hash, tag, n_field, off_field;
        hs >> hash >> tag >> n_field >> off_field;
        if (hash != "#" || tag != "qubo" || n_field.rfind("n=", 0) != 0 || off_field.rfind("offset=", 0) != 0)
            bad("expected '# qubo n=<n> offset=<integer>'");
        try {
            std::size_t pos = 0;
            n = std::stoull(n_field.substr(2), &pos);
            if (pos != n_field.size() - 2) bad("bad n");
            offset = std::stoll(off_field.substr(7), &pos);
            if (pos != off_field.size() - 7) bad("bad offset");
        } catch (const std::logic_error&) {
            bad("bad header number");
        }
    }
    std::vector<std::optional<VariableRole>> roles(n);
    struct Term {
        std::size_t i, j;
        coeff_t c;
    };
    std::vector<Term> terms;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        if (line[0] == '#') {
            std::string hash, tag, role;
            std::size_t index = 0;
            ls >> hash >> tag;
            if (tag != "var") continue;
            if (!(ls >> index >> role)) bad("expected '# var <index> <role>'");
            if (index >= n) bad("variable index out of range");
            if (roles[index]) bad("duplicate role");
            roles[index] = VariableRole::parse(role);
            continue;
        }
        long long i = 0, j = 0, c = 0;
        std::string extra;
        if (!(ls >> i >> j >> c) || (ls >> extra)) bad("expected '<i> <j> <coefficient>'");
        if (i < 0 || j < 0 || static_cast<std::size_t>(j) >= n) bad("variable index out of range");
        if (i > j) bad("term requires i <= j");
        terms.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), static_cast<coeff_t>(c)});
    }
    QuboModel model;
    for (std::size_t i = 0; i < n; ++i) {
        if (!roles[i]) fail(ErrorCode::Parse, "qubo: missing role for variable " + std::to_string(i));
        model.add_variable(*roles[i]);
    }
    model.add_offset(offset);
    std::map<std::pair<std::size_t, std::size_t>, bool> seen;
    for (const auto& t : terms) {
        if (!seen.emplace(std::make_pair(t.i, t.j), true).second)
            fail(ErrorCode::Parse, "qubo: duplicate term " + std::to_string(t.i) + " " + std::to_string(t.j));
        model.add_quadratic(t.i, t.j, t.c);
    }
    return model;
}

// ---------------------------------------------------------------------------
// Encodings

FactorEncoding FactorEncoding::from_roles(const QuboModel& model) {
    std::map<std::uint32_t, std::uint32_t> p, q;
    for (std::uint32_t v = 0; v < model.num_vars(); ++v) {
        const auto& r = model.roles()[v];
        if (r.kind == RoleKind::FactorP) p[r.i] = v;
        if (r.kind == RoleKind::FactorQ) q[r.i] = v;
    }
    FactorEncoding enc;
    enc.l_p = static_cast<unsigned>(p.size()) + 2;
    enc.l_q = static_cast<unsigned>(q.size()) + 2;
    std::uint32_t expect = 1;
    for (const auto& [i, v] : p) {
        if (i != expect++) fail(ErrorCode::Parse, "factor bits of p are not contiguous");
        enc.p_vars.push_back(v);
    }
    expect = 1;
    for (const auto& [i, v] : q) {
        if (i != expect++) fail(ErrorCode::Parse, "factor bits of q are not contiguous");
        enc.q_vars.push_back(v);
    }
    return enc;
}

void encode_factors(const FactorEncoding& enc, u64 p, u64 q, std::span<std::uint8_t> x) {
    for (unsigned i = 1; i <= enc.unknown_p(); ++i) x[enc.p_vars[i - 1]] = bit_of(p, i);
    for (unsigned i = 1; i <= enc.unknown_q(); ++i) x[enc.q_vars[i - 1]] = bit_of(q, i);
}

DecodedFactors decode_sample(std::span<const std::uint8_t> x, const FactorEncoding& enc) {
    DecodedFactors out;
    out.p = (u64{1} << (enc.l_p - 1)) | 1;
    out.q = (u64{1} << (enc.l_q - 1)) | 1;
    for (unsigned i = 1; i <= enc.unknown_p(); ++i)
        if (x[enc.p_vars[i - 1]]) out.p |= u64{1} << i;
    for (unsigned i = 1; i <= enc.unknown_q(); ++i)
        if (x[enc.q_vars[i - 1]]) out.q |= u64{1} << i;
    return out;
}

namespace {

void check_build_args(u64 n, unsigned l_p, unsigned l_q) {
    if (l_p < 3 || l_q < 3) fail(ErrorCode::InvalidArgument, "factor bit lengths must be >= 3");
    if (n % 2 == 0 || n < 9) fail(ErrorCode::InvalidArgument, "N must be odd and composite-sized");
    if (l_p + l_q > 40) fail(ErrorCode::Overflow, "l_p + l_q too large for 64-bit coefficients");
    const unsigned bits = bit_length(n);
    if (l_p + l_q < bits || l_p + l_q > bits + 2)
        fail(ErrorCode::InvalidArgument, "l_p + l_q must lie within one of bits(N) + 1");
}

FactorEncoding add_factor_variables(QuboModel& model, unsigned l_p, unsigned l_q) {
    FactorEncoding enc;
    enc.l_p = l_p;
    enc.l_q = l_q;
    for (unsigned i = 1; i <= l_p - 2; ++i) enc.p_vars.push_back(model.add_variable({RoleKind::FactorP, i, 0}));
    for (unsigned i = 1; i <= l_q - 2; ++i) enc.q_vars.push_back(model.add_variable({RoleKind::FactorQ, i, 0}));
    return enc;
}

Signal factor_signal(const std::vector<std::uint32_t>& vars, unsigned length, unsigned i) {
    if (i == 0 || i == length - 1) return Signal::constant(true);
    return Signal::variable(vars[i - 1]);
}

void add_to_form(LinearForm& form, Signal s, coeff_t c) {
    if (s.is_const) form.constant += s.value ? c : 0;
    else form.terms.emplace_back(s.value, c);
}

std::uint8_t signal_value(Signal s, const std::vector<std::uint8_t>& x) { return s.is_const ? s.value : x[s.value]; }

}  // namespace

// ---------------------------------------------------------------------------
// Direct method: (N - p q)^2 with p_i q_k replaced by reduction ancillas.

DirectBuild build_direct(u64 n, unsigned l_p, unsigned l_q) {
    check_build_args(n, l_p, l_q);
    DirectBuild b;
    b.encoding = add_factor_variables(b.model, l_p, l_q);
    const unsigned lps = l_p - 2, lqs = l_q - 2;
    std::vector<std::uint32_t> w(lps * lqs);
    for (unsigned i = 1; i <= lps; ++i)
        for (unsigned k = 1; k <= lqs; ++k)
            w[(i - 1) * lqs + (k - 1)] = b.model.add_variable({RoleKind::Reduction, i, k});
    b.n_reduction = lps * lqs;

    const wide p0 = (wide{1} << (l_p - 1)) + 1;
    const wide q0 = (wide{1} << (l_q - 1)) + 1;
    LinearForm diff;
    diff.constant = narrow(static_cast<wide>(n) - p0 * q0);
    for (unsigned i = 1; i <= lps; ++i) diff.terms.emplace_back(b.encoding.p_vars[i - 1], narrow(-q0 * (wide{1} << i)));
    for (unsigned k = 1; k <= lqs; ++k) diff.terms.emplace_back(b.encoding.q_vars[k - 1], narrow(-p0 * (wide{1} << k)));
    for (unsigned i = 1; i <= lps; ++i)
        for (unsigned k = 1; k <= lqs; ++k)
            diff.terms.emplace_back(w[(i - 1) * lqs + (k - 1)], narrow(-(wide{1} << (i + k))));
    add_squared(b.model, diff);

    // lambda_ik = 1 + 2 max |coefficient touching w_ik| in the expanded square.
    std::vector<coeff_t> touching(b.model.num_vars(), 0);
    auto bump = [&](std::uint32_t v, coeff_t c) { touching[v] = std::max(touching[v], c < 0 ? -c : c); };
    for (std::uint32_t v = 0; v < b.model.num_vars(); ++v) bump(v, b.model.linear(v));
    for (const auto& [key, c] : b.model.quadratic_terms()) {
        bump(key.first, c);
        bump(key.second, c);
    }
    for (unsigned i = 1; i <= lps; ++i)
        for (unsigned k = 1; k <= lqs; ++k) {
            const std::uint32_t z = w[(i - 1) * lqs + (k - 1)];
            const coeff_t lambda = narrow(1 + 2 * wide{touching[z]});
            add_and_penalty(b.model, b.encoding.p_vars[i - 1], b.encoding.q_vars[k - 1], z, lambda);
        }
    return b;
}

std::vector<std::uint8_t> forward_assignment(const DirectBuild& b, u64 p, u64 q) {
    std::vector<std::uint8_t> x(b.model.num_vars(), 0);
    encode_factors(b.encoding, p, q, x);
    for (std::uint32_t v = 0; v < b.model.num_vars(); ++v) {
        const auto& r = b.model.roles()[v];
        if (r.kind == RoleKind::Reduction) x[v] = bit_of(p, r.i) && bit_of(q, r.k);
    }
    return x;
}

// ---------------------------------------------------------------------------
// Multiplication-circuit method.

namespace {

//! Gate network over symbolic variables; variables fixed to constants are
//! dropped before indices are assigned.
struct SymbolicNetwork {
    struct Var {
        VariableRole role;
        std::optional<bool> forced;
    };
    std::vector<Var> vars;
    std::vector<Gate> gates;  // Signal::value indexes `vars` for variables

    Signal fresh(VariableRole role) {
        vars.push_back({role, std::nullopt});
        return Signal::variable(static_cast<std::uint32_t>(vars.size() - 1));
    }

    void force(Signal s, bool bit) {
        if (s.is_const) {
            if (static_cast<bool>(s.value) != bit)
                fail(ErrorCode::Precondition, "N has no factorisation with the requested bit lengths");
            return;
        }
        auto& v = vars[s.value];
        if (v.forced && *v.forced != bit)
            fail(ErrorCode::Precondition, "N has no factorisation with the requested bit lengths");
        v.forced = bit;
    }
};

}  // namespace

McBuild build_mc(u64 n, unsigned l_p, unsigned l_q) {
    check_build_args(n, l_p, l_q);
    SymbolicNetwork net;
    std::vector<Signal> p_sig(l_p), q_sig(l_q);
    for (unsigned i = 0; i < l_p; ++i)
        p_sig[i] = (i == 0 || i == l_p - 1) ? Signal::constant(true) : net.fresh({RoleKind::FactorP, i, 0});
    for (unsigned k = 0; k < l_q; ++k)
        q_sig[k] = (k == 0 || k == l_q - 1) ? Signal::constant(true) : net.fresh({RoleKind::FactorQ, k, 0});

    const unsigned columns = l_p + l_q;
    std::vector<std::vector<Signal>> column(columns + 1);
    std::vector<unsigned> ones(columns + 2, 0);

    // Partial products of the long multiplication table.
    for (unsigned i = 0; i < l_p; ++i)
        for (unsigned k = 0; k < l_q; ++k) {
            const Signal x = p_sig[i], y = q_sig[k];
            if (x.is_const && y.is_const) {
                ones[i + k] += x.value & y.value;
            } else if (x.is_const) {
                column[i + k].push_back(y);
            } else if (y.is_const) {
                column[i + k].push_back(x);
            } else {
                const Signal z = net.fresh({RoleKind::And, i, k});
                net.gates.push_back({GateKind::And, {x, y}, {z}, i + k});
                column[i + k].push_back(z);
            }
        }

    // Ripple each column down to one bit, which must equal bit c of N.
    for (unsigned c = 0; c < columns; ++c) {
        ones[c + 1] += ones[c] / 2;
        std::vector<Signal> pending = column[c];
        if (ones[c] % 2) pending.push_back(Signal::constant(true));
        const bool target = bit_of(n, c);
        if (pending.empty()) {
            if (target) fail(ErrorCode::Precondition, "N has no factorisation with the requested bit lengths");
            continue;
        }
        if (pending.size() == 1) {
            net.force(pending.front(), target);
            continue;
        }
        unsigned ordinal = 0;
        while (pending.size() >= 2) {
            const std::size_t take = pending.size() >= 3 ? 3 : 2;
            std::vector<Signal> inputs(pending.begin(), pending.begin() + static_cast<std::ptrdiff_t>(take));
            pending.erase(pending.begin(), pending.begin() + static_cast<std::ptrdiff_t>(take));
            const bool last = pending.empty();
            const Signal sum = last ? Signal::constant(target) : net.fresh({RoleKind::Sum, c, ordinal});
            const Signal carry = net.fresh({RoleKind::Carry, c, ordinal});
            net.gates.push_back({take == 3 ? GateKind::FullAdder : GateKind::HalfAdder, inputs, {sum, carry}, c});
            if (!last) pending.insert(pending.begin(), sum);
            column[c + 1].push_back(carry);
            ++ordinal;
        }
    }
    if (ones[columns] != 0) fail(ErrorCode::Precondition, "N has no factorisation with the requested bit lengths");
    for (Signal s : column[columns]) net.force(s, false);

    // Assign model indices: factor bits first (p then q), then ancillas in creation order.
    McBuild b;
    std::vector<Signal> resolved(net.vars.size());
    b.encoding.l_p = l_p;
    b.encoding.l_q = l_q;
    for (RoleKind pass : {RoleKind::FactorP, RoleKind::FactorQ}) {
        for (std::size_t v = 0; v < net.vars.size(); ++v) {
            if (net.vars[v].role.kind != pass) continue;
            const auto idx = b.model.add_variable(net.vars[v].role);
            resolved[v] = Signal::variable(idx);
            (pass == RoleKind::FactorP ? b.encoding.p_vars : b.encoding.q_vars).push_back(idx);
        }
    }
    for (std::size_t v = 0; v < net.vars.size(); ++v) {
        const auto& var = net.vars[v];
        if (var.role.is_factor_bit()) continue;
        if (var.forced) {
            resolved[v] = Signal::constant(*var.forced);
            continue;
        }
        resolved[v] = Signal::variable(b.model.add_variable(var.role));
        switch (var.role.kind) {
            case RoleKind::And: ++b.n_and; break;
            case RoleKind::Sum: ++b.n_sum; break;
            case RoleKind::Carry: ++b.n_carry; break;
            default: break;
        }
    }
    auto remap = [&](Signal s) { return s.is_const ? s : resolved[s.value]; };
    for (Gate g : net.gates) {
        for (auto& s : g.inputs) s = remap(s);
        for (auto& s : g.outputs) s = remap(s);
        if (g.kind == GateKind::And) {
            add_and_penalty(b.model, g.inputs[0].value, g.inputs[1].value, g.outputs[0].value);
        } else {
            LinearForm form;
            for (Signal s : g.inputs) add_to_form(form, s, 1);
            add_to_form(form, g.outputs[0], -1);
            add_to_form(form, g.outputs[1], -2);
            add_squared(b.model, form);
        }
        b.gates.push_back(std::move(g));
    }
    // Column bits that reduced to a single variable are already folded into constants.
    return b;
}

std::vector<std::uint8_t> forward_assignment(const McBuild& b, u64 p, u64 q) {
    std::vector<std::uint8_t> x(b.model.num_vars(), 0);
    encode_factors(b.encoding, p, q, x);
    for (const Gate& g : b.gates) {
        unsigned total = 0;
        for (Signal s : g.inputs) total += signal_value(s, x);
        if (g.kind == GateKind::And) {
            x[g.outputs[0].value] = total == 2;
            continue;
        }
        const Signal sum = g.outputs[0], carry = g.outputs[1];
        if (!sum.is_const) x[sum.value] = total & 1;
        if (!carry.is_const) x[carry.value] = static_cast<std::uint8_t>(total >> 1);
    }
    return x;
}

// ---------------------------------------------------------------------------
// Controlled-full-adder method.

void add_cfa_penalty(QuboModel& model, const CfaTile& t) {
    LinearForm form;
    add_to_form(form, t.product, 1);
    add_to_form(form, t.s_in, 1);
    add_to_form(form, t.c_in, 1);
    add_to_form(form, t.s_out, -1);
    add_to_form(form, t.c_out, -2);
    add_squared(model, form);
    if (t.product_is_ancilla) add_and_penalty(model, t.q.value, t.p.value, t.product.value);
}

CfaBuild build_cfa(u64 n, unsigned l_p, unsigned l_q) {
    check_build_args(n, l_p, l_q);
    CfaBuild b;
    b.encoding = add_factor_variables(b.model, l_p, l_q);
    b.rows = l_q - 1;
    b.cols = l_p;
    QuboModel& m = b.model;

    // Running partial sum by bit position; row 0 (q_0 = 1) contributes p itself.
    std::vector<Signal> sum(l_p + l_q + 1, Signal::constant(false));
    for (unsigned j = 0; j < l_p; ++j) sum[j] = factor_signal(b.encoding.p_vars, l_p, j);

    for (unsigned i = 1; i < l_q; ++i) {
        const bool last_row = i == l_q - 1;
        const Signal q = factor_signal(b.encoding.q_vars, l_q, i);
        Signal carry = Signal::constant(false);
        for (unsigned j = 0; j < l_p; ++j) {
            const unsigned pos = i + j;
            CfaTile tile;
            tile.row = i;
            tile.col = j;
            tile.q = q;
            tile.p = factor_signal(b.encoding.p_vars, l_p, j);
            tile.s_in = sum[pos];
            tile.c_in = carry;
            if (!tile.q.is_const && !tile.p.is_const) {
                tile.product = Signal::variable(m.add_variable({RoleKind::And, i, j}));
                tile.product_is_ancilla = true;
            } else {
                tile.product = tile.q.is_const ? tile.p : tile.q;
            }
            // Bit i is final once row i is done; the last row finalises everything it touches.
            tile.s_out = (j == 0 || last_row) ? Signal::constant(bit_of(n, pos))
                                              : Signal::variable(m.add_variable({RoleKind::Sum, i, j}));
            const bool top = j == l_p - 1;
            tile.c_out = (top && last_row) ? Signal::constant(bit_of(n, i + l_p))
                                           : Signal::variable(m.add_variable({RoleKind::Carry, i, j}));
            add_cfa_penalty(m, tile);
            sum[pos] = tile.s_out;
            carry = tile.c_out;
            b.tiles.push_back(tile);
        }
        sum[i + l_p] = carry;
    }
    return b;
}

std::vector<std::uint8_t> forward_assignment(const CfaBuild& b, u64 p, u64 q) {
    std::vector<std::uint8_t> x(b.model.num_vars(), 0);
    encode_factors(b.encoding, p, q, x);
    for (const CfaTile& t : b.tiles) {
        const unsigned product = signal_value(t.q, x) & signal_value(t.p, x);
        if (t.product_is_ancilla) x[t.product.value] = static_cast<std::uint8_t>(product);
        const unsigned total = product + signal_value(t.s_in, x) + signal_value(t.c_in, x);
        if (!t.s_out.is_const) x[t.s_out.value] = total & 1;
        if (!t.c_out.is_const) x[t.c_out.value] = static_cast<std::uint8_t>(total >> 1);
    }
    return x;
}

// ---------------------------------------------------------------------------

const char* to_string(Method m) noexcept {
    switch (m) {
        case Method::Direct: return "direct";
        case Method::Mc: return "mc";
        case Method::Cfa: return "cfa";
    }
    return "?";
}

Method parse_method(const std::string& text) {
    if (text == "direct") return Method::Direct;
    if (text == "mc") return Method::Mc;
    if (text == "cfa") return Method::Cfa;
    fail(ErrorCode::InvalidArgument, "unknown method '" + text + "' (expected direct|mc|cfa)");
}

BuiltModel build_model(Method method, u64 n, unsigned l_p, unsigned l_q) {
    switch (method) {
        case Method::Direct: {
            auto b = build_direct(n, l_p, l_q);
            return {method, std::move(b.model), std::move(b.encoding)};
        }
        case Method::Mc: {
            auto b = build_mc(n, l_p, l_q);
            return {method, std::move(b.model), std::move(b.encoding)};
        }
        case Method::Cfa: {
            auto b = build_cfa(n, l_p, l_q);
            return {method, std::move(b.model), std::move(b.encoding)};
        }
    }
    fail(ErrorCode::InvalidArgument, "unknown method");
}

}  // namespace qfactor
