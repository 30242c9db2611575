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

#include "qfactor/hwgraph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>

#include "qfactor/error.hpp"

namespace qfactor {

namespace {

// Segment offsets of the standard Pegasus layout, per k.
constexpr std::array<unsigned, 12> kOffsetVertical{2, 2, 2, 2, 10, 10, 10, 10, 6, 6, 6, 6};
constexpr std::array<unsigned, 12> kOffsetHorizontal{6, 6, 6, 6, 2, 2, 2, 2, 10, 10, 10, 10};

bool in_fabric(const PegasusCoord& c, unsigned m) {
    if (c.w == 0) return c.k >= 2;
    if (c.w == m - 1) return c.k < 10;
    return true;
}


}  // namespace

qubit_t pegasus_linear(const PegasusCoord& c, unsigned m) {
    const unsigned m1 = m - 1;
    return static_cast<qubit_t>(((c.u * m + c.w) * 12 + c.k) * m1 + c.z);
}

PegasusCoord pegasus_coordinates(qubit_t id, unsigned m) {
    const unsigned m1 = m - 1;
    PegasusCoord c;
    c.z = id % m1;
    id /= m1;
    c.k = id % 12;
    id /= 12;
    c.w = id % m;
    c.u = id / m;
    return c;
}

// ---------------------------------------------------------------------------
// HardwareGraph

HardwareGraph::HardwareGraph(std::vector<qubit_t> nodes, const std::vector<std::pair<qubit_t, qubit_t>>& edges) {
    qubit_t bound = 0;
    for (qubit_t q : nodes) bound = std::max(bound, q + 1);
    present_.assign(bound, 0);
    adj_.assign(bound, {});
    for (qubit_t q : nodes) {
        if (present_[q]) fail(ErrorCode::InvalidArgument, "duplicate node " + std::to_string(q));
        present_[q] = 1;
        ++num_nodes_;
    }
    for (auto [a, b] : edges) {
        if (!has_node(a) || !has_node(b) || a == b)
            fail(ErrorCode::InvalidArgument, "edge " + std::to_string(a) + "-" + std::to_string(b) + " is invalid");
        if (has_edge(a, b)) continue;
        add_edge_unchecked(a, b);
        auto& na = adj_[a];
        auto& nb = adj_[b];
        std::sort(na.begin(), na.end());
        std::sort(nb.begin(), nb.end());
    }
}

void HardwareGraph::add_edge_unchecked(qubit_t a, qubit_t b) {
    adj_[a].push_back(b);
    adj_[b].push_back(a);
    ++num_edges_;
}

bool HardwareGraph::has_edge(qubit_t a, qubit_t b) const {
    if (!has_node(a) || !has_node(b)) return false;
    const auto& na = adj_[a];
    return std::binary_search(na.begin(), na.end(), b);
}

std::vector<qubit_t> HardwareGraph::nodes() const {
    std::vector<qubit_t> out;
    out.reserve(num_nodes_);
    for (qubit_t q = 0; q < present_.size(); ++q)
        if (present_[q]) out.push_back(q);
    return out;
}

std::vector<std::pair<qubit_t, qubit_t>> HardwareGraph::edges() const {
    std::vector<std::pair<qubit_t, qubit_t>> out;
    out.reserve(num_edges_);
    for (qubit_t a = 0; a < present_.size(); ++a)
        for (qubit_t b : adj_[a])
            if (a < b) out.emplace_back(a, b);
    return out;
}

const std::vector<qubit_t>& HardwareGraph::neighbors(qubit_t q) const {
    if (!has_node(q)) fail(ErrorCode::InvalidArgument, "qubit " + std::to_string(q) + " not in graph");
    return adj_[q];
}

std::optional<PegasusCoord> HardwareGraph::coordinates(qubit_t q) const {
    if (!is_pegasus() || !has_node(q)) return std::nullopt;
    return pegasus_coordinates(q, m_);
}

void HardwareGraph::remove_node(qubit_t q) {
    if (!has_node(q)) fail(ErrorCode::InvalidArgument, "defect qubit " + std::to_string(q) + " not in graph");
    for (qubit_t b : adj_[q]) {
        auto& nb = adj_[b];
        nb.erase(std::lower_bound(nb.begin(), nb.end(), q));
        --num_edges_;
    }
    adj_[q].clear();
    present_[q] = 0;
    --num_nodes_;
}

void HardwareGraph::remove_edge(qubit_t a, qubit_t b) {
    if (!has_edge(a, b))
        fail(ErrorCode::InvalidArgument, "defect edge " + std::to_string(a) + "-" + std::to_string(b) + " not in graph");
    auto& na = adj_[a];
    na.erase(std::lower_bound(na.begin(), na.end(), b));
    auto& nb = adj_[b];
    nb.erase(std::lower_bound(nb.begin(), nb.end(), a));
    --num_edges_;
}

HardwareGraph build_pegasus_ideal(unsigned m) {
    if (m < 2) fail(ErrorCode::InvalidArgument, "Pegasus size m must be >= 2");
    if (m > 64) fail(ErrorCode::Capacity, "Pegasus size m must be <= 64");
    const unsigned m1 = m - 1;
    HardwareGraph g;
    g.m_ = m;
    const std::size_t bound = std::size_t{24} * m * m1;
    g.present_.assign(bound, 0);
    g.adj_.assign(bound, {});
    for (qubit_t q = 0; q < bound; ++q) {
        if (in_fabric(pegasus_coordinates(q, m), m)) {
            g.present_[q] = 1;
            ++g.num_nodes_;
        }
    }
    auto link = [&](const PegasusCoord& a, const PegasusCoord& b) {
        if (in_fabric(a, m) && in_fabric(b, m)) g.add_edge_unchecked(pegasus_linear(a, m), pegasus_linear(b, m));
    };
    for (unsigned u = 0; u < 2; ++u)
        for (unsigned w = 0; w < m; ++w)
            for (unsigned k = 0; k < 12; ++k)
                for (unsigned z = 0; z < m1; ++z) {
                    if (z + 1 < m1) link({u, w, k, z}, {u, w, k, z + 1});      // external
                    if (k % 2 == 0) link({u, w, k, z}, {u, w, k + 1, z});      // odd
                }
    // Internal couplers: vertical (0, w, k, z) meets horizontal (1, w', kk, z').
    for (unsigned w = 0; w < m; ++w)
        for (unsigned k = 0; k < 12; ++k)
            for (unsigned z = 0; z < m1; ++z)
                for (unsigned kk = 0; kk < 12; ++kk) {
                    const unsigned w2 = z + (kk < kOffsetVertical[k] ? 1 : 0);
                    const int z2 = static_cast<int>(w) - (k < kOffsetHorizontal[kk] ? 1 : 0);
                    if (w2 >= m || z2 < 0 || z2 >= static_cast<int>(m1)) continue;
                    link({0, w, k, z}, {1, w2, kk, static_cast<unsigned>(z2)});
                }
    for (auto& n : g.adj_) std::sort(n.begin(), n.end());
    return g;
}

HardwareGraph build_pegasus(unsigned m, const DefectList& defects) {
    HardwareGraph g = build_pegasus_ideal(m);
    for (auto [a, b] : defects.edges) g.remove_edge(a, b);
    for (qubit_t q : defects.nodes) g.remove_node(q);
    return g;
}

// ---------------------------------------------------------------------------
// Files

namespace {

template <class T>
T parse_id(const std::string& token, std::size_t line_no, const char* what) {
    if (token.empty() || !std::all_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; }))
        fail(ErrorCode::Parse, std::string(what) + " line " + std::to_string(line_no) + ": bad id '" + token + "'");
    const unsigned long long v = std::stoull(token);
    if (v > std::numeric_limits<T>::max())
        fail(ErrorCode::Parse, std::string(what) + " line " + std::to_string(line_no) + ": id out of range");
    return static_cast<T>(v);
}

std::string strip_comment(std::string line) {
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    return line;
}

}  // namespace

void write_defects(std::ostream& out, const DefectList& defects) {
    for (qubit_t q : defects.nodes) out << q << '\n';
    for (auto [a, b] : defects.edges) out << "edge " << a << ' ' << b << '\n';
}

DefectList read_defects(std::istream& in) {
    DefectList d;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(strip_comment(line));
        std::vector<std::string> tokens;
        for (std::string tok; ls >> tok;) tokens.push_back(tok);
        if (tokens.empty()) continue;
        if (tokens[0] == "edge") {
            if (tokens.size() != 3) fail(ErrorCode::Parse, "defects line " + std::to_string(line_no) + ": expected 'edge <i> <j>'");
            d.edges.emplace_back(parse_id<qubit_t>(tokens[1], line_no, "defects"),
                                 parse_id<qubit_t>(tokens[2], line_no, "defects"));
        } else {
            if (tokens.size() != 1) fail(ErrorCode::Parse, "defects line " + std::to_string(line_no) + ": expected one id");
            d.nodes.push_back(parse_id<qubit_t>(tokens[0], line_no, "defects"));
        }
    }
    return d;
}

std::size_t Embedding::num_qubits() const noexcept {
    std::size_t total = 0;
    for (const auto& c : chains) total += c.size();
    return total;
}

std::size_t Embedding::max_chain_length() const noexcept {
    std::size_t best = 0;
    for (const auto& c : chains) best = std::max(best, c.size());
    return best;
}

void write_embedding(std::ostream& out, const Embedding& e) {
    if (!e.chain_strength.empty()) {
        out << "# chain_strength";
        for (coeff_t s : e.chain_strength) out << ' ' << s;
        out << '\n';
    }
    for (std::size_t v = 0; v < e.chains.size(); ++v) {
        out << "chain " << v;
        for (qubit_t q : e.chains[v]) out << ' ' << q;
        out << '\n';
    }
}

Embedding read_embedding(std::istream& in) {
    Embedding e;
    std::map<std::size_t, std::vector<qubit_t>> chains;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.rfind("# chain_strength", 0) == 0) {
            std::istringstream ls(line.substr(16));
            for (long long s; ls >> s;) e.chain_strength.push_back(s);
            continue;
        }
        std::istringstream ls(strip_comment(line));
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag != "chain") fail(ErrorCode::Parse, "embedding line " + std::to_string(line_no) + ": expected 'chain'");
        std::string tok;
        if (!(ls >> tok)) fail(ErrorCode::Parse, "embedding line " + std::to_string(line_no) + ": missing variable");
        const auto v = parse_id<std::uint32_t>(tok, line_no, "embedding");
        if (chains.count(v)) fail(ErrorCode::Parse, "embedding: duplicate chain for variable " + std::to_string(v));
        auto& c = chains[v];
        while (ls >> tok) c.push_back(parse_id<qubit_t>(tok, line_no, "embedding"));
    }
    for (const auto& [v, c] : chains) {
        if (v != e.chains.size()) fail(ErrorCode::Parse, "embedding: chains must cover variables 0..n-1");
        e.chains.push_back(c);
    }
    if (!e.chain_strength.empty() && e.chain_strength.size() != e.chains.size())
        fail(ErrorCode::Parse, "embedding: chain_strength count does not match chains");
    return e;
}

// ---------------------------------------------------------------------------
// Verification

std::string EmbeddingReport::to_string() const {
    if (violations.empty()) return "valid\n";
    std::string out = "invalid: " + std::to_string(violations.size()) + " violation(s)\n";
    for (const auto& v : violations) out += "  " + v + '\n';
    return out;
}

EmbeddingReport verify_embedding(const QuboModel& model, const HardwareGraph& graph, const Embedding& e) {
    EmbeddingReport report;
    auto& bad = report.violations;
    if (e.chains.size() != model.num_vars()) {
        bad.push_back("embedding has " + std::to_string(e.chains.size()) + " chains for " +
                      std::to_string(model.num_vars()) + " variables");
        return report;
    }
    if (!e.chain_strength.empty()) {
        if (e.chain_strength.size() != e.chains.size()) bad.push_back("chain_strength count does not match chains");
        for (std::size_t v = 0; v < e.chain_strength.size(); ++v)
            if (e.chain_strength[v] <= 0) bad.push_back("chain " + std::to_string(v) + ": strength must be positive");
    }
    std::map<qubit_t, std::size_t> owner;
    for (std::size_t v = 0; v < e.chains.size(); ++v) {
        const auto& chain = e.chains[v];
        if (chain.empty()) {
            bad.push_back("chain " + std::to_string(v) + ": empty");
            continue;
        }
        for (qubit_t q : chain) {
            if (!graph.has_node(q)) bad.push_back("chain " + std::to_string(v) + ": qubit " + std::to_string(q) + " not in graph");
            auto [it, fresh] = owner.emplace(q, v);
            if (!fresh && it->second != v)
                bad.push_back("qubit " + std::to_string(q) + " shared by chains " + std::to_string(it->second) + " and " +
                              std::to_string(v));
            else if (!fresh)
                bad.push_back("chain " + std::to_string(v) + ": qubit " + std::to_string(q) + " listed twice");
        }
    }
    // Connectivity of each chain.
    for (std::size_t v = 0; v < e.chains.size(); ++v) {
        const auto& chain = e.chains[v];
        if (chain.empty()) continue;
        std::vector<qubit_t> members(chain.begin(), chain.end());
        std::sort(members.begin(), members.end());
        members.erase(std::unique(members.begin(), members.end()), members.end());
        std::vector<std::uint8_t> seen(members.size(), 0);
        std::vector<std::size_t> stack{0};
        seen[0] = 1;
        std::size_t reached = 1;
        while (!stack.empty()) {
            const qubit_t q = members[stack.back()];
            stack.pop_back();
            if (!graph.has_node(q)) continue;
            for (qubit_t nb : graph.neighbors(q)) {
                auto it = std::lower_bound(members.begin(), members.end(), nb);
                if (it == members.end() || *it != nb) continue;
                const auto idx = static_cast<std::size_t>(it - members.begin());
                if (!seen[idx]) {
                    seen[idx] = 1;
                    ++reached;
                    stack.push_back(idx);
                }
            }
        }
        if (reached != members.size())
            bad.push_back("chain " + std::to_string(v) + ": not connected (" + std::to_string(reached) + " of " +
                          std::to_string(members.size()) + " qubits reachable)");
    }
    // Every coupler needs a physical edge between the two chains.
    for (const auto& [key, c] : model.quadratic_terms()) {
        const auto& a = e.chains[key.first];
        const auto& b = e.chains[key.second];
        bool found = false;
        for (qubit_t x : a) {
            if (!graph.has_node(x)) continue;
            for (qubit_t y : b)
                if (graph.has_edge(x, y)) {
                    found = true;
                    break;
                }
            if (found) break;
        }
        if (!found)
            bad.push_back("coupler (" + std::to_string(key.first) + ", " + std::to_string(key.second) +
                          ") has no physical edge between the chains");
    }
    return report;
}

// ---------------------------------------------------------------------------
// Chain routing shared by the heuristic and the CFA placement: chains may
// overlap while routing, overlaps get pricier every pass, and every chain is
// ripped up and re-routed until no qubit is shared.

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using CostFn = std::vector<double>;  // per qubit id; kInf marks unusable

class NegotiatedRouter {
  public:
    NegotiatedRouter(const HardwareGraph& graph, std::vector<std::vector<std::uint32_t>> adj,
                     std::vector<const CostFn*> base, std::uint64_t tie_seed)
        : g_(graph),
          adj_(std::move(adj)),
          base_(std::move(base)),
          usage_(graph.id_bound(), 0),
          history_(graph.id_bound(), 0.0),
          chains_(adj_.size()),
          parked_(adj_.size(), 0),
          rank_(graph.id_bound()) {
        std::iota(rank_.begin(), rank_.end(), 0u);
        if (tie_seed != 0) {
            std::mt19937_64 rng(tie_seed);
            std::shuffle(rank_.begin(), rank_.end(), rng);
        }
    }

    //! Routes variables in `order`, then renegotiates; gives up after
    //! `rounds` passes or once `patience` passes bring no new best.
    bool run(const std::vector<std::uint32_t>& order, unsigned rounds, unsigned patience) {
        penalty_ = 1.0;
        for (auto v : order) route(v);
        std::size_t best = std::numeric_limits<std::size_t>::max();
        unsigned best_round = 0;
        for (unsigned round = 0; round < rounds; ++round) {
            const std::size_t bad = overused() + parked();
            if (bad == 0) return true;
            if (bad < best) {
                best = bad;
                best_round = round;
            } else if (round - best_round >= patience) {
                return false;
            }
            for (qubit_t q = 0; q < g_.id_bound(); ++q)
                if (usage_[q] > 1) history_[q] += 0.5 * (usage_[q] - 1);
            penalty_ *= 1.6;
            for (auto v : order) route(v);
        }
        return overused() + parked() == 0;
    }

    Embedding result() const {
        Embedding e;
        e.chains = chains_;
        for (auto& c : e.chains) std::sort(c.begin(), c.end());
        return e;
    }

  private:
    static constexpr qubit_t kNoParent = std::numeric_limits<qubit_t>::max();
    static constexpr double kUnreachedFine = 1e9;

    std::size_t parked() const {
        std::size_t count = 0;
        for (auto p : parked_) count += p;
        return count;
    }

    std::size_t overused() const {
        std::size_t count = 0;
        for (auto u : usage_) count += u > 1;
        return count;
    }

    double price(std::uint32_t v, qubit_t q) const {
        const double b = (*base_[v])[q];
        if (b == kInf || !g_.has_node(q)) return kInf;
        return b * (1.0 + history_[q]) * (1.0 + penalty_ * usage_[q]);
    }

    void rip_up(std::uint32_t v) {
        for (qubit_t q : chains_[v]) --usage_[q];
        chains_[v].clear();
    }

    void claim(std::uint32_t v, qubit_t q, std::vector<std::uint8_t>& mark) {
        if (mark[q]) return;
        mark[q] = 1;
        chains_[v].push_back(q);
        ++usage_[q];
    }

    // Dijkstra seeded with the neighbours of chain u; results land in dist_[slot], parent_[slot].
    void search(std::uint32_t v, std::uint32_t u, std::vector<double>& dist, std::vector<qubit_t>& parent) {
        dist.assign(g_.id_bound(), kInf);
        parent.assign(g_.id_bound(), kNoParent);
        using Item = std::pair<double, qubit_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        member_.assign(g_.id_bound(), 0);
        for (qubit_t c : chains_[u]) member_[c] = 1;
        for (qubit_t c : chains_[u])
            for (qubit_t nb : g_.neighbors(c)) {
                if (member_[nb]) continue;
                const double p = price(v, nb);
                if (p < dist[nb]) {
                    dist[nb] = p;
                    heap.emplace(p, nb);
                }
            }
        while (!heap.empty()) {
            auto [d, q] = heap.top();
            heap.pop();
            if (d > dist[q]) continue;
            for (qubit_t nb : g_.neighbors(q)) {
                const double p = price(v, nb);
                if (p == kInf) continue;
                if (d + p < dist[nb]) {
                    dist[nb] = d + p;
                    parent[nb] = q;
                    heap.emplace(d + p, nb);
                }
            }
        }
    }

    void route(std::uint32_t v) {
        rip_up(v);
        parked_[v] = 0;
        std::vector<std::uint32_t> targets;
        for (auto u : adj_[v])
            if (!chains_[u].empty()) targets.push_back(u);
        if (dist_.size() < targets.size()) {
            dist_.resize(targets.size());
            parent_.resize(targets.size());
        }
        for (std::size_t i = 0; i < targets.size(); ++i) search(v, targets[i], dist_[i], parent_[i]);
        // A target out of reach costs a flat fine; its partner links up
        // when it is re-routed itself.
        qubit_t best = 0;
        double best_total = kInf;
        for (qubit_t q = 0; q < g_.id_bound(); ++q) {
            const double p = price(v, q);
            if (p == kInf) continue;
            double total = p;
            for (std::size_t i = 0; i < targets.size(); ++i)
                total += dist_[i][q] == kInf ? kUnreachedFine : dist_[i][q] - p;
            if (total < best_total || (total == best_total && rank_[q] < rank_[best])) {
                best = q;
                best_total = total;
            }
        }
        if (best_total == kInf) fail(ErrorCode::Embedding, "no usable qubit for variable " + std::to_string(v));
        mark_.assign(g_.id_bound(), 0);
        claim(v, best, mark_);
        // Nearest targets first; each one hooks onto whichever qubit of the
        // chain so far is closest to it.
        std::vector<std::size_t> by_distance(targets.size());
        std::iota(by_distance.begin(), by_distance.end(), std::size_t{0});
        std::stable_sort(by_distance.begin(), by_distance.end(),
                         [&](auto a, auto b) { return dist_[a][best] < dist_[b][best]; });
        for (std::size_t i : by_distance) {
            qubit_t from = best;
            for (qubit_t c : chains_[v])
                if (dist_[i][c] - price(v, c) < dist_[i][from] - price(v, from)) from = c;
            if (dist_[i][from] == kInf) {
                parked_[v] = 1;
                continue;
            }
            for (qubit_t q = parent_[i][from]; q != kNoParent; q = parent_[i][q]) claim(v, q, mark_);
        }
    }

    const HardwareGraph& g_;
    std::vector<std::vector<std::uint32_t>> adj_;
    std::vector<const CostFn*> base_;
    std::vector<unsigned> usage_;
    std::vector<double> history_;
    std::vector<std::vector<qubit_t>> chains_;
    std::vector<std::uint8_t> parked_;
    std::vector<std::uint32_t> rank_;
    std::vector<std::vector<double>> dist_;
    std::vector<std::vector<qubit_t>> parent_;
    std::vector<std::uint8_t> member_, mark_;
    double penalty_ = 1.0;
};

std::vector<std::vector<std::uint32_t>> coupler_graph(const QuboModel& model) {
    std::vector<std::vector<std::uint32_t>> adj(model.num_vars());
    for (const auto& [key, c] : model.quadratic_terms()) {
        adj[key.first].push_back(key.second);
        adj[key.second].push_back(key.first);
    }
    return adj;
}

// A pass that beats the best so far resets the patience count; attempts that
// stall are abandoned and retried from scratch with a different set-up.
constexpr unsigned kNegotiationRounds = 40;
constexpr unsigned kNegotiationPatience = 6;
constexpr unsigned kHeuristicAttempts = 4;

}  // namespace

Embedding embed_heuristic(const QuboModel& model, const HardwareGraph& graph, std::uint64_t seed) {
    const std::size_t n = model.num_vars();
    if (n == 0) fail(ErrorCode::InvalidArgument, "embed_heuristic: empty model");
    const auto adj = coupler_graph(model);
    CostFn uniform(graph.id_bound(), kInf);
    for (qubit_t q : graph.nodes()) uniform[q] = 1.0;
    for (unsigned attempt = 0; attempt < kHeuristicAttempts; ++attempt) {
        std::vector<std::uint32_t> order(n);
        std::iota(order.begin(), order.end(), 0u);
        std::mt19937_64 rng(mix_seed(seed, 2 * attempt));
        std::shuffle(order.begin(), order.end(), rng);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return adj[a].size() > adj[b].size(); });
        // Breadth-first from the highest-degree variable keeps every new
        // variable next to something already placed.
        std::vector<std::uint8_t> queued(n, 0);
        std::vector<std::uint32_t> sequence;
        for (std::uint32_t start : order) {
            if (queued[start]) continue;
            std::vector<std::uint32_t> frontier{start};
            queued[start] = 1;
            for (std::size_t head = 0; head < frontier.size(); ++head) {
                const auto v = frontier[head];
                sequence.push_back(v);
                std::vector<std::uint32_t> next(adj[v]);
                std::stable_sort(next.begin(), next.end(),
                                 [&](auto a, auto b) { return adj[a].size() > adj[b].size(); });
                for (auto u : next)
                    if (!queued[u]) {
                        queued[u] = 1;
                        frontier.push_back(u);
                    }
            }
        }
        NegotiatedRouter router(graph, adj, std::vector<const CostFn*>(n, &uniform), mix_seed(seed, 2 * attempt + 1));
        if (router.run(sequence, kNegotiationRounds, kNegotiationPatience)) return router.result();
    }
    fail(ErrorCode::Embedding, "embed_heuristic: chains still overlap after " + std::to_string(kHeuristicAttempts) +
                                   " attempts");
}

// ---------------------------------------------------------------------------
// CFA placement

namespace {

// Qubit extent in units of 4-qubit blocks, trimmed to the middle half of
// the segment; one of the two spans is a single line.
struct Span {
    double x0, y0, x1, y1;
};

Span qubit_span(const PegasusCoord& c) {
    const double line = (12.0 * c.w + c.k + 0.5) / 4.0;
    const double mid = (12.0 * c.z + (c.u == 0 ? kOffsetVertical[c.k] : kOffsetHorizontal[c.k]) + 6.0) / 4.0;
    if (c.u == 0) return {line, mid - 0.75, line, mid + 0.75};
    return {mid - 0.75, line, mid + 0.75, line};
}

struct Rect {
    double x0, y0, x1, y1;
    double distance(const Span& s) const {
        const double dx = std::max({x0 - s.x1, 0.0, s.x0 - x1});
        const double dy = std::max({y0 - s.y1, 0.0, s.y0 - y1});
        return std::hypot(dx, dy);
    }
};

// Chains may wander this many blocks outside their tiles.
constexpr double kPlacementReach = 4.0;

// Column shift (in tiles) and how steeply leaving a tile is charged.
struct Layout {
    double shear;
    double outside_squared;
};
constexpr std::array<Layout, 8> kLayouts{{
    {0.6, 0}, {0.4, 1}, {0.6, 3}, {0.7, 1}, {0.7, 0}, {0.5, 3}, {0.7, 3}, {0.4, 3},
}};

}  // namespace

Embedding build_cfa_placement(const CfaBuild& build, const HardwareGraph& graph) {
    if (!graph.is_pegasus()) fail(ErrorCode::InvalidArgument, "CFA placement needs a Pegasus graph");
    const unsigned m = graph.pegasus_m();
    const unsigned cols = build.cols, rows = build.rows;
    const std::size_t n = build.model.num_vars();
    std::vector<std::vector<std::size_t>> tiles_of(n);
    for (std::size_t t = 0; t < build.tiles.size(); ++t) {
        const auto& tile = build.tiles[t];
        for (Signal s : {tile.q, tile.p, tile.s_in, tile.c_in, tile.s_out, tile.c_out, tile.product})
            if (!s.is_const && (tiles_of[s.value].empty() || tiles_of[s.value].back() != t))
                tiles_of[s.value].push_back(t);
    }
    // Tile by tile, so every chain starts next to the ones it talks to.
    std::vector<std::uint32_t> order;
    std::vector<std::uint8_t> queued(n, 0);
    for (const auto& tile : build.tiles)
        for (Signal s : {tile.q, tile.p, tile.s_in, tile.c_in, tile.product, tile.s_out, tile.c_out})
            if (!s.is_const && !queued[s.value]) {
                queued[s.value] = 1;
                order.push_back(s.value);
            }
    for (std::uint32_t v = 0; v < n; ++v)
        if (!queued[v]) fail(ErrorCode::InvalidArgument, "CFA placement: variable outside every tile");

    std::vector<Span> where(graph.id_bound());
    for (qubit_t q : graph.nodes()) where[q] = qubit_span(pegasus_coordinates(q, m));
    const auto adj = coupler_graph(build.model);
    const double usable = 3.0 * m - 1.0;
    bool fits = false;
    for (const Layout& layout : kLayouts) {
        // Tile (i, j) sits at grid column j, shifted down by `shear` tiles
        // per column: p_j runs down a column, q_i along a diagonal, sums and
        // carries reach into the neighbouring column.
        const double grid_x = cols, grid_y = rows + layout.shear * (cols - 1);
        const double bw = std::min(4.0, usable / grid_x);
        const double bh = std::min(4.0, usable / grid_y);
        if (bw * bh < 4.0) continue;
        fits = true;
        const double x_start = 0.5 + (usable - grid_x * bw) / 2.0;
        const double y_start = 0.5 + (usable - grid_y * bh) / 2.0;
        auto tile_rect = [&](const CfaTile& t) {
            const double x = x_start + t.col * bw;
            const double y = y_start + (t.row - 1 + layout.shear * t.col) * bh;
            return Rect{x, y, x + bw, y + bh};
        };
        std::vector<CostFn> costs(n, CostFn(graph.id_bound(), kInf));
        std::vector<const CostFn*> base(n);
        for (std::size_t v = 0; v < n; ++v) {
            for (qubit_t q : graph.nodes()) {
                double d = kInf;
                for (std::size_t t : tiles_of[v]) d = std::min(d, tile_rect(build.tiles[t]).distance(where[q]));
                if (d <= kPlacementReach) costs[v][q] = 1.0 + 2.0 * d + layout.outside_squared * d * d;
            }
            base[v] = &costs[v];
        }
        NegotiatedRouter router(graph, adj, base, 0);
        if (router.run(order, kNegotiationRounds, kNegotiationPatience)) return router.result();
    }
    if (!fits)
        fail(ErrorCode::Embedding, "CFA grid of " + std::to_string(rows) + "x" + std::to_string(cols) +
                                       " tiles does not fit Pegasus m=" + std::to_string(m));
    fail(ErrorCode::Embedding, "CFA placement: tiles still overlap in every layout");
}

// ---------------------------------------------------------------------------
// Embedded models

std::vector<coeff_t> default_chain_strengths(const QuboModel& model) {
    std::vector<coeff_t> s(model.num_vars());
    for (std::size_t v = 0; v < s.size(); ++v) s[v] = std::abs(model.linear(v));
    for (const auto& [key, c] : model.quadratic_terms()) {
        s[key.first] = std::max(s[key.first], std::abs(c));
        s[key.second] = std::max(s[key.second], std::abs(c));
    }
    for (auto& x : s) x += 1;
    return s;
}

std::vector<coeff_t> safe_chain_strengths(const QuboModel& model) {
    std::vector<__int128> s(model.num_vars());
    for (std::size_t v = 0; v < s.size(); ++v) s[v] = 1 + static_cast<__int128>(std::abs(model.linear(v)));
    for (const auto& [key, c] : model.quadratic_terms()) {
        s[key.first] += std::abs(c);
        s[key.second] += std::abs(c);
    }
    std::vector<coeff_t> out;
    for (auto x : s) {
        if (x > std::numeric_limits<coeff_t>::max()) fail(ErrorCode::Overflow, "chain strength exceeds 64 bits");
        out.push_back(static_cast<coeff_t>(x));
    }
    return out;
}

EmbeddedModel embed_model(const QuboModel& model, const HardwareGraph& graph, const Embedding& embedding) {
    const auto report = verify_embedding(model, graph, embedding);
    if (!report.valid()) fail(ErrorCode::Embedding, "embed_model: " + report.to_string());
    const auto strengths = embedding.chain_strength.empty() ? default_chain_strengths(model) : embedding.chain_strength;

    EmbeddedModel out;
    for (const auto& c : embedding.chains) out.qubits.insert(out.qubits.end(), c.begin(), c.end());
    std::sort(out.qubits.begin(), out.qubits.end());
    std::vector<std::uint32_t> index(graph.id_bound(), 0);
    std::vector<std::uint32_t> logical_of(out.qubits.size());
    for (std::uint32_t i = 0; i < out.qubits.size(); ++i) index[out.qubits[i]] = i;
    for (std::size_t v = 0; v < embedding.chains.size(); ++v)
        for (qubit_t q : embedding.chains[v]) logical_of[index[q]] = static_cast<std::uint32_t>(v);
    for (std::uint32_t i = 0; i < out.qubits.size(); ++i) out.model.add_variable(model.roles()[logical_of[i]]);

    out.local.chains.resize(embedding.chains.size());
    out.local.chain_strength = strengths;
    for (std::size_t v = 0; v < embedding.chains.size(); ++v) {
        auto chain = embedding.chains[v];
        std::sort(chain.begin(), chain.end());
        auto& local = out.local.chains[v];
        for (qubit_t q : chain) local.push_back(index[q]);
        // Integer split of the bias: floor share everywhere, remainder on the first qubits.
        const coeff_t a = model.linear(v);
        const auto len = static_cast<coeff_t>(chain.size());
        coeff_t share = a / len;
        coeff_t rem = a % len;
        if (rem < 0) {
            share -= 1;
            rem += len;
        }
        for (coeff_t i = 0; i < len; ++i) out.model.add_linear(local[i], share + (i < rem ? 1 : 0));
        // Equality penalty along a BFS spanning tree of the chain.
        const coeff_t s = strengths[v];
        std::vector<std::uint8_t> seen(chain.size(), 0);
        std::vector<std::size_t> queue{0};
        seen[0] = 1;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const qubit_t q = chain[queue[head]];
            for (qubit_t nb : graph.neighbors(q)) {
                auto it = std::lower_bound(chain.begin(), chain.end(), nb);
                if (it == chain.end() || *it != nb) continue;
                const auto idx = static_cast<std::size_t>(it - chain.begin());
                if (seen[idx]) continue;
                seen[idx] = 1;
                queue.push_back(idx);
                out.model.add_linear(index[q], s);
                out.model.add_linear(index[nb], s);
                out.model.add_quadratic(index[q], index[nb], -2 * s);
            }
        }
    }
    for (const auto& [key, b] : model.quadratic_terms()) {
        auto ca = embedding.chains[key.first];
        auto cb = embedding.chains[key.second];
        std::sort(ca.begin(), ca.end());
        std::sort(cb.begin(), cb.end());
        bool done = false;
        for (qubit_t x : ca) {
            for (qubit_t y : cb)
                if (graph.has_edge(x, y)) {
                    out.model.add_quadratic(index[x], index[y], b);
                    done = true;
                    break;
                }
            if (done) break;
        }
    }
    out.model.add_offset(model.offset());
    return out;
}

std::vector<std::uint8_t> spread_sample(std::span<const std::uint8_t> logical, const EmbeddedModel& embedded) {
    if (logical.size() != embedded.local.chains.size())
        fail(ErrorCode::InvalidArgument, "spread_sample: logical assignment length mismatch");
    std::vector<std::uint8_t> x(embedded.qubits.size(), 0);
    for (std::size_t v = 0; v < logical.size(); ++v)
        for (auto idx : embedded.local.chains[v]) x[idx] = logical[v];
    return x;
}

UnembeddedSample unembed_sample(std::span<const std::uint8_t> physical, const Embedding& chains) {
    UnembeddedSample out;
    out.logical.resize(chains.chains.size(), 0);
    for (std::size_t v = 0; v < chains.chains.size(); ++v) {
        std::size_t ones = 0;
        for (auto idx : chains.chains[v]) {
            if (idx >= physical.size()) fail(ErrorCode::InvalidArgument, "unembed_sample: chain index out of range");
            ones += physical[idx] != 0;
        }
        const std::size_t len = chains.chains[v].size();
        out.logical[v] = 2 * ones > len ? 1 : 0;
        if (ones != 0 && ones != len) ++out.broken_chains;
    }
    return out;
}

}  // namespace qfactor
