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
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qfactor/qubo.hpp"

namespace qfactor {

using qubit_t = std::uint32_t;

struct PegasusCoord {
    unsigned u = 0;  //!< 0 vertical, 1 horizontal
    unsigned w = 0;
    unsigned k = 0;
    unsigned z = 0;

    friend bool operator==(const PegasusCoord&, const PegasusCoord&) = default;
};

//! Linear id in the usual (u, w, k, z) ordering: u*12*m*(m-1) + w*12*(m-1) + k*(m-1) + z.
qubit_t pegasus_linear(const PegasusCoord& c, unsigned m);
PegasusCoord pegasus_coordinates(qubit_t id, unsigned m);

//! Undirected simple graph over integer qubit ids; ids need not be contiguous.
class HardwareGraph {
  public:
    HardwareGraph() = default;
    //! Generic graph; every id in `nodes` is present, edges must join listed nodes.
    HardwareGraph(std::vector<qubit_t> nodes, const std::vector<std::pair<qubit_t, qubit_t>>& edges);

    unsigned pegasus_m() const noexcept { return m_; }
    bool is_pegasus() const noexcept { return m_ != 0; }

    bool has_node(qubit_t q) const noexcept { return q < present_.size() && present_[q]; }
    bool has_edge(qubit_t a, qubit_t b) const;
    std::size_t num_nodes() const noexcept { return num_nodes_; }
    std::size_t num_edges() const noexcept { return num_edges_; }
    //! Upper bound (exclusive) on qubit ids.
    std::size_t id_bound() const noexcept { return present_.size(); }

    std::vector<qubit_t> nodes() const;
    //! Sorted (a < b) edge list.
    std::vector<std::pair<qubit_t, qubit_t>> edges() const;
    //! Sorted neighbours of q.
    const std::vector<qubit_t>& neighbors(qubit_t q) const;

    std::optional<PegasusCoord> coordinates(qubit_t q) const;

    void remove_node(qubit_t q);
    void remove_edge(qubit_t a, qubit_t b);

  private:
    friend HardwareGraph build_pegasus_ideal(unsigned m);
    void add_edge_unchecked(qubit_t a, qubit_t b);

    unsigned m_ = 0;
    std::vector<std::uint8_t> present_;
    std::vector<std::vector<qubit_t>> adj_;
    std::size_t num_nodes_ = 0;
    std::size_t num_edges_ = 0;
};

struct DefectList {
    std::vector<qubit_t> nodes;
    std::vector<std::pair<qubit_t, qubit_t>> edges;

    friend bool operator==(const DefectList&, const DefectList&) = default;
};

void write_defects(std::ostream& out, const DefectList& defects);
DefectList read_defects(std::istream& in);

//! Fabric-only Pegasus graph of size m (dangling boundary qubits omitted).
HardwareGraph build_pegasus_ideal(unsigned m);
//! Ideal graph minus the listed defects; throws if a defect is not present.
HardwareGraph build_pegasus(unsigned m, const DefectList& defects = {});

struct Embedding {
    std::vector<std::vector<qubit_t>> chains;  //!< chains[v]: sorted physical qubits of logical v
    //! Per-chain strength; empty selects default_chain_strengths at embed time.
    std::vector<coeff_t> chain_strength;

    std::size_t num_qubits() const noexcept;
    std::size_t max_chain_length() const noexcept;
    friend bool operator==(const Embedding&, const Embedding&) = default;
};

void write_embedding(std::ostream& out, const Embedding& embedding);
Embedding read_embedding(std::istream& in);

struct EmbeddingReport {
    std::vector<std::string> violations;
    bool valid() const noexcept { return violations.empty(); }
    std::string to_string() const;
};

EmbeddingReport verify_embedding(const QuboModel& model, const HardwareGraph& graph, const Embedding& embedding);

//! Greedy chain growth; throws ErrorCode::Embedding when it runs out of room.
Embedding embed_heuristic(const QuboModel& model, const HardwareGraph& graph, std::uint64_t seed);

//! Deterministic tile-structured placement of a CFA multiplier on a Pegasus graph.
Embedding build_cfa_placement(const CfaBuild& build, const HardwareGraph& graph);

//! 1 + max |coefficient| incident to each variable.
std::vector<coeff_t> default_chain_strengths(const QuboModel& model);
//! 1 + |a_i| + sum_j |b_ij|: large enough that no ground state breaks a chain.
std::vector<coeff_t> safe_chain_strengths(const QuboModel& model);

struct EmbeddedModel {
    QuboModel model;               //!< physical model, variables in ascending qubit order
    std::vector<qubit_t> qubits;   //!< physical variable index -> qubit id
    Embedding local;               //!< chains expressed as physical variable indices
};

EmbeddedModel embed_model(const QuboModel& model, const HardwareGraph& graph, const Embedding& embedding);

//! Extends a logical assignment to every chain qubit of an embedded model.
std::vector<std::uint8_t> spread_sample(std::span<const std::uint8_t> logical, const EmbeddedModel& embedded);

struct UnembeddedSample {
    std::vector<std::uint8_t> logical;
    unsigned broken_chains = 0;
};

//! Majority vote per chain, ties to 0. `chains` index into `physical`.
UnembeddedSample unembed_sample(std::span<const std::uint8_t> physical, const Embedding& chains);

}  // namespace qfactor
