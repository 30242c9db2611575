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


#include "qfactor/qfactor.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <optional>
#include <variant>

#include "qfactor/error.hpp"
#include "qfactor/harness.hpp"
#include "qfactor/hwgraph.hpp"

using namespace qfactor;

struct qf_model {
    QuboModel model;
    std::optional<CfaBuild> cfa;
};

struct qf_graph {
    HardwareGraph graph;
};

struct qf_embedding {
    Embedding embedding;
};

struct qf_result {
    std::variant<ShorRunResult, ShorSweepResult, AnnealBenchResult, SolveResult, FitResult> value;
};

namespace {

thread_local std::string g_last_error;

qf_status status_of(ErrorCode c) {
    switch (c) {
        case ErrorCode::InvalidArgument: return QF_E_INVALID_ARGUMENT;
        case ErrorCode::Precondition: return QF_E_PRECONDITION;
        case ErrorCode::Capacity: return QF_E_CAPACITY;
        case ErrorCode::Overflow: return QF_E_OVERFLOW;
        case ErrorCode::Parse: return QF_E_PARSE;
        case ErrorCode::Io: return QF_E_IO;
        case ErrorCode::Embedding: return QF_E_EMBEDDING;
        case ErrorCode::RemoteConnection: return QF_E_REMOTE_CONNECTION;
        case ErrorCode::RemoteProtocol: return QF_E_REMOTE_PROTOCOL;
        case ErrorCode::RemoteRejected: return QF_E_REMOTE_REJECTED;
    }
    return QF_E_INTERNAL;
}

template <typename Fn>
qf_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return QF_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return QF_E_CAPACITY;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return QF_E_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::ifstream open_in(const char* path) {
    need(path, "path");
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, std::string("cannot open ") + path);
    return in;
}

std::ofstream open_out(const char* path) {
    need(path, "path");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, std::string("cannot open ") + path + " for writing");
    return out;
}

void finish_out(std::ofstream& out, const char* path) {
    out.close();
    if (!out) fail(ErrorCode::Io, std::string("write failed: ") + path);
}

template <typename Fn>
qf_status make_result(qf_result** out, Fn&& fn) {
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        *out = new qf_result{fn()};
    });
}

}  // namespace

extern "C" {

const char* qf_last_error_message(void) { return g_last_error.c_str(); }

const char* qf_status_name(qf_status s) {
    switch (s) {
        case QF_OK: return "ok";
        case QF_E_INVALID_ARGUMENT: return "invalid argument";
        case QF_E_PRECONDITION: return "precondition violated";
        case QF_E_CAPACITY: return "capacity exceeded";
        case QF_E_OVERFLOW: return "overflow";
        case QF_E_PARSE: return "parse error";
        case QF_E_IO: return "i/o error";
        case QF_E_EMBEDDING: return "embedding failed";
        case QF_E_REMOTE_CONNECTION: return "remote connection failed";
        case QF_E_REMOTE_PROTOCOL: return "remote protocol error";
        case QF_E_REMOTE_REJECTED: return "remote request rejected";
        case QF_E_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* qf_version(void) { return "0.1.0"; }

void qf_string_free(char* s) { std::free(s); }

qf_status qf_shor_run(const char* spec_json, unsigned threads, qf_result** out) {
    return make_result(out, [&] {
        need(spec_json, "spec_json");
        return run_shor_problem(parse_shor_run_spec(spec_json), threads);
    });
}

qf_status qf_shor_sweep(const char* spec_json, unsigned threads, qf_result** out) {
    return make_result(out, [&] {
        need(spec_json, "spec_json");
        return run_shor_sweep(parse_shor_sweep_spec(spec_json), threads);
    });
}

qf_status qf_anneal_bench(const char* spec_json, unsigned threads, qf_result** out) {
    return make_result(out, [&] {
        need(spec_json, "spec_json");
        return run_anneal_benchmark(parse_anneal_bench_spec(spec_json), threads);
    });
}

qf_status qf_solve(const qf_model* model, const char* spec_json, unsigned threads, qf_result** out) {
    return make_result(out, [&] {
        need(model, "model");
        need(spec_json, "spec_json");
        return solve_model(model->model, parse_solve_spec(spec_json), threads);
    });
}

qf_status qf_fit(const char* data, qf_result** out) {
    return make_result(out, [&] {
        need(data, "data");
        return run_fit(parse_scaling_points(data));
    });
}

qf_status qf_fit_points(const double* l, const double* median, size_t count, double* exponent, double* intercept,
                        double* residual_norm) {
    return guarded([&] {
        if (count > 0) {
            need(l, "l");
            need(median, "median");
        }
        std::vector<ScalingPoint> pts;
        for (size_t i = 0; i < count; ++i) pts.push_back({l[i], median[i]});
        const auto fit = fit_scaling(pts);
        if (exponent) *exponent = fit.exponent;
        if (intercept) *intercept = fit.intercept;
        if (residual_norm) *residual_norm = fit.residual_norm;
    });
}

qf_status qf_result_emit(const qf_result* result, const char* dir, qf_format format) {
    return guarded([&] {
        need(result, "result");
        need(dir, "dir");
        if (format != QF_FORMAT_CSV && format != QF_FORMAT_SUMMARY)
            fail(ErrorCode::InvalidArgument, "unknown output format");
        const auto f = format == QF_FORMAT_CSV ? OutputFormat::Csv : OutputFormat::Summary;
        std::visit([&](const auto& r) { emit_results(r, dir, f); }, result->value);
    });
}

qf_status qf_result_summary(const qf_result* result, char** out) {
    return guarded([&] {
        need(result, "result");
        need(out, "out");
        *out = dup_string(std::visit([](const auto& r) { return summary_document(r); }, result->value));
    });
}

void qf_result_free(qf_result* result) { delete result; }

qf_status qf_model_build(const char* method, uint64_t n, unsigned l_p, unsigned l_q, qf_model** out) {
    return guarded([&] {
        need(out, "out");
        need(method, "method");
        *out = nullptr;
        auto h = std::make_unique<qf_model>();
        const Method m = parse_method(method);
        if (m == Method::Cfa) {
            h->cfa = build_cfa(n, l_p, l_q);
            h->model = h->cfa->model;
        } else {
            h->model = build_model(m, n, l_p, l_q).model;
        }
        *out = h.release();
    });
}

qf_status qf_model_read(const char* path, qf_model** out) {
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        auto in = open_in(path);
        auto h = std::make_unique<qf_model>();
        h->model = read_qubo(in);
        *out = h.release();
    });
}

qf_status qf_model_write(const qf_model* model, const char* path) {
    return guarded([&] {
        need(model, "model");
        auto out = open_out(path);
        write_qubo(out, model->model);
        finish_out(out, path);
    });
}

size_t qf_model_num_vars(const qf_model* model) { return model ? model->model.num_vars() : 0; }
size_t qf_model_num_couplers(const qf_model* model) { return model ? model->model.quadratic_terms().size() : 0; }
void qf_model_free(qf_model* model) { delete model; }

qf_status qf_graph_pegasus(unsigned m, const char* defects_path, qf_graph** out) {
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        DefectList defects;
        if (defects_path) {
            auto in = open_in(defects_path);
            defects = read_defects(in);
        }
        *out = new qf_graph{build_pegasus(m, defects)};
    });
}

size_t qf_graph_num_nodes(const qf_graph* g) { return g ? g->graph.num_nodes() : 0; }
size_t qf_graph_num_edges(const qf_graph* g) { return g ? g->graph.num_edges() : 0; }

qf_status qf_graph_write_edges(const qf_graph* g, const char* path) {
    return guarded([&] {
        need(g, "graph");
        auto out = open_out(path);
        for (auto [a, b] : g->graph.edges()) out << a << ' ' << b << '\n';
        finish_out(out, path);
    });
}

void qf_graph_free(qf_graph* g) { delete g; }

qf_status qf_embed(const qf_model* model, const qf_graph* graph, uint64_t seed, qf_embedding** out) {
    return guarded([&] {
        need(out, "out");
        need(model, "model");
        need(graph, "graph");
        *out = nullptr;
        Embedding e = model->cfa ? build_cfa_placement(*model->cfa, graph->graph)
                                 : embed_heuristic(model->model, graph->graph, seed);
        e.chain_strength = default_chain_strengths(model->model);
        *out = new qf_embedding{std::move(e)};
    });
}

qf_status qf_embedding_read(const char* path, qf_embedding** out) {
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        auto in = open_in(path);
        *out = new qf_embedding{read_embedding(in)};
    });
}

qf_status qf_embedding_write(const qf_embedding* e, const char* path) {
    return guarded([&] {
        need(e, "embedding");
        auto out = open_out(path);
        write_embedding(out, e->embedding);
        finish_out(out, path);
    });
}

size_t qf_embedding_num_qubits(const qf_embedding* e) { return e ? e->embedding.num_qubits() : 0; }
size_t qf_embedding_max_chain(const qf_embedding* e) { return e ? e->embedding.max_chain_length() : 0; }
void qf_embedding_free(qf_embedding* e) { delete e; }

qf_status qf_verify_embedding(const qf_model* model, const qf_graph* graph, const qf_embedding* e, int* valid,
                              char** report) {
    return guarded([&] {
        need(model, "model");
        need(graph, "graph");
        need(e, "embedding");
        need(valid, "valid");
        const auto r = verify_embedding(model->model, graph->graph, e->embedding);
        *valid = r.valid() ? 1 : 0;
        if (report) *report = dup_string(r.to_string());
    });
}

}  // extern "C"
