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


#ifndef QFACTOR_QFACTOR_H
#define QFACTOR_QFACTOR_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define QF_API __declspec(dllexport)
#else
#define QF_API __attribute__((visibility("default")))
#endif

typedef enum qf_status {
    QF_OK = 0,
    QF_E_INVALID_ARGUMENT = 1,
    QF_E_PRECONDITION = 2,
    QF_E_CAPACITY = 3,
    QF_E_OVERFLOW = 4,
    QF_E_PARSE = 5,
    QF_E_IO = 6,
    QF_E_EMBEDDING = 7,
    QF_E_REMOTE_CONNECTION = 8,
    QF_E_REMOTE_PROTOCOL = 9,
    QF_E_REMOTE_REJECTED = 10,
    QF_E_INTERNAL = 11
} qf_status;

typedef enum qf_format { QF_FORMAT_CSV = 0, QF_FORMAT_SUMMARY = 1 } qf_format;

typedef struct qf_model qf_model;
typedef struct qf_graph qf_graph;
typedef struct qf_embedding qf_embedding;
typedef struct qf_result qf_result;

/* Message of the last failed call on this thread; "" after a success. */
QF_API const char* qf_last_error_message(void);
QF_API const char* qf_status_name(qf_status status);
QF_API const char* qf_version(void);
/* Releases strings returned through char** out-parameters. */
QF_API void qf_string_free(char* s);

/* Experiments. spec_json is a JSON object keyed by spec field names;
   missing keys keep their defaults. threads = 0 uses every hardware thread;
   results do not depend on it. */
QF_API qf_status qf_shor_run(const char* spec_json, unsigned threads, qf_result** out);
QF_API qf_status qf_shor_sweep(const char* spec_json, unsigned threads, qf_result** out);
QF_API qf_status qf_anneal_bench(const char* spec_json, unsigned threads, qf_result** out);
QF_API qf_status qf_solve(const qf_model* model, const char* spec_json, unsigned threads, qf_result** out);
/* data: lines of "l median" (comma or whitespace separated, '#' comments). */
QF_API qf_status qf_fit(const char* data, qf_result** out);
QF_API qf_status qf_fit_points(const double* l, const double* median, size_t count, double* exponent,
                               double* intercept, double* residual_norm);

/* Writes the result files into dir (created if missing). */
QF_API qf_status qf_result_emit(const qf_result* result, const char* dir, qf_format format);
QF_API qf_status qf_result_summary(const qf_result* result, char** out);
QF_API void qf_result_free(qf_result* result);

/* QUBO models. method: "direct", "mc" or "cfa". */
QF_API qf_status qf_model_build(const char* method, uint64_t n, unsigned l_p, unsigned l_q, qf_model** out);
QF_API qf_status qf_model_read(const char* path, qf_model** out);
QF_API qf_status qf_model_write(const qf_model* model, const char* path);
QF_API size_t qf_model_num_vars(const qf_model* model);
QF_API size_t qf_model_num_couplers(const qf_model* model);
QF_API void qf_model_free(qf_model* model);

/* Pegasus graphs. defects_path may be NULL. */
QF_API qf_status qf_graph_pegasus(unsigned m, const char* defects_path, qf_graph** out);
QF_API size_t qf_graph_num_nodes(const qf_graph* graph);
QF_API size_t qf_graph_num_edges(const qf_graph* graph);
/* One "a b" line per edge, a < b, sorted. */
QF_API qf_status qf_graph_write_edges(const qf_graph* graph, const char* path);
QF_API void qf_graph_free(qf_graph* graph);

/* Minor embeddings. CFA models built in this session use the tile
   placement; everything else the seeded heuristic. */
QF_API qf_status qf_embed(const qf_model* model, const qf_graph* graph, uint64_t seed, qf_embedding** out);
QF_API qf_status qf_embedding_read(const char* path, qf_embedding** out);
QF_API qf_status qf_embedding_write(const qf_embedding* embedding, const char* path);
QF_API size_t qf_embedding_num_qubits(const qf_embedding* embedding);
QF_API size_t qf_embedding_max_chain(const qf_embedding* embedding);
QF_API void qf_embedding_free(qf_embedding* embedding);
/* *valid is 1 or 0. report may be NULL; otherwise it receives "valid" or
   the list of violations. */
QF_API qf_status qf_verify_embedding(const qf_model* model, const qf_graph* graph, const qf_embedding* embedding,
                                     int* valid, char** report);

#ifdef __cplusplus
}
#endif

#endif
