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


/* Plain C client of the shared library. */

#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "qfactor/qfactor.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
    do {                                                               \
        if (!(cond)) {                                                 \
            fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
            ++failures;                                                \
        }                                                              \
    } while (0)

int main(void) {
    qf_model* model = NULL;
    qf_graph* graph = NULL;
    qf_embedding* emb = NULL;
    qf_result* result = NULL;
    char* text = NULL;
    int valid = 0;
    double b = 0, c = 0, res = 0;
    const double l[3] = {4, 6, 8};
    const double med[3] = {0.25, 0.125, 0.0625};

    EXPECT(qf_model_build("direct", 143, 4, 4, &model) == QF_OK);
    EXPECT(qf_model_num_vars(model) == 8);
    EXPECT(qf_solve(model, "{\"sampler\": \"exhaustive\", \"reads\": 10, \"n\": 143}", 1, &result) == QF_OK);
    EXPECT(qf_result_summary(result, &text) == QF_OK);
    EXPECT(text && strstr(text, "\"success_frequency\": 1.0") != NULL);
    qf_string_free(text);
    qf_result_free(result);
    result = NULL;

    EXPECT(qf_graph_pegasus(4, NULL, &graph) == QF_OK);
    EXPECT(qf_graph_num_nodes(graph) == 264);
    EXPECT(qf_embed(model, graph, 1, &emb) == QF_OK);
    EXPECT(qf_verify_embedding(model, graph, emb, &valid, &text) == QF_OK);
    EXPECT(valid == 1);
    qf_string_free(text);

    EXPECT(qf_fit_points(l, med, 3, &b, &c, &res) == QF_OK);
    EXPECT(b > -0.5000001 && b < -0.4999999);
    EXPECT(qf_fit_points(l, med, 1, &b, &c, &res) == QF_E_INVALID_ARGUMENT);
    EXPECT(strlen(qf_last_error_message()) > 0);

    qf_embedding_free(emb);
    qf_graph_free(graph);
    qf_model_free(model);

    EXPECT(qf_model_build("nope", 143, 4, 4, &model) == QF_E_INVALID_ARGUMENT);
    EXPECT(model == NULL);
    EXPECT(qf_shor_run("{\"p\": 5, \"q\": 7, \"a\": 7}", 1, &result) == QF_E_PRECONDITION);
    EXPECT(result == NULL);
    EXPECT(qf_shor_sweep("{\"L\": 7, \"oops\": 1}", 1, &result) == QF_E_PARSE);
    EXPECT(qf_shor_run("{\"p\": 5, \"q\": 7, \"shots\": 4}", 1, &result) == QF_OK);
    EXPECT(qf_result_emit(result, "/proc/qfactor_cannot_write_here", QF_FORMAT_CSV) == QF_E_IO);
    EXPECT(qf_model_read("/nonexistent/model.qubo", &model) == QF_E_IO);
    EXPECT(strcmp(qf_status_name(QF_E_REMOTE_PROTOCOL), "remote protocol error") == 0);

    EXPECT(model == NULL);
    qf_result_free(result);
    qf_model_free(NULL);
    return failures == 0 ? 0 : 1;
}
