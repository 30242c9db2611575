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


// qfactor command line. Everything below goes through the C API.

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qfactor/qfactor.h"

namespace {

using json = nlohmann::json;

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct CliFailure {
    int code;
    std::string message;
};

[[noreturn]] void usage_error(const std::string& msg) { throw CliFailure{kExitUsage, msg}; }

// Bad configuration content is a usage error; everything else is a runtime failure.
void check(qf_status s, bool from_spec = false) {
    if (s == QF_OK) return;
    const bool usage = s == QF_E_INVALID_ARGUMENT || (from_spec && s == QF_E_PARSE);
    throw CliFailure{usage ? kExitUsage : kExitRuntime,
                     std::string(qf_status_name(s)) + ": " + qf_last_error_message()};
}

std::string read_text(const std::string& path, bool usage) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliFailure{usage ? kExitUsage : kExitRuntime, "cannot read " + path};
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

template <typename T, void (*Free)(T*)>
struct Handle {
    T* p = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() { Free(p); }
};
using Result = Handle<qf_result, qf_result_free>;
using Model = Handle<qf_model, qf_model_free>;
using Graph = Handle<qf_graph, qf_graph_free>;
using Emb = Handle<qf_embedding, qf_embedding_free>;

std::string take_string(char* s) {
    std::string out = s ? s : "";
    qf_string_free(s);
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text) || (out.close(), !out)) throw CliFailure{kExitRuntime, "cannot write " + path};
}

std::string join(const std::string& dir, const char* name) { return dir.empty() ? name : dir + "/" + name; }

void make_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw CliFailure{kExitRuntime, "cannot create " + dir + ": " + ec.message()};
}

// A leaf command: the config document plus flag overrides applied on top.
class Command {
  public:
    Command(CLI::App& parent, const char* name, const char* help) : app_(parent.add_subcommand(name, help)) {
        app_->add_option("--config", config_path_, "JSON config mirroring the spec fields")->check(CLI::ExistingFile);
        app_->add_option("--out", out_, "output directory")->capture_default_str();
        app_->add_option("--format", format_, "csv or summary")
            ->check(CLI::IsMember({"csv", "summary"}))
            ->capture_default_str();
        flag<std::uint64_t>("--seed", "seed", "root seed");
    }

    template <typename T>
    CLI::Option* flag(const char* name, const char* key, const char* help) {
        auto value = std::make_shared<T>();
        CLI::Option* opt = app_->add_option(name, *value, help);
        apply_.push_back([opt, value, key](json& cfg) {
            if (opt->count() > 0) cfg[key] = *value;
        });
        return opt;
    }

    //! Value under a nested object, e.g. schedule.sweeps.
    template <typename T>
    CLI::Option* nested(const char* name, const char* object, const char* key, const char* help) {
        auto value = std::make_shared<T>();
        CLI::Option* opt = app_->add_option(name, *value, help);
        apply_.push_back([opt, value, object, key](json& cfg) {
            if (opt->count() > 0) cfg[object][key] = *value;
        });
        return opt;
    }

    CLI::Option* switch_flag(const char* name, const char* key, const char* help) {
        CLI::Option* opt = app_->add_flag(name)->description(help);
        apply_.push_back([opt, key](json& cfg) {
            if (opt->count() > 0) cfg[key] = true;
        });
        return opt;
    }

    CLI::App* app() const { return app_; }
    const std::string& out() const { return out_; }
    qf_format format() const { return format_ == "summary" ? QF_FORMAT_SUMMARY : QF_FORMAT_CSV; }

    json config() const {
        json cfg = json::object();
        if (!config_path_.empty()) {
            try {
                cfg = json::parse(read_text(config_path_, true));
            } catch (const json::parse_error& e) {
                usage_error("config " + config_path_ + ": " + e.what());
            }
            if (!cfg.is_object()) usage_error("config " + config_path_ + ": expected a JSON object");
        }
        for (const auto& f : apply_) f(cfg);
        return cfg;
    }

  private:
    CLI::App* app_;
    std::string config_path_;
    std::string out_ = "qfactor_out";
    std::string format_ = "csv";
    std::vector<std::function<void(json&)>> apply_;
};

// Pulls a key the C API does not take; leaves the rest for it.
template <typename T>
T extract(json& cfg, const char* key, T fallback) {
    auto it = cfg.find(key);
    if (it == cfg.end()) return fallback;
    T v;
    try {
        v = it->get<T>();
    } catch (const json::exception& e) {
        usage_error(std::string("config field '") + key + "': " + e.what());
    }
    cfg.erase(it);
    return v;
}

void no_leftovers(const json& cfg, const char* what) {
    if (!cfg.empty()) usage_error(std::string(what) + ": unknown config field '" + cfg.begin().key() + "'");
}

void finish(const Result& r, const Command& c) {
    check(qf_result_emit(r.p, c.out().c_str(), c.format()));
    char* s = nullptr;
    check(qf_result_summary(r.p, &s));
    std::cout << take_string(s);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Factoring experiments: Shor simulation and QUBO annealing benchmarks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", qf_version());
    unsigned threads = 0;
    app.add_option("--threads", threads, "worker threads, 0 for all (results do not depend on it)")
        ->capture_default_str();

    CLI::App* shor = app.add_subcommand("shor", "order-finding simulation")->require_subcommand(1);
    CLI::App* qubo = app.add_subcommand("qubo", "factoring QUBO models")->require_subcommand(1);
    CLI::App* anneal = app.add_subcommand("anneal", "annealing benchmarks")->require_subcommand(1);
    CLI::App* pegasus = app.add_subcommand("pegasus", "Pegasus hardware graphs")->require_subcommand(1);

    Command shor_run(*shor, "run", "shots of one factoring problem");
    shor_run.flag<std::uint64_t>("--p", "p", "first factor (with --q)");
    shor_run.flag<std::uint64_t>("--q", "q", "second factor");
    shor_run.flag<unsigned>("--L", "L", "bit length of a drawn semiprime when no factors are given");
    shor_run.flag<std::uint64_t>("--a", "a", "base (default: drawn)");
    shor_run.flag<unsigned>("--t", "t", "counting bits (default 2L)");
    shor_run.flag<double>("--delta", "delta", "rotation noise strength");
    shor_run.flag<unsigned>("--shots", "shots", "shots");
    shor_run.flag<unsigned>("--max-qubits", "max_qubits", "simulator qubit cap");

    Command shor_sweep(*shor, "sweep", "mean success per category over a noise grid");
    shor_sweep.flag<unsigned>("--L", "L", "semiprime bit length");
    shor_sweep.flag<std::vector<double>>("--delta", "delta_grid", "noise strengths")->delimiter(',');
    shor_sweep.flag<unsigned>("--problems", "problems_per_delta", "problems per delta");
    shor_sweep.flag<unsigned>("--shots", "shots_per_problem", "shots per problem");
    shor_sweep.flag<unsigned>("--t", "t", "counting bits (default 2L)");
    shor_sweep.flag<unsigned>("--c-max", "c_max", "multiplier bound of the extended post-processing");
    shor_sweep.flag<unsigned>("--max-qubits", "max_qubits", "simulator qubit cap");

    Command qubo_build(*qubo, "build", "build a factoring QUBO and optionally embed it");
    qubo_build.flag<std::string>("--method", "method", "direct, mc or cfa");
    qubo_build.flag<std::uint64_t>("--n", "n", "semiprime");
    qubo_build.flag<unsigned>("--lp", "l_p", "bit length of p");
    qubo_build.flag<unsigned>("--lq", "l_q", "bit length of q");
    qubo_build.flag<unsigned>("--pegasus", "pegasus_m", "embed into Pegasus of this size");
    qubo_build.flag<std::string>("--defects", "defects", "defect list for the Pegasus graph");

    Command qubo_solve(*qubo, "solve", "sample a QUBO model file");
    qubo_solve.flag<std::string>("--model", "model", "model file");
    qubo_solve.flag<std::string>("--sampler", "sampler", "sa, exhaustive or remote");
    qubo_solve.flag<std::uint64_t>("--reads", "reads", "reads");
    qubo_solve.flag<std::uint64_t>("--n", "n", "score reads against this semiprime");
    qubo_solve.flag<std::string>("--endpoint", "endpoint", "remote sampler URL");
    qubo_solve.nested<unsigned>("--sweeps", "schedule", "sweeps", "SA sweeps per read");
    qubo_solve.nested<double>("--beta-start", "schedule", "beta_start", "initial inverse temperature");
    qubo_solve.nested<double>("--beta-end", "schedule", "beta_end", "final inverse temperature");

    Command bench(*anneal, "bench", "success frequency versus unknown bits");
    bench.flag<std::string>("--method", "method", "direct, mc or cfa");
    bench.flag<std::vector<unsigned>>("--l", "l_values", "unknown-bit counts")->delimiter(',');
    bench.flag<unsigned>("--semiprimes", "semiprimes_per_l", "semiprimes per l");
    bench.flag<std::uint64_t>("--reads", "reads_per_problem", "reads per problem");
    bench.flag<std::string>("--sampler", "sampler", "sa, exhaustive or remote");
    bench.flag<std::string>("--endpoint", "endpoint", "remote sampler URL");
    bench.flag<unsigned>("--pegasus", "pegasus_m", "embed into Pegasus of this size first");
    bench.switch_flag("--sweep-split", "sweep_split", "walk factor-length splits per problem");
    bench.nested<unsigned>("--sweeps", "schedule", "sweeps", "SA sweeps per read");
    bench.nested<double>("--beta-start", "schedule", "beta_start", "initial inverse temperature");
    bench.nested<double>("--beta-end", "schedule", "beta_end", "final inverse temperature");

    Command fit(app, "fit", "exponential fit to per-l medians");
    fit.flag<std::string>("--data", "data", "file of 'l median' lines");

    Command peg_gen(*pegasus, "gen", "write a Pegasus edge list");
    peg_gen.flag<unsigned>("--m", "m", "graph size");
    peg_gen.flag<std::string>("--defects", "defects", "defect list");

    Command peg_verify(*pegasus, "verify", "check an embedding against a model and graph");
    peg_verify.flag<std::string>("--model", "model", "model file");
    peg_verify.flag<std::string>("--embedding", "embedding", "embedding file");
    peg_verify.flag<unsigned>("--m", "m", "graph size");
    peg_verify.flag<std::string>("--defects", "defects", "defect list");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (shor_run.app()->parsed()) {
            Result r;
            check(qf_shor_run(shor_run.config().dump().c_str(), threads, &r.p), true);
            finish(r, shor_run);
        } else if (shor_sweep.app()->parsed()) {
            Result r;
            check(qf_shor_sweep(shor_sweep.config().dump().c_str(), threads, &r.p), true);
            finish(r, shor_sweep);
        } else if (bench.app()->parsed()) {
            Result r;
            check(qf_anneal_bench(bench.config().dump().c_str(), threads, &r.p), true);
            finish(r, bench);
        } else if (qubo_solve.app()->parsed()) {
            json cfg = qubo_solve.config();
            const auto path = extract<std::string>(cfg, "model", "");
            if (path.empty()) usage_error("qubo solve: --model is required");
            Model m;
            check(qf_model_read(path.c_str(), &m.p));
            Result r;
            check(qf_solve(m.p, cfg.dump().c_str(), threads, &r.p), true);
            finish(r, qubo_solve);
        } else if (fit.app()->parsed()) {
            json cfg = fit.config();
            const auto path = extract<std::string>(cfg, "data", "");
            extract<std::uint64_t>(cfg, "seed", 0);  // accepted for uniformity, unused
            no_leftovers(cfg, "fit");
            if (path.empty()) usage_error("fit: --data is required");
            Result r;
            check(qf_fit(read_text(path, false).c_str(), &r.p));
            finish(r, fit);
        } else if (qubo_build.app()->parsed()) {
            json cfg = qubo_build.config();
            const auto method = extract<std::string>(cfg, "method", "direct");
            const auto n = extract<std::uint64_t>(cfg, "n", 0);
            const auto l_p = extract<unsigned>(cfg, "l_p", 0);
            const auto l_q = extract<unsigned>(cfg, "l_q", 0);
            const auto m = extract<unsigned>(cfg, "pegasus_m", 0);
            const auto defects = extract<std::string>(cfg, "defects", "");
            const auto seed = extract<std::uint64_t>(cfg, "seed", 1);
            no_leftovers(cfg, "qubo build");
            if (n == 0 || l_p == 0 || l_q == 0) usage_error("qubo build: --n, --lp and --lq are required");
            Model model;
            check(qf_model_build(method.c_str(), n, l_p, l_q, &model.p), true);
            const std::string dir = qubo_build.out();
            make_dir(dir);
            json summary = {{"kind", "qubo_build"}, {"method", method}, {"n", n},
                            {"l_p", l_p},           {"l_q", l_q},       {"seed", seed},
                            {"variables", qf_model_num_vars(model.p)},
                            {"couplers", qf_model_num_couplers(model.p)}};
            const bool csv = qubo_build.format() == QF_FORMAT_CSV;
            if (csv) check(qf_model_write(model.p, join(dir, "model.qubo").c_str()));
            if (m != 0) {
                Graph g;
                check(qf_graph_pegasus(m, defects.empty() ? nullptr : defects.c_str(), &g.p));
                Emb e;
                check(qf_embed(model.p, g.p, seed, &e.p));
                if (csv) check(qf_embedding_write(e.p, join(dir, "embedding.txt").c_str()));
                summary["pegasus_m"] = m;
                summary["qubits"] = qf_embedding_num_qubits(e.p);
                summary["max_chain"] = qf_embedding_max_chain(e.p);
            }
            const std::string text = summary.dump(2) + "\n";
            write_text(join(dir, "summary.json"), text);
            std::cout << text;
        } else if (peg_gen.app()->parsed()) {
            json cfg = peg_gen.config();
            const auto m = extract<unsigned>(cfg, "m", 16);
            const auto defects = extract<std::string>(cfg, "defects", "");
            extract<std::uint64_t>(cfg, "seed", 0);  // deterministic construction
            no_leftovers(cfg, "pegasus gen");
            Graph g;
            check(qf_graph_pegasus(m, defects.empty() ? nullptr : defects.c_str(), &g.p), true);
            const std::string dir = peg_gen.out();
            make_dir(dir);
            if (peg_gen.format() == QF_FORMAT_CSV) check(qf_graph_write_edges(g.p, join(dir, "pegasus_edges.txt").c_str()));
            const json summary = {{"kind", "pegasus_gen"},
                                  {"m", m},
                                  {"defects", defects},
                                  {"nodes", qf_graph_num_nodes(g.p)},
                                  {"edges", qf_graph_num_edges(g.p)}};
            const std::string text = summary.dump(2) + "\n";
            write_text(join(dir, "summary.json"), text);
            std::cout << text;
        } else if (peg_verify.app()->parsed()) {
            json cfg = peg_verify.config();
            const auto model_path = extract<std::string>(cfg, "model", "");
            const auto emb_path = extract<std::string>(cfg, "embedding", "");
            const auto m = extract<unsigned>(cfg, "m", 16);
            const auto defects = extract<std::string>(cfg, "defects", "");
            extract<std::uint64_t>(cfg, "seed", 0);
            no_leftovers(cfg, "pegasus verify");
            if (model_path.empty() || emb_path.empty()) usage_error("pegasus verify: --model and --embedding are required");
            Model model;
            check(qf_model_read(model_path.c_str(), &model.p));
            Emb e;
            check(qf_embedding_read(emb_path.c_str(), &e.p));
            Graph g;
            check(qf_graph_pegasus(m, defects.empty() ? nullptr : defects.c_str(), &g.p), true);
            int valid = 0;
            char* report = nullptr;
            check(qf_verify_embedding(model.p, g.p, e.p, &valid, &report));
            const std::string text = take_string(report);
            const std::string dir = peg_verify.out();
            make_dir(dir);
            const json summary = {{"kind", "pegasus_verify"},
                                  {"m", m},
                                  {"valid", valid == 1},
                                  {"qubits", qf_embedding_num_qubits(e.p)},
                                  {"max_chain", qf_embedding_max_chain(e.p)},
                                  {"report", text}};
            write_text(join(dir, "summary.json"), summary.dump(2) + "\n");
            std::cout << text;
            if (!valid) return kExitRuntime;
        }
    } catch (const CliFailure& f) {
        std::cerr << "qfactor: " << f.message << "\n";
        return f.code;
    }
    return 0;
}
