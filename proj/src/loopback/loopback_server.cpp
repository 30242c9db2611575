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


#include "qfactor/loopback.hpp"

#include <httplib.h>

#include <atomic>
#include <json.hpp>
#include <thread>

#include "qfactor/error.hpp"
#include "qfactor/samplers.hpp"

namespace qfactor {

struct LoopbackServer::Impl {
    Options options;
    httplib::Server server;
    std::thread worker;
    int port = -1;
    std::atomic<unsigned> requests{0};

    std::string respond(const std::string& body, httplib::Response& res);
};

std::string LoopbackServer::Impl::respond(const std::string& body, httplib::Response& res) {
    const unsigned index = requests++;
    SampleRequest req;
    try {
        req = decode_sample_request(body);
    } catch (const Error& e) {
        res.status = 400;
        return encode_error_response(e.what());
    }
    if (req.model.num_vars() > options.max_vars) {
        res.status = 413;
        return encode_error_response("model has " + std::to_string(req.model.num_vars()) + " variables, limit is " +
                                     std::to_string(options.max_vars));
    }
    switch (options.fault) {
        case Fault::NotJson:
            return "samples: [0, 1]";
        case Fault::Reject:
            return encode_error_response("loopback refuses this request");
        case Fault::Busy:
            if (index == 0) {
                res.status = 503;
                res.set_header("Retry-After", "0.05");
                return encode_error_response("busy");
            }
            break;
        default:
            break;
    }
    const auto solved = solve_exhaustive(req.model, static_cast<std::size_t>(req.num_reads));
    // Reads go round-robin over the minimisers.
    std::vector<SampleRecord> records;
    const std::size_t k = solved.minimisers.size();
    for (std::size_t i = 0; i < k; ++i) {
        const u64 share = req.num_reads / k + (i < req.num_reads % k ? 1 : 0);
        records.push_back({solved.minimisers[i], solved.energy, share, false});
    }
    switch (options.fault) {
        case Fault::ShortSample:
            if (!records.front().assignment.empty()) records.front().assignment.pop_back();
            break;
        case Fault::NonBinary:
            if (!records.front().assignment.empty()) records.front().assignment.front() = 2;
            break;
        case Fault::WrongOccurrences:
            ++records.front().occurrences;
            break;
        case Fault::WrongEnergy:
            for (auto& r : records) ++r.energy;
            break;
        default:
            break;
    }
    std::string out = encode_sample_response(records);
    if (options.fault == Fault::MissingField) {
        auto doc = nlohmann::json::parse(out);
        doc.erase("occurrences");
        out = doc.dump();
    }
    return out;
}

LoopbackServer::LoopbackServer() : LoopbackServer(Options{}) {}

LoopbackServer::LoopbackServer(Options options) : impl_(std::make_unique<Impl>()) {
    impl_->options = options;
    impl_->server.Post("/v1/sample", [impl = impl_.get()](const httplib::Request& req, httplib::Response& res) {
        res.status = 200;
        std::string body;
        try {
            body = impl->respond(req.body, res);
        } catch (const std::exception& e) {
            res.status = 500;
            body = encode_error_response(e.what());
        }
        res.set_content(body, "application/json");
    });
}

LoopbackServer::~LoopbackServer() { stop(); }

void LoopbackServer::start(int port) {
    if (impl_->worker.joinable()) fail(ErrorCode::Precondition, "loopback server already running");
    impl_->port = port == 0 ? impl_->server.bind_to_any_port("127.0.0.1") : (impl_->server.bind_to_port("127.0.0.1", port) ? port : -1);
    if (impl_->port < 0) fail(ErrorCode::Io, "loopback server cannot bind 127.0.0.1:" + std::to_string(port));
    impl_->worker = std::thread([impl = impl_.get()] { impl->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void LoopbackServer::stop() {
    if (!impl_ || !impl_->worker.joinable()) return;
    impl_->server.stop();
    impl_->worker.join();
}

int LoopbackServer::port() const noexcept { return impl_->port; }

std::string LoopbackServer::endpoint() const { return "http://127.0.0.1:" + std::to_string(impl_->port); }

unsigned LoopbackServer::requests() const noexcept { return impl_->requests.load(); }

}  // namespace qfactor
