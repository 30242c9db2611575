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


#include <httplib.h>

#include <chrono>
#include <cmath>
#include <json.hpp>
#include <thread>

#include "qfactor/error.hpp"
#include "qfactor/samplers.hpp"

namespace qfactor {

using nlohmann::json;

namespace {

[[noreturn]] void protocol_error(const std::string& what) {
    throw RemoteError(ErrorCode::RemoteProtocol, "malformed sample response: " + what);
}

json parse_document(const std::string& body, bool response) {
    try {
        return json::parse(body);
    } catch (const json::exception& e) {
        if (response) protocol_error(std::string("not a JSON document (") + e.what() + ")");
        fail(ErrorCode::Parse, std::string("sample request is not a JSON document: ") + e.what());
    }
}

// Integer that fits the requested type exactly; JSON floats are refused.
template <typename T>
std::optional<T> exact_integer(const json& v) {
    if (v.is_number_unsigned()) {
        const auto u = v.get<std::uint64_t>();
        if (u > static_cast<std::uint64_t>(std::numeric_limits<T>::max())) return std::nullopt;
        return static_cast<T>(u);
    }
    if (v.is_number_integer()) {
        const auto s = v.get<std::int64_t>();
        if (s < 0 && !std::numeric_limits<T>::is_signed) return std::nullopt;
        return static_cast<T>(s);
    }
    return std::nullopt;
}

std::optional<double> parse_retry_after(const httplib::Result& res) {
    if (!res || !res->has_header("Retry-After")) return std::nullopt;
    try {
        const double seconds = std::stod(res->get_header_value("Retry-After"));
        if (std::isfinite(seconds) && seconds >= 0) return seconds;
    } catch (const std::exception&) {
    }
    return std::nullopt;
}

}  // namespace

std::string encode_sample_request(const QuboModel& model, u64 num_reads,
                                  const std::map<std::string, std::string>& params) {
    json terms = json::array();
    for (std::size_t i = 0; i < model.num_vars(); ++i)
        if (model.linear(i) != 0) terms.push_back({i, i, model.linear(i)});
    for (const auto& [key, c] : model.quadratic_terms()) terms.push_back({key.first, key.second, c});
    json doc;
    doc["n"] = model.num_vars();
    doc["offset"] = model.offset();
    doc["terms"] = std::move(terms);
    doc["num_reads"] = num_reads;
    doc["params"] = json::object();
    for (const auto& [k, v] : params) doc["params"][k] = v;
    return doc.dump();
}

SampleRequest decode_sample_request(const std::string& body) {
    const json doc = parse_document(body, false);
    auto bad = [](const std::string& what) { fail(ErrorCode::Parse, "malformed sample request: " + what); };
    if (!doc.is_object()) bad("not an object");
    for (const char* key : {"n", "offset", "terms", "num_reads"})
        if (!doc.contains(key)) bad(std::string("missing '") + key + "'");
    const auto n = exact_integer<std::uint32_t>(doc["n"]);
    const auto offset = exact_integer<coeff_t>(doc["offset"]);
    const auto reads = exact_integer<u64>(doc["num_reads"]);
    if (!n) bad("'n' is not a non-negative integer");
    if (!offset) bad("'offset' is not an integer");
    if (!reads || *reads == 0) bad("'num_reads' is not a positive integer");
    SampleRequest req;
    for (std::uint32_t i = 0; i < *n; ++i) req.model.add_variable({RoleKind::Reduction, i, 0});
    req.model.add_offset(*offset);
    if (!doc["terms"].is_array()) bad("'terms' is not a list");
    for (const auto& t : doc["terms"]) {
        if (!t.is_array() || t.size() != 3) bad("term is not a triple");
        const auto i = exact_integer<std::uint32_t>(t[0]);
        const auto j = exact_integer<std::uint32_t>(t[1]);
        const auto c = exact_integer<coeff_t>(t[2]);
        if (!i || !j || !c || *i > *j || *j >= *n) bad("term " + t.dump() + " is out of range");
        if (*i == *j)
            req.model.add_linear(*i, *c);
        else
            req.model.add_quadratic(*i, *j, *c);
    }
    req.num_reads = *reads;
    if (doc.contains("params")) {
        if (!doc["params"].is_object()) bad("'params' is not a map");
        for (const auto& [k, v] : doc["params"].items()) req.params[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    return req;
}

std::string encode_sample_response(const std::vector<SampleRecord>& records) {
    json samples = json::array(), energies = json::array(), occurrences = json::array();
    for (const auto& r : records) {
        json bits = json::array();
        for (auto b : r.assignment) bits.push_back(static_cast<int>(b));
        samples.push_back(std::move(bits));
        energies.push_back(r.energy);
        occurrences.push_back(r.occurrences);
    }
    json doc;
    doc["samples"] = std::move(samples);
    doc["energies"] = std::move(energies);
    doc["occurrences"] = std::move(occurrences);
    return doc.dump();
}

std::string encode_error_response(const std::string& message) {
    json doc;
    doc["error"] = message;
    return doc.dump();
}

SampleSet decode_sample_response(const std::string& body, const QuboModel& model, u64 num_reads) {
    const json doc = parse_document(body, true);
    if (!doc.is_object()) protocol_error("not an object");
    if (doc.contains("error") && !doc["error"].is_null()) {
        if (!doc["error"].is_string()) protocol_error("'error' is not a string");
        throw RemoteError(ErrorCode::RemoteRejected, "sampler rejected the request: " + doc["error"].get<std::string>());
    }
    for (const char* key : {"samples", "energies", "occurrences"})
        if (!doc.contains(key) || !doc[key].is_array()) protocol_error(std::string("'") + key + "' missing or not a list");
    const auto& samples = doc["samples"];
    const auto& energies = doc["energies"];
    const auto& occurrences = doc["occurrences"];
    if (samples.size() != energies.size() || samples.size() != occurrences.size())
        protocol_error("'samples', 'energies' and 'occurrences' differ in length");
    if (samples.empty()) protocol_error("no samples");
    const std::size_t n = model.num_vars();
    std::vector<SampleRecord> records;
    records.reserve(samples.size());
    u64 total = 0;
    for (std::size_t r = 0; r < samples.size(); ++r) {
        const auto& s = samples[r];
        if (!s.is_array() || s.size() != n)
            protocol_error("sample " + std::to_string(r) + " does not have " + std::to_string(n) + " bits");
        SampleRecord rec;
        rec.assignment.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto bit = exact_integer<unsigned>(s[i]);
            if (!bit || *bit > 1) protocol_error("sample " + std::to_string(r) + " has a non-binary entry");
            rec.assignment[i] = static_cast<std::uint8_t>(*bit);
        }
        const auto occ = exact_integer<u64>(occurrences[r]);
        if (!occ || *occ == 0) protocol_error("occurrence " + std::to_string(r) + " is not a positive integer");
        if (*occ > num_reads - total) protocol_error("occurrences exceed num_reads");
        total += *occ;
        rec.occurrences = *occ;
        if (!energies[r].is_number()) protocol_error("energy " + std::to_string(r) + " is not a number");
        const coeff_t local = model.evaluate(rec.assignment);
        if (const auto claimed = exact_integer<coeff_t>(energies[r])) {
            rec.energy_mismatch = *claimed != local;
        } else {
            const double d = energies[r].get<double>();
            rec.energy_mismatch = !(std::abs(d - static_cast<double>(local)) <= 1e-9 * std::max(1.0, std::abs(d)));
        }
        records.push_back(std::move(rec));
    }
    if (total != num_reads)
        protocol_error("occurrences sum to " + std::to_string(total) + ", expected " + std::to_string(num_reads));
    return make_sample_set(model, std::move(records), "remote", 0, "");
}

SampleSet remote_sample(const std::string& endpoint, const QuboModel& model, u64 num_reads,
                        const std::map<std::string, std::string>& params, const RemoteOptions& options) {
    if (num_reads < 1) fail(ErrorCode::InvalidArgument, "remote_sample needs at least one read");
    httplib::Client client(endpoint);
    if (!client.is_valid()) fail(ErrorCode::InvalidArgument, "unusable endpoint '" + endpoint + "'");
    auto seconds = [](double s) { return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::duration<double>(s)); };
    client.set_connection_timeout(seconds(options.connect_timeout));
    client.set_read_timeout(seconds(options.read_timeout));
    const std::string body = encode_sample_request(model, num_reads, params);
    const unsigned attempts = std::max(1u, options.max_attempts);
    std::string last_problem;
    std::optional<double> retry_after;
    for (unsigned attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(seconds(std::min(retry_after.value_or(options.retry_delay), 30.0)));
        auto res = client.Post("/v1/sample", body, "application/json");
        if (!res) {
            last_problem = "cannot reach " + endpoint + ": " + httplib::to_string(res.error());
            retry_after.reset();
            continue;
        }
        if (res->status == 429 || res->status == 503) {
            last_problem = endpoint + " is busy (HTTP " + std::to_string(res->status) + ")";
            retry_after = parse_retry_after(res);
            continue;
        }
        if (res->status >= 400 && res->status < 500) {
            std::string message = "HTTP " + std::to_string(res->status);
            try {
                const json doc = json::parse(res->body);
                if (doc.is_object() && doc.contains("error") && doc["error"].is_string())
                    message += ": " + doc["error"].get<std::string>();
            } catch (const json::exception&) {
            }
            throw RemoteError(ErrorCode::RemoteRejected, "sampler rejected the request: " + message);
        }
        if (res->status != 200) {
            last_problem = endpoint + " failed with HTTP " + std::to_string(res->status);
            retry_after = parse_retry_after(res);
            continue;
        }
        return decode_sample_response(res->body, model, num_reads);
    }
    throw RemoteError(ErrorCode::RemoteConnection,
                      last_problem + " (gave up after " + std::to_string(attempts) + " attempts)",
                      retry_after.value_or(options.retry_delay));
}

}  // namespace qfactor
