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

#include <optional>
#include <stdexcept>
#include <string>

namespace qfactor {

enum class ErrorCode {
    InvalidArgument,
    Precondition,     // e.g. gcd(a, N) != 1
    Capacity,         // qubit cap, exhaustive cap, cost cap
    Overflow,         // coefficient range exceeded
    Parse,
    Io,
    Embedding,
    RemoteConnection,
    RemoteProtocol,
    RemoteRejected,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

//! Failure talking to a remote sampling service. retry_after is set when the
//! server (or the transport) suggested a delay before the next attempt.
class RemoteError : public Error {
  public:
    RemoteError(ErrorCode code, const std::string& what, std::optional<double> retry_after = {})
        : Error(code, what), retry_after_(retry_after) {}
    std::optional<double> retry_after() const noexcept { return retry_after_; }

  private:
    std::optional<double> retry_after_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace qfactor
