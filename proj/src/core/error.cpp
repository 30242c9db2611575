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

#include "qfactor/error.hpp"

namespace qfactor {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid argument";
        case ErrorCode::Precondition: return "precondition violated";
        case ErrorCode::Capacity: return "capacity exceeded";
        case ErrorCode::Overflow: return "coefficient overflow";
        case ErrorCode::Parse: return "parse error";
        case ErrorCode::Io: return "i/o error";
        case ErrorCode::Embedding: return "embedding failure";
        case ErrorCode::RemoteConnection: return "remote connection failure";
        case ErrorCode::RemoteProtocol: return "remote protocol violation";
        case ErrorCode::RemoteRejected: return "remote rejection";
    }
    return "unknown";
}

}  // namespace qfactor
