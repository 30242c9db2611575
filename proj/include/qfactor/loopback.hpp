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

#include <memory>
#include <string>

namespace qfactor {

//! Reference sampling service for tests: answers POST /v1/sample with the
//! exhaustive minimisers of the posted model, spreading num_reads over them.
class LoopbackServer {
  public:
    //! Deliberate misbehaviour for exercising the client.
    enum class Fault {
        None,
        NotJson,           //!< body is not a JSON document
        MissingField,      //!< no 'occurrences'
        ShortSample,       //!< first sample one bit short
        NonBinary,         //!< a 2 inside a sample
        WrongOccurrences,  //!< occurrences sum to num_reads + 1
        WrongEnergy,       //!< claimed energies off by one
        Reject,            //!< 200 with an 'error' message
        Busy,              //!< 503 with Retry-After on the first request
    };

    struct Options {
        unsigned max_vars = 20;
        Fault fault = Fault::None;
    };

    LoopbackServer();
    explicit LoopbackServer(Options options);
    ~LoopbackServer();
    LoopbackServer(const LoopbackServer&) = delete;
    LoopbackServer& operator=(const LoopbackServer&) = delete;

    //! Binds 127.0.0.1 on a free port (or `port`) and serves in the background.
    void start(int port = 0);
    void stop();
    int port() const noexcept;
    std::string endpoint() const;
    //! Requests handled so far.
    unsigned requests() const noexcept;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace qfactor
