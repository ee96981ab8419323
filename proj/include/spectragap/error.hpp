/*
 * Copyright 2026 The spectragap Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace spectragap {

enum class ErrorKind {
    InvalidArgument,  // precondition or parameter-range violation
    ShapeMismatch,    // grid functions / fields on different grids
    NotConverged,     // iteration budget exhausted
    Indefinite,       // CG met non-positive curvature
    Io,
    Config,           // config parse or schema violation
    Internal,
};

/**
 * @brief Every failure raised by the library. The kind decides the C API
 * status code and the CLI exit code.
 */
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
    if (!cond) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace spectragap
