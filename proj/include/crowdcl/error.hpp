/*
 * Copyright 2026 The crowdcl Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CROWDCL_ERROR_HPP
#define CROWDCL_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace crowdcl {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input file. Carries the 1-based line number when known
/// (line 0 means the failure is not tied to a specific line).
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(msg), line_(0) {}
    ParseError(const std::string& msg, std::size_t line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// A value violates a domain constraint (label out of range, type mismatch, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// The same (item, worker) pair was annotated more than once.
class DuplicateError : public Error {
public:
    using Error::Error;
};

/// A computation produced a non-finite intermediate result.
class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace crowdcl

#endif
