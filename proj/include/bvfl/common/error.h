//
// Copyright 2026 The BVFL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef BVFL_COMMON_ERROR_H_
#define BVFL_COMMON_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bvfl {

// Root of the library's exception hierarchy. Each subclass maps onto one of
// the error categories callers are expected to distinguish.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf produced or consumed where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// A documented precondition on arguments was violated.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Misuse of an API contract (e.g. backward from a non-scalar).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Federation protocol violations (round/index mismatches, missing clients).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Malformed wire frame. Carries the byte offset at which decoding failed.
class DecodeError : public Error {
 public:
  DecodeError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Malformed or inconsistent input files.
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid run configuration; `key()` names the offending config key.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// A metric is undefined for the given input (e.g. no comparable pairs).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

// Transport-level failure (socket closed, timeout).
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace bvfl

#endif  // BVFL_COMMON_ERROR_H_
