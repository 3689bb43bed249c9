//
// Copyright (C) 2026 The deltatree Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace deltatree {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on caller-supplied arguments was violated.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// An input file could not be parsed or failed validation.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing a file failed at the OS level.
class IoError : public Error {
 public:
  using Error::Error;
};

/// The requested metric is unknown or cannot serve the requested operation.
class UnsupportedMetric : public Error {
 public:
  using Error::Error;
};

/// A query or index was opened under a metric other than the one it was built with.
class MetricMismatch : public Error {
 public:
  using Error::Error;
};

/// An index is structurally corrupt. `node()` names the node whose bytes failed
/// to decode, or `kNoNode` when the damage is in the header.
class IntegrityError : public Error {
 public:
  static constexpr std::uint64_t kNoNode = ~std::uint64_t{0};

  explicit IntegrityError(const std::string& what, std::uint64_t node = kNoNode)
      : Error(node == kNoNode ? what : what + " (node " + std::to_string(node) + ")"),
        node_(node) {}

  std::uint64_t node() const noexcept { return node_; }

 private:
  std::uint64_t node_;
};

}  // namespace deltatree
