// Copyright 2026 The efleaf Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace efleaf {

// Every error thrown by the library derives from Error, so callers that only
// care about "did it work" can catch one type. The CLI maps ConfigError and
// ArgumentError to the usage exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid construction parameters (plan, bank, run configuration).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Invalid argument to a single operation (even kernel size, stride < 1, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Input outside the mathematical domain (negative frequency, negative energy).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Tensor shapes do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Operation called in the wrong state (eval-mode batch norm before training).
class StateError : public Error {
 public:
  using Error::Error;
};

// Malformed, truncated or mismatched file contents.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A non-finite value showed up inside a named stage.
class NumericError : public Error {
 public:
  NumericError(const std::string& stage, const std::string& what)
      : Error("non-finite value in stage '" + stage + "': " + what),
        stage_(stage) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace efleaf
