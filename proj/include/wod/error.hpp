// Copyright 2026 The wod Authors
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

namespace wod {

/// Base class for every failure raised by the library. The CLI maps the
/// concrete subclass onto its exit-code scheme.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or unknown configuration (exit code 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data or a data-dependent precondition failure (exit code 2).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown, e.g. a covariance that cannot be factorized (exit code 3).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace wod
