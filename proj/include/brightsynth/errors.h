// Copyright 2026 The Brightsynth Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef BRIGHTSYNTH_ERRORS_H_
#define BRIGHTSYNTH_ERRORS_H_

#include <stdexcept>
#include <string>

namespace brightsynth {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters or configuration values.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error("configuration error: " + what) {}
};

// Tensor or image dimensions that do not line up.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what)
      : Error("shape error: " + what) {}
};

// Requested more elements than a pool or input provides.
class SizeError : public Error {
 public:
  explicit SizeError(const std::string& what) : Error("size error: " + what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("I/O error: " + what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error("numerical error: " + what) {}
};

// Malformed or inconsistent input data (manifests, id sets, records).
class InputError : public Error {
 public:
  explicit InputError(const std::string& what)
      : Error("input error: " + what) {}
};

}  // namespace brightsynth

#endif  // BRIGHTSYNTH_ERRORS_H_
