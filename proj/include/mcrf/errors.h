// Copyright 2026 The MCRF Authors.
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

#ifndef MCRF_ERRORS_H_
#define MCRF_ERRORS_H_

#include <stdexcept>
#include <string>

namespace mcrf {

// Base of every error thrown by the library. category() is a stable,
// machine-readable tag used by the command line front end.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& message)
      : std::runtime_error(message), category_(std::move(category)) {}
  const std::string& category() const { return category_; }

 private:
  std::string category_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& m) : Error("dimension", m) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& m) : Error("numeric", m) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& m) : Error("parse", m) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& m) : Error("format", m) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m) : Error("config", m) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& m) : Error("io", m) {}
};

class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& m) : Error("contract", m) {}
};

}  // namespace mcrf

#endif  // MCRF_ERRORS_H_
