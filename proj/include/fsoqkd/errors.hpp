// Copyright 2026 The fsoqkd Authors
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

namespace fsoqkd {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument lies outside the domain of the function (e.g. T > 1, nu < 1).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Quadrature or eigen-solver failure. Carries the achieved error estimate
// when one is available.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what, double achieved_error = 0.0)
      : Error(what), achieved_error_(achieved_error) {}
  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

// A physically or structurally invalid configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Config document could not be parsed. key_path() names the offending key.
class ParseError : public ConfigError {
 public:
  ParseError(std::string key_path, const std::string& message)
      : ConfigError(key_path.empty() ? message : key_path + ": " + message),
        key_path_(std::move(key_path)) {}
  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

class IoError : public Error {
 public:
  IoError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

namespace detail {

inline void require(bool ok, const char* message) {
  if (!ok) throw DomainError(message);
}

}  // namespace detail
}  // namespace fsoqkd
