// Copyright 2026 The latentatlas Authors
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

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace latentatlas {

// Every failure raised by the library derives from Error so callers can catch
// one type at the boundary (the CLI maps it to exit code 2).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class InvalidDimension : public Error {
 public:
  using Error::Error;
};

class InvalidLayer : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Malformed weight file. `offset()` is the byte position where decoding
/// stopped making sense.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

class TrainingDiverged : public Error {
 public:
  TrainingDiverged(const std::string& what, int step)
      : Error(what + " at step " + std::to_string(step)), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, std::string path)
      : Error(what + ": " + path), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Study service / statistics.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class Conflict : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class Unauthorized : public Error {
 public:
  using Error::Error;
};

/// A statistic is mathematically undefined for the given data.
class Undefined : public Error {
 public:
  using Error::Error;
};

class NoData : public Error {
 public:
  using Error::Error;
};

}  // namespace latentatlas
