// Copyright 2026 The spanparse Authors.
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

#ifndef SPANPARSE_ERROR_HPP_
#define SPANPARSE_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spanparse {

// Every failure the library reports derives from Error. The kind maps onto
// the command-line exit codes (2 usage, 3 data, 4 model).
enum class ErrorKind { kUsage = 2, kData = 3, kModel = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }
  int exit_code() const { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::kUsage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class ModelError : public Error {
 public:
  explicit ModelError(const std::string& what) : Error(ErrorKind::kModel, what) {}
};

// Malformed bracketed tree; offset is the character position in the input.
class TreeSyntaxError : public DataError {
 public:
  TreeSyntaxError(const std::string& what, std::size_t offset)
      : DataError(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Grammar file problem; line is 1-based.
class GrammarError : public UsageError {
 public:
  GrammarError(const std::string& what, std::size_t line)
      : UsageError("grammar line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace spanparse

#endif  // SPANPARSE_ERROR_HPP_
