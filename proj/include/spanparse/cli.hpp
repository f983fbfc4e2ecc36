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

#ifndef SPANPARSE_CLI_HPP_
#define SPANPARSE_CLI_HPP_

// Command-line front end. run_cli() is the whole program; tools/spanparse.cpp
// only forwards argv to it, so tests drive it in-process.
//
// Every invocation gets a fresh run directory holding manifest.json (written
// first), config.txt and the subcommand's artifacts. Setting resolution: a
// flag given on the command line, else the --config file entry, else the
// built-in default.
//
// Exit codes: 0 success, 2 usage, 3 data, 4 model, 1 anything unexpected.

#include <filesystem>
#include <iostream>
#include <string>

namespace spanparse::cli {

inline constexpr const char* kToolVersion = "1.0.0";

// Hex SHA-256 of a file's bytes; DataError if unreadable.
std::string sha256_file(const std::string& path);

// Writes text verbatim; DataError on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

// Shortest "%g" rendering, used for settings and headers.
std::string format_real(double v);

int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace spanparse::cli

#endif  // SPANPARSE_CLI_HPP_
