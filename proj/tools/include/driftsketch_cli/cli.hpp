// Copyright 2026 The driftsketch Authors
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

#ifndef DRIFTSKETCH_CLI_CLI_HPP_
#define DRIFTSKETCH_CLI_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace driftsketch::cli {

inline constexpr int kExitClean = 0;
inline constexpr int kExitDetection = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;

// args excludes the program name. Reports written without --out go to `out`;
// diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace driftsketch::cli

#endif  // DRIFTSKETCH_CLI_CLI_HPP_
