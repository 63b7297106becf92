// Copyright 2026 The dualtype Authors
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

#ifndef DUALTYPE_TOOLS_CLI_H
#define DUALTYPE_TOOLS_CLI_H

#include <iosfwd>
#include <string>
#include <vector>

namespace dualtype::cli {

enum ExitCode : int {
    kSuccess = 0,
    kConfigError = 1,
    kDomainError = 2,
    kConvergenceError = 3,
};

/// Runs the command line `args` (without the program name). Diagnostics go
/// to `err`, summaries and help to `out`.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace dualtype::cli

#endif
