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

#ifndef DUALTYPE_TOOLS_MANIFEST_H
#define DUALTYPE_TOOLS_MANIFEST_H

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dualtype::cli {

std::string sha256_hex(std::string_view data);

/// Output files of one command, held in memory until commit() writes them
/// together with a manifest. A failed commit removes what it wrote.
class OutputSet {
   public:
    void add(std::string name, std::string content);

    /// Writes every file plus `manifest_<command>.json` into `dir` and
    /// returns the written paths.
    std::vector<std::filesystem::path> commit(
        const std::filesystem::path &dir, std::string_view command, std::string_view config_hash, uint64_t seed) const;

    const std::vector<std::pair<std::string, std::string>> &files() const {
        return files_;
    }

   private:
    std::vector<std::pair<std::string, std::string>> files_;
};

}  // namespace dualtype::cli

#endif
