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

#include "manifest.h"

#include <array>
#include <fstream>
#include <stdexcept>
#include <system_error>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "config.h"

namespace dualtype::cli {

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 computation failed");
    }
    std::string out;
    out.reserve(2 * len);
    for (unsigned int k = 0; k < len; k++) {
        out += fmt::format("{:02x}", digest[k]);
    }
    return out;
}

void OutputSet::add(std::string name, std::string content) {
    files_.emplace_back(std::move(name), std::move(content));
}

std::vector<std::filesystem::path> OutputSet::commit(
    const std::filesystem::path &dir, std::string_view command, std::string_view config_hash, uint64_t seed) const {
    nlohmann::ordered_json manifest;
    manifest["tool"] = "dualtype";
    manifest["version"] = DUALTYPE_VERSION;
    manifest["command"] = command;
    manifest["config_sha256"] = config_hash;
    manifest["seed"] = seed;
    manifest["outputs"] = nlohmann::ordered_json::array();
    for (const auto &[name, content] : files_) {
        manifest["outputs"].push_back({{"file", name}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
    }
    std::string manifest_name = "manifest_" + std::string(command) + ".json";
    for (auto &ch : manifest_name) {
        if (ch == ' ') {
            ch = '_';
        }
    }

    std::vector<std::pair<std::string, std::string>> all = files_;
    all.emplace_back(manifest_name, manifest.dump(2) + "\n");

    std::vector<std::filesystem::path> written;
    try {
        std::filesystem::create_directories(dir);
        for (const auto &[name, content] : all) {
            auto path = dir / name;
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            written.push_back(path);
            out.write(content.data(), static_cast<std::streamsize>(content.size()));
            out.close();
            if (!out) {
                throw ConfigError(fmt::format("{}: cannot write output file", path.string()));
            }
        }
    } catch (const std::filesystem::filesystem_error &e) {
        for (const auto &p : written) {
            std::error_code ec;
            std::filesystem::remove(p, ec);
        }
        throw ConfigError(fmt::format("{}: {}", dir.string(), e.what()));
    } catch (...) {
        for (const auto &p : written) {
            std::error_code ec;
            std::filesystem::remove(p, ec);
        }
        throw;
    }
    return written;
}

}  // namespace dualtype::cli
