// SPDX-License-Identifier: Apache-2.0
//
// JSON form of engine and system configurations. Parsing is strict: unknown
// keys and ill-typed values are ConfigError. Writing then parsing gives back
// an equal configuration.
#pragma once

#include <string>

#include <json.hpp>

#include "idma/core.hpp"
#include "idma/system.hpp"

namespace idma {

EngineConfig engine_from_json(const nlohmann::json& j);
nlohmann::json engine_to_json(const EngineConfig& cfg);

NdTransferDescriptor transfer_from_json(const nlohmann::json& j);
nlohmann::json transfer_to_json(const NdTransferDescriptor& d);

SystemConfig system_from_json(const nlohmann::json& j);
nlohmann::json system_to_json(const SystemConfig& cfg);

// Reads a file; ConfigError when it cannot be read or parsed.
nlohmann::json read_json_file(const std::string& path);
SystemConfig load_system(const std::string& path);

}  // namespace idma
