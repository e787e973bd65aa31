#pragma once

#include <string>
#include <string_view>

#include "json.hpp"

namespace pdl {

/// SHA-256 of raw bytes, lowercase hex.
std::string sha256_hex(std::string_view bytes);

/// Canonical byte form of a JSON document: keys sorted, no whitespace.
/// nlohmann::json stores object keys ordered, so dump() is already canonical.
std::string canonical(const nlohmann::json& doc);

/// SHA-256 of the canonical serialization, lowercase hex.
std::string digest_of(const nlohmann::json& doc);

/// 64 hex zeros; prev_hash of every genesis block.
const std::string& zero_digest();

}  // namespace pdl
