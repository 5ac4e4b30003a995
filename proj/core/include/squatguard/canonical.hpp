#pragma once

#include <nlohmann/json.hpp>
#include <string>

namespace squatguard {

using json = nlohmann::json;

// Canonical form for signing and hashing: object keys sorted lexicographically,
// no insignificant whitespace, UTF-8. nlohmann::json's default map ordering
// already sorts keys; dump() emits the compact form. Payloads built for signing
// must avoid floating-point members so the byte form stays stable.
std::string canonical_dump(const json& j);

}  // namespace squatguard
