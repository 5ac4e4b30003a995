#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace squatguard {

// Standard alphabet, padded.
std::string base64_encode(const std::uint8_t* data, std::size_t len);
std::string base64_encode(const std::vector<std::uint8_t>& data);
std::optional<std::vector<std::uint8_t>> base64_decode(std::string_view s);

// URL-safe alphabet, no padding (token segments, issued credentials).
std::string base64url_encode(const std::uint8_t* data, std::size_t len);
std::string base64url_encode(std::string_view data);
std::optional<std::vector<std::uint8_t>> base64url_decode(std::string_view s);
std::optional<std::string> base64url_decode_string(std::string_view s);

}  // namespace squatguard
