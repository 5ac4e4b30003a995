#include "squatguard/base64.hpp"

#include <sodium.h>

#include "squatguard/crypto.hpp"

namespace squatguard {

namespace {

std::string encode_variant(const std::uint8_t* data, std::size_t len, int variant) {
  ensure_sodium_init();
  std::string out(sodium_base64_encoded_len(len, variant), '\0');
  sodium_bin2base64(out.data(), out.size(), data, len, variant);
  out.resize(out.find('\0') != std::string::npos ? out.find('\0') : out.size());
  return out;
}

std::optional<std::vector<std::uint8_t>> decode_variant(std::string_view s,
                                                        int variant) {
  ensure_sodium_init();
  std::vector<std::uint8_t> out(s.size() == 0 ? 1 : s.size());
  std::size_t out_len = 0;
  const char* end = nullptr;
  if (sodium_base642bin(out.data(), out.size(), s.data(), s.size(), nullptr,
                        &out_len, &end, variant) != 0)
    return std::nullopt;
  if (end != s.data() + s.size()) return std::nullopt;
  out.resize(out_len);
  // Every byte string has exactly one encoding; anything else is rejected.
  // This closes two lenient-decoder holes: nonzero trailing bits in the
  // final character, and high bytes the branchless classifier misreads.
  if (encode_variant(out.data(), out.size(), variant) != s) return std::nullopt;
  return out;
}

}  // namespace

std::string base64_encode(const std::uint8_t* data, std::size_t len) {
  return encode_variant(data, len, sodium_base64_VARIANT_ORIGINAL);
}

std::string base64_encode(const std::vector<std::uint8_t>& data) {
  return base64_encode(data.data(), data.size());
}

std::optional<std::vector<std::uint8_t>> base64_decode(std::string_view s) {
  return decode_variant(s, sodium_base64_VARIANT_ORIGINAL);
}

std::string base64url_encode(const std::uint8_t* data, std::size_t len) {
  return encode_variant(data, len, sodium_base64_VARIANT_URLSAFE_NO_PADDING);
}

std::string base64url_encode(std::string_view data) {
  return base64url_encode(reinterpret_cast<const std::uint8_t*>(data.data()),
                          data.size());
}

std::optional<std::vector<std::uint8_t>> base64url_decode(std::string_view s) {
  return decode_variant(s, sodium_base64_VARIANT_URLSAFE_NO_PADDING);
}

std::optional<std::string> base64url_decode_string(std::string_view s) {
  auto v = base64url_decode(s);
  if (!v) return std::nullopt;
  return std::string(v->begin(), v->end());
}

}  // namespace squatguard
