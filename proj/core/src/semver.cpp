#include "squatguard/semver.hpp"

namespace squatguard {

namespace {

// One numeric identifier: digits only, no leading zero unless the value is 0.
std::optional<int> parse_part(std::string_view s) {
  if (s.empty() || s.size() > 9) return std::nullopt;
  if (s.size() > 1 && s[0] == '0') return std::nullopt;
  int v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return v;
}

}  // namespace

std::optional<SemVer> SemVer::parse(std::string_view s) {
  auto d1 = s.find('.');
  if (d1 == std::string_view::npos) return std::nullopt;
  auto d2 = s.find('.', d1 + 1);
  if (d2 == std::string_view::npos) return std::nullopt;
  if (s.find('.', d2 + 1) != std::string_view::npos) return std::nullopt;
  auto ma = parse_part(s.substr(0, d1));
  auto mi = parse_part(s.substr(d1 + 1, d2 - d1 - 1));
  auto pa = parse_part(s.substr(d2 + 1));
  if (!ma || !mi || !pa) return std::nullopt;
  return SemVer{*ma, *mi, *pa};
}

std::string SemVer::str() const {
  return std::to_string(major) + "." + std::to_string(minor) + "." +
         std::to_string(patch);
}

}  // namespace squatguard
