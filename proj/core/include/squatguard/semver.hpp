#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace squatguard {

// Strict MAJOR.MINOR.PATCH. No prerelease/build suffixes, no leading zeros.
struct SemVer {
  int major = 0;
  int minor = 0;
  int patch = 0;

  static std::optional<SemVer> parse(std::string_view s);
  std::string str() const;
  auto operator<=>(const SemVer&) const = default;
};

inline bool is_semver(std::string_view s) { return SemVer::parse(s).has_value(); }

}  // namespace squatguard
