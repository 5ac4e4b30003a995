#include "squatguard/canonical.hpp"

namespace squatguard {

std::string canonical_dump(const json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

}  // namespace squatguard
