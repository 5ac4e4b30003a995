#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace squatguard {

enum class Errc {
  unauthorized,
  forbidden,
  not_found,
  duplicate_tool_id,
  duplicate_entry_id,
  validation_error,
  immutable_field,
  self_approval_forbidden,
  not_pending,
  parse_error,
  internal_error,
};

std::string_view errc_name(Errc c);
int errc_http_status(Errc c);

// Domain failure carried up to the HTTP layer; code() maps onto the wire
// error body and status line.
class ApiError : public std::runtime_error {
 public:
  ApiError(Errc code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}
  Errc code() const { return code_; }
  int http_status() const { return errc_http_status(code_); }

 private:
  Errc code_;
};

}  // namespace squatguard
