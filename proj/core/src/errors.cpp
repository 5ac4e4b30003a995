#include "squatguard/errors.hpp"

namespace squatguard {

std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::unauthorized: return "unauthorized";
    case Errc::forbidden: return "forbidden";
    case Errc::not_found: return "not_found";
    case Errc::duplicate_tool_id: return "duplicate_tool_id";
    case Errc::duplicate_entry_id: return "duplicate_entry_id";
    case Errc::validation_error: return "validation_error";
    case Errc::immutable_field: return "immutable_field";
    case Errc::self_approval_forbidden: return "self_approval_forbidden";
    case Errc::not_pending: return "not_pending";
    case Errc::parse_error: return "parse_error";
    case Errc::internal_error: return "internal_error";
  }
  return "internal_error";
}

int errc_http_status(Errc c) {
  switch (c) {
    case Errc::unauthorized: return 401;
    case Errc::forbidden: return 403;
    case Errc::not_found: return 404;
    case Errc::duplicate_tool_id: return 409;
    case Errc::duplicate_entry_id: return 400;
    case Errc::validation_error: return 400;
    case Errc::immutable_field: return 400;
    case Errc::self_approval_forbidden: return 403;
    case Errc::not_pending: return 409;
    case Errc::parse_error: return 400;
    case Errc::internal_error: return 500;
  }
  return 500;
}

}  // namespace squatguard
