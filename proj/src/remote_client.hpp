#pragma once

// JSON-over-HTTP POST shared by the remote scorer and the remote classifier.

#include <string>
#include <string_view>

#include "json.hpp"

namespace clarion::detail {

/// POSTs `body` to base_url + path. Any failure (connect, non-200, bad JSON)
/// throws DataError(RemoteUnavailable).
nlohmann::json post_json(std::string_view base_url, std::string_view path,
                         const nlohmann::json& body, double timeout_seconds);

}  // namespace clarion::detail
