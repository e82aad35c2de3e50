#include "remote_client.hpp"

#include <chrono>

#include "httplib.h"

#include "clarion/error.hpp"

namespace clarion::detail {

namespace {

// httplib wants "scheme://host:port" and a separate path; split off any prefix.
std::pair<std::string, std::string> split_url(std::string_view url) {
    const auto scheme_end = url.find("://");
    const std::size_t host_start = scheme_end == std::string_view::npos ? 0 : scheme_end + 3;
    const auto path_start = url.find('/', host_start);
    if (path_start == std::string_view::npos) {
        return {std::string(url), ""};
    }
    std::string prefix(url.substr(path_start));
    while (!prefix.empty() && prefix.back() == '/') {
        prefix.pop_back();
    }
    return {std::string(url.substr(0, path_start)), prefix};
}

}  // namespace

nlohmann::json post_json(std::string_view base_url, std::string_view path,
                         const nlohmann::json& body, double timeout_seconds) {
    const auto [origin, prefix] = split_url(base_url);
    const std::string target = prefix + std::string(path);
    const std::string where = origin + target;

    std::unique_ptr<httplib::Client> client;
    try {
        client = std::make_unique<httplib::Client>(origin);
    } catch (const std::exception& e) {
        throw DataError(ErrorCode::RemoteUnavailable, where + ": " + e.what());
    }
    if (!client->is_valid()) {
        throw DataError(ErrorCode::RemoteUnavailable, where + ": invalid base url");
    }
    const auto timeout = std::chrono::duration<double>(timeout_seconds);
    client->set_connection_timeout(timeout);
    client->set_read_timeout(timeout);
    client->set_write_timeout(timeout);

    auto res = client->Post(target, body.dump(), "application/json");
    if (!res) {
        throw DataError(ErrorCode::RemoteUnavailable,
                        where + ": " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw DataError(ErrorCode::RemoteUnavailable,
                        where + ": HTTP " + std::to_string(res->status));
    }
    try {
        return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(ErrorCode::RemoteUnavailable, where + ": bad JSON: " + e.what());
    }
}

}  // namespace clarion::detail
