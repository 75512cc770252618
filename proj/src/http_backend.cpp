#include <httplib.h>
#include <json.hpp>

#include "eln/error.hpp"
#include "eln/stamper.hpp"

namespace eln {

HttpStampBackend::HttpStampBackend(std::string base_url, std::string api_key,
                                   std::chrono::seconds timeout)
    : api_key_(std::move(api_key)), timeout_(timeout) {
    auto scheme = base_url.find("://");
    auto host_start = scheme == std::string::npos ? 0 : scheme + 3;
    auto slash = base_url.find('/', host_start);
    origin_ = base_url.substr(0, slash);
    if (slash != std::string::npos) path_prefix_ = base_url.substr(slash);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    if (origin_.empty()) throw Error(ErrorCode::config, "stamp backend URL is empty");
}

std::string HttpStampBackend::submit(const std::string& root_hex, Date batch_date) {
    httplib::Client client(origin_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    httplib::Headers headers{{"Authorization", api_key_}};
    nlohmann::json body{{"hash", root_hex}, {"date", format_date(batch_date)}};
    auto res = client.Post(path_prefix_ + "/api/v1/timestamp", headers, body.dump(),
                           "application/json");
    if (!res) {
        throw Error(ErrorCode::backend_unavailable,
                    "anchoring service unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
        throw Error(ErrorCode::backend_unavailable,
                    "anchoring service answered HTTP " + std::to_string(res->status));
    }
    return res->body;
}

}  // namespace eln
