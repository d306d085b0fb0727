#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "http.hpp"

#include <httplib.h>

namespace icsu::detail {

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint URL lacks a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpResponse post_json(const std::string& url, const std::string& body, const HttpHeaders& headers,
                       std::chrono::milliseconds timeout) {
    auto [origin, path] = split_url(url);
    httplib::Client client(origin);
    if (!client.is_valid()) throw ConfigError("invalid endpoint URL: " + url);
    auto seconds = timeout.count() / 1000;
    auto micros = (timeout.count() % 1000) * 1000;
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);

    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto res = client.Post(path, h, body, "application/json");
    if (!res) {
        throw TransportError("POST " + origin + path + " failed: " + httplib::to_string(res.error()), true);
    }
    return {res->status, res->body};
}

}  // namespace icsu::detail
