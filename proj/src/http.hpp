#pragma once

#include <algorithm>
#include <chrono>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "icsu/error.hpp"

namespace icsu::detail {

struct HttpResponse {
    int status = 0;
    std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

/// One POST of a JSON body. Connection-level failures throw a retryable
/// TransportError; any HTTP status is returned to the caller.
HttpResponse post_json(const std::string& url, const std::string& body, const HttpHeaders& headers,
                       std::chrono::milliseconds timeout);

/// Calls `attempt` until it returns or throws a non-retryable error; sleeps
/// backoff * 2^i between tries.
template <class F>
auto with_retries(int max_attempts, std::chrono::milliseconds backoff, F&& attempt) {
    if (max_attempts < 1) max_attempts = 1;
    for (int i = 0;; ++i) {
        try {
            return attempt();
        } catch (const TransportError& e) {
            if (!e.retryable() || i + 1 >= max_attempts) {
                throw TransportError(std::string(e.what()) + " (after " + std::to_string(i + 1) + " attempt" +
                                         (i == 0 ? "" : "s") + ")",
                                     e.retryable());
            }
            std::this_thread::sleep_for(backoff * (1LL << std::min(i, 16)));
        }
    }
}

}  // namespace icsu::detail
