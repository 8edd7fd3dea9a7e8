#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace claimex {

struct HttpResponse {
    int status = 0;
    std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

/// Transport seam: live adapters go through this so tests can inject
/// scripted or flaky transports. Implementations throw Error(network) on
/// connection-level failures.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse post(const std::string& path, const HttpHeaders& headers,
                              const std::string& body, const std::string& content_type) = 0;
    virtual HttpResponse get(const std::string& path, const HttpHeaders& headers) = 0;
};

/// cpp-httplib client bound to a base URL ("https://host" or "http://host:port").
std::unique_ptr<HttpTransport> make_httplib_transport(const std::string& base_url);

/// Fetches an absolute URL (used for URL image references in live mode).
std::string fetch_url(const std::string& url);

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds initial_delay{500};
    double multiplier = 2.0;
    double jitter = 0.25;  // +-25% around the computed delay
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// Retries transport failures and 429/5xx statuses with exponential backoff
/// plus jitter. Well-formed non-retryable replies (2xx/4xx) return
/// immediately. Throws Error(provider) once attempts are exhausted.
HttpResponse post_with_retry(HttpTransport& transport, const std::string& path,
                             const HttpHeaders& headers, const std::string& body,
                             const std::string& content_type, const RetryPolicy& policy,
                             const Sleeper& sleep = {});

}  // namespace claimex
