#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "claimex/http.hpp"

#include <random>
#include <thread>

#include "claimex/error.hpp"

namespace claimex {

namespace {

class HttplibTransport : public HttpTransport {
public:
    explicit HttplibTransport(std::string base_url) : base_url_(std::move(base_url)) {}

    HttpResponse post(const std::string& path, const HttpHeaders& headers,
                      const std::string& body, const std::string& content_type) override {
        httplib::Client client(base_url_);
        client.set_connection_timeout(30);
        client.set_read_timeout(300);
        httplib::Headers h(headers.begin(), headers.end());
        auto res = client.Post(path, h, body, content_type);
        if (!res) {
            fail(ErrorKind::network,
                 "POST " + base_url_ + path + " failed: " + httplib::to_string(res.error()));
        }
        return HttpResponse{res->status, res->body};
    }

    HttpResponse get(const std::string& path, const HttpHeaders& headers) override {
        httplib::Client client(base_url_);
        client.set_connection_timeout(30);
        client.set_read_timeout(300);
        httplib::Headers h(headers.begin(), headers.end());
        auto res = client.Get(path, h);
        if (!res) {
            fail(ErrorKind::network,
                 "GET " + base_url_ + path + " failed: " + httplib::to_string(res.error()));
        }
        return HttpResponse{res->status, res->body};
    }

private:
    std::string base_url_;
};

std::chrono::milliseconds jittered_delay(const RetryPolicy& policy, int attempt) {
    double base = static_cast<double>(policy.initial_delay.count());
    for (int i = 1; i < attempt; ++i) base *= policy.multiplier;
    thread_local std::mt19937 rng{std::random_device{}()};
    std::uniform_real_distribution<double> dist(1.0 - policy.jitter, 1.0 + policy.jitter);
    return std::chrono::milliseconds(static_cast<long long>(base * dist(rng)));
}

bool retryable_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

}  // namespace

std::unique_ptr<HttpTransport> make_httplib_transport(const std::string& base_url) {
    return std::make_unique<HttplibTransport>(base_url);
}

std::string fetch_url(const std::string& url) {
    size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) fail(ErrorKind::network, "not a URL: " + url);
    size_t path_start = url.find('/', scheme_end + 3);
    std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
    httplib::Client client(base);
    client.set_follow_location(true);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);
    auto res = client.Get(path);
    if (!res) fail(ErrorKind::network, "GET " + url + " failed: " + httplib::to_string(res.error()));
    if (res->status != 200) {
        fail(ErrorKind::network, "GET " + url + " returned status " + std::to_string(res->status));
    }
    return res->body;
}

HttpResponse post_with_retry(HttpTransport& transport, const std::string& path,
                             const HttpHeaders& headers, const std::string& body,
                             const std::string& content_type, const RetryPolicy& policy,
                             const Sleeper& sleep) {
    auto do_sleep = [&](std::chrono::milliseconds d) {
        if (sleep) sleep(d);
        else std::this_thread::sleep_for(d);
    };

    std::string last_failure;
    for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
        try {
            HttpResponse res = transport.post(path, headers, body, content_type);
            if (!retryable_status(res.status)) return res;
            last_failure = "status " + std::to_string(res.status);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::network) throw;
            last_failure = e.what();
        }
        if (attempt < policy.max_attempts) do_sleep(jittered_delay(policy, attempt));
    }
    fail(ErrorKind::provider,
         "request failed after " + std::to_string(policy.max_attempts) +
             " attempts; last failure: " + last_failure);
}

}  // namespace claimex
