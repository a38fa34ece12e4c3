#include "dtv/http.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "dtv/error.hpp"

namespace dtv {

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorKind::InvalidConfig, "endpoint URL lacks a scheme: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttplibClient::HttplibClient(std::chrono::seconds timeout) : timeout_(timeout) {}

HttpResponse HttplibClient::post(const std::string& url, const std::string& body,
                                 const Headers& headers) const {
    const SplitUrl parts = split_url(url);
    httplib::Client client(parts.origin);
    client.set_connection_timeout(std::chrono::seconds(10));
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);

    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);

    auto result = client.Post(parts.path, h, body, "application/json");
    if (!result) return {-1, {}, httplib::to_string(result.error())};
    return {result->status, result->body, {}};
}

std::shared_ptr<HttpClient> default_http_client() {
    return std::make_shared<HttplibClient>();
}

InFlightLimiter::InFlightLimiter(std::size_t limit) : limit_(limit) {
    if (limit_ == 0) throw Error(ErrorKind::InvalidConfig, "max_in_flight must be >= 1");
}

void InFlightLimiter::acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [this] { return in_use_ < limit_; });
    ++in_use_;
}

void InFlightLimiter::release() {
    {
        std::lock_guard lock(mutex_);
        --in_use_;
    }
    cv_.notify_one();
}

Sleeper real_sleeper() {
    return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string post_with_retry(const HttpClient& client, const std::string& url, const std::string& body,
                            const Headers& headers, const RetryPolicy& policy, const Sleeper& sleep,
                            InFlightLimiter* limiter) {
    const int attempts = 1 + std::max(0, policy.retries);
    std::string last_failure;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0 && sleep) sleep(policy.backoff_base * (1 << (attempt - 1)));

        HttpResponse resp;
        if (limiter != nullptr) {
            InFlightLimiter::Slot slot(*limiter);
            resp = client.post(url, body, headers);
        } else {
            resp = client.post(url, body, headers);
        }

        if (resp.status >= 200 && resp.status < 300) return std::move(resp.body);
        if (resp.status == 401 || resp.status == 403) {
            throw Error(ErrorKind::AuthFailure, "HTTP " + std::to_string(resp.status) + " from " + url);
        }
        if (resp.status >= 400 && resp.status < 500) {
            throw Error(ErrorKind::HttpStatus, "HTTP " + std::to_string(resp.status) + " from " + url +
                                                   ": " + resp.body.substr(0, 200));
        }
        last_failure = resp.status < 0 ? "connection failed (" + resp.error + ")"
                                       : "HTTP " + std::to_string(resp.status);
    }
    throw Error(ErrorKind::Transport,
                last_failure + " after " + std::to_string(attempts) + " attempts to " + url);
}

std::string env_or_empty(const std::string& name) {
    if (name.empty()) return {};
    const char* v = std::getenv(name.c_str());
    return v == nullptr ? std::string{} : std::string(v);
}

}  // namespace dtv
