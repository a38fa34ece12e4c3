#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace dtv {

using Headers = std::map<std::string, std::string>;

struct HttpResponse {
    // Negative status means the request never produced an HTTP response.
    int status = -1;
    std::string body;
    std::string error;
};

class HttpClient {
public:
    virtual ~HttpClient() = default;
    virtual HttpResponse post(const std::string& url, const std::string& body,
                              const Headers& headers) const = 0;
};

// cpp-httplib backed client. Thread-safe: one connection per call.
class HttplibClient final : public HttpClient {
public:
    explicit HttplibClient(std::chrono::seconds timeout = std::chrono::seconds(60));
    HttpResponse post(const std::string& url, const std::string& body,
                      const Headers& headers) const override;

private:
    std::chrono::seconds timeout_;
};

std::shared_ptr<HttpClient> default_http_client();

// Counting semaphore bounding concurrent outbound requests.
class InFlightLimiter {
public:
    explicit InFlightLimiter(std::size_t limit);

    void acquire();
    void release();
    std::size_t limit() const { return limit_; }

    class Slot {
    public:
        explicit Slot(InFlightLimiter& l) : limiter_(l) { limiter_.acquire(); }
        ~Slot() { limiter_.release(); }
        Slot(const Slot&) = delete;
        Slot& operator=(const Slot&) = delete;

    private:
        InFlightLimiter& limiter_;
    };

private:
    std::size_t limit_;
    std::size_t in_use_ = 0;
    std::mutex mutex_;
    std::condition_variable cv_;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

struct RetryPolicy {
    int retries = 2;
    std::chrono::milliseconds backoff_base{500};
};

Sleeper real_sleeper();

// POSTs and returns the 2xx body. Transport failures and 5xx are retried with
// doubling backoff; 401/403 raise AuthFailure, other 4xx raise HttpStatus.
std::string post_with_retry(const HttpClient& client, const std::string& url, const std::string& body,
                            const Headers& headers, const RetryPolicy& policy, const Sleeper& sleep,
                            InFlightLimiter* limiter = nullptr);

// Reads the named environment variable; empty when unset or name is empty.
std::string env_or_empty(const std::string& name);

}  // namespace dtv
