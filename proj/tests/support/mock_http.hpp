#pragma once

#include <algorithm>
#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "dtv/gateway.hpp"
#include "dtv/http.hpp"

namespace dtv::testing {

struct RecordedRequest {
    std::string url;
    std::string body;
    Headers headers;
};

// HttpClient whose responses come from a handler; every request is recorded.
class MockHttp final : public HttpClient {
public:
    using Handler = std::function<HttpResponse(const RecordedRequest&, std::size_t call_index)>;

    explicit MockHttp(Handler handler) : handler_(std::move(handler)) {}

    HttpResponse post(const std::string& url, const std::string& body, const Headers& headers) const override {
        std::size_t index;
        RecordedRequest req{url, body, headers};
        {
            std::lock_guard lock(mutex_);
            index = requests_.size();
            requests_.push_back(req);
        }
        return handler_(req, index);
    }

    std::vector<RecordedRequest> requests() const {
        std::lock_guard lock(mutex_);
        return requests_;
    }
    std::size_t calls() const {
        std::lock_guard lock(mutex_);
        return requests_.size();
    }

private:
    Handler handler_;
    mutable std::mutex mutex_;
    mutable std::vector<RecordedRequest> requests_;
};

// Chat-completions body carrying `text` and optional token logprobs.
inline std::string chat_body(const std::string& text, const std::vector<TokenLogprob>* logprobs = nullptr) {
    Json choice = {{"index", 0}, {"message", {{"role", "assistant"}, {"content", text}}}};
    if (logprobs) {
        Json content = Json::array();
        for (const auto& t : *logprobs) content.push_back({{"token", t.token}, {"logprob", t.logprob}});
        choice["logprobs"] = {{"content", content}};
    }
    return Json{{"model", "mock-model"}, {"choices", Json::array({choice})}}.dump();
}

// Replies with the scripted texts in order; the last one repeats.
inline std::shared_ptr<MockHttp> scripted_chat(std::vector<std::string> replies) {
    return std::make_shared<MockHttp>([replies = std::move(replies)](const RecordedRequest&, std::size_t i) {
        const auto& text = replies[std::min(i, replies.size() - 1)];
        return HttpResponse{200, chat_body(text), ""};
    });
}

inline Sleeper no_sleep() {
    return [](std::chrono::milliseconds) {};
}

inline GatewayConfig mock_gateway_config() {
    GatewayConfig cfg;
    cfg.endpoint = "http://mock.local/v1/chat/completions";
    cfg.api_key = "test-key";
    cfg.retry = RetryPolicy{2, std::chrono::milliseconds(0)};
    return cfg;
}

}  // namespace dtv::testing
