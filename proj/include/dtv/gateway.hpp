#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dtv/core.hpp"
#include "dtv/http.hpp"

namespace dtv {

enum class Role { System, User, Assistant };

std::string_view to_string(Role role);

struct ChatMessage {
    Role role = Role::User;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
    std::string model_id;
    std::vector<ChatMessage> messages;
    // Every experiment runs greedy; complete() rejects anything else.
    double temperature = 0.0;
    bool want_logprobs = false;
    std::optional<int> max_tokens;
};

struct TokenLogprob {
    std::string token;
    double logprob = 0.0;
};

struct ChatResponse {
    std::string text;
    std::optional<std::vector<TokenLogprob>> token_logprobs;
    std::string model_id;
    bool cached = false;
};

struct GatewayConfig {
    // Full chat-completions URL, e.g. https://api.openai.com/v1/chat/completions
    std::string endpoint;
    std::string api_key;
    std::optional<std::filesystem::path> cache_dir;
    RetryPolicy retry;
    std::size_t max_in_flight = 8;
};

// Wire body for the chat-completions protocol.
Json request_body(const ChatRequest& req);

// The cache key covers exactly (model_id, messages, temperature, want_logprobs, max_tokens).
std::string request_cache_key(const ChatRequest& req);

// Parses choices[0].message.content and choices[0].logprobs.content[*].{token,logprob}.
ChatResponse parse_chat_response(std::string_view body, const std::string& fallback_model);

class Gateway {
public:
    Gateway(GatewayConfig config, std::shared_ptr<const HttpClient> http, Sleeper sleeper = real_sleeper());

    // Safe to call concurrently.
    ChatResponse complete(const ChatRequest& req) const;

    const GatewayConfig& config() const { return config_; }
    std::shared_ptr<InFlightLimiter> limiter() const { return limiter_; }

private:
    std::optional<ChatResponse> cache_lookup(const std::string& key) const;
    void cache_store(const std::string& key, const ChatResponse& resp) const;

    GatewayConfig config_;
    std::shared_ptr<const HttpClient> http_;
    Sleeper sleeper_;
    std::shared_ptr<InFlightLimiter> limiter_;
};

// Case-fold, then strip surrounding whitespace and punctuation.
std::string clean_token(std::string_view token);

struct TargetMatch {
    std::optional<std::string> matched;
    double logprob = 0.0;
};

// First token whose cleaned form is in `targets` (given lowercase) wins; with no match
// the result is the sum of every token logprob. Throws NoLogprobs.
TargetMatch extract_target_logprob(const ChatResponse& resp, const std::set<std::string>& targets);

}  // namespace dtv
