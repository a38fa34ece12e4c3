#include "dtv/gateway.hpp"

#include <cctype>
#include <fstream>
#include <random>
#include <sstream>

#include "dtv/error.hpp"

namespace dtv {

namespace fs = std::filesystem;

std::string_view to_string(Role role) {
    switch (role) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

Json request_body(const ChatRequest& req) {
    Json messages = Json::array();
    for (const auto& m : req.messages) {
        messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }
    Json body = {
        {"model", req.model_id},
        {"messages", std::move(messages)},
        {"temperature", req.temperature},
        {"logprobs", req.want_logprobs},
    };
    if (req.max_tokens) body["max_tokens"] = *req.max_tokens;
    return body;
}

std::string request_cache_key(const ChatRequest& req) {
    return cache_key(canonical_payload(request_body(req)));
}

ChatResponse parse_chat_response(std::string_view body, const std::string& fallback_model) {
    Json j;
    try {
        j = Json::parse(body);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorKind::MalformedResponse, std::string("invalid JSON: ") + e.what());
    }
    try {
        const auto& choice = j.at("choices").at(0);
        const auto& content = choice.at("message").at("content");
        ChatResponse resp;
        resp.text = content.is_null() ? std::string{} : content.get<std::string>();
        resp.model_id = j.value("model", fallback_model);
        if (auto lp = choice.find("logprobs"); lp != choice.end() && lp->is_object()) {
            if (auto items = lp->find("content"); items != lp->end() && items->is_array()) {
                std::vector<TokenLogprob> tokens;
                for (const auto& t : *items) {
                    TokenLogprob tl{t.at("token").get<std::string>(), t.at("logprob").get<double>()};
                    if (!(tl.logprob <= 0.0)) {
                        throw Error(ErrorKind::MalformedResponse,
                                    "positive or non-finite logprob for token '" + tl.token + "'");
                    }
                    tokens.push_back(std::move(tl));
                }
                resp.token_logprobs = std::move(tokens);
            }
        }
        return resp;
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::MalformedResponse, e.what());
    }
}

Gateway::Gateway(GatewayConfig config, std::shared_ptr<const HttpClient> http, Sleeper sleeper)
    : config_(std::move(config)),
      http_(std::move(http)),
      sleeper_(std::move(sleeper)),
      limiter_(std::make_shared<InFlightLimiter>(config_.max_in_flight)) {
    if (!http_) throw Error(ErrorKind::InvalidConfig, "gateway needs an HTTP client");
}

ChatResponse Gateway::complete(const ChatRequest& req) const {
    if (req.messages.empty()) throw Error(ErrorKind::InvalidArgument, "chat request has no messages");
    if (req.temperature != 0.0) throw Error(ErrorKind::InvalidArgument, "temperature must be 0");
    if (req.max_tokens && *req.max_tokens <= 0) {
        throw Error(ErrorKind::InvalidArgument, "max_tokens must be positive");
    }

    const std::string key = request_cache_key(req);
    if (auto hit = cache_lookup(key)) return *std::move(hit);

    if (config_.endpoint.empty()) throw Error(ErrorKind::InvalidConfig, "gateway endpoint not configured");
    Headers headers;
    if (!config_.api_key.empty()) headers["Authorization"] = "Bearer " + config_.api_key;

    const std::string body = post_with_retry(*http_, config_.endpoint, request_body(req).dump(), headers,
                                             config_.retry, sleeper_, limiter_.get());
    ChatResponse resp = parse_chat_response(body, req.model_id);
    cache_store(key, resp);
    return resp;
}

namespace {

Json response_to_json(const ChatResponse& r) {
    Json j = {{"text", r.text}, {"model_id", r.model_id}};
    if (r.token_logprobs) {
        Json toks = Json::array();
        for (const auto& t : *r.token_logprobs) toks.push_back({{"token", t.token}, {"logprob", t.logprob}});
        j["token_logprobs"] = std::move(toks);
    }
    return j;
}

ChatResponse response_from_json(const Json& j) {
    ChatResponse r;
    r.text = j.at("text").get<std::string>();
    r.model_id = j.value("model_id", std::string{});
    if (auto it = j.find("token_logprobs"); it != j.end()) {
        std::vector<TokenLogprob> toks;
        for (const auto& t : *it) toks.push_back({t.at("token").get<std::string>(), t.at("logprob").get<double>()});
        r.token_logprobs = std::move(toks);
    }
    return r;
}

fs::path cache_path(const fs::path& dir, const std::string& key) {
    return dir / key.substr(0, 2) / (key + ".json");
}

}  // namespace

std::optional<ChatResponse> Gateway::cache_lookup(const std::string& key) const {
    if (!config_.cache_dir) return std::nullopt;
    std::ifstream in(cache_path(*config_.cache_dir, key), std::ios::binary);
    if (!in) return std::nullopt;
    try {
        Json j = Json::parse(in);
        ChatResponse r = response_from_json(j);
        r.cached = true;
        return r;
    } catch (const Json::exception&) {
        // Corrupt entry: treat as a miss; the next store overwrites it.
        return std::nullopt;
    }
}

void Gateway::cache_store(const std::string& key, const ChatResponse& resp) const {
    if (!config_.cache_dir) return;
    const fs::path target = cache_path(*config_.cache_dir, key);
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create cache dir " + target.parent_path().string());

    thread_local std::mt19937_64 rng{std::random_device{}()};
    std::ostringstream suffix;
    suffix << std::hex << rng();
    const fs::path tmp = target.string() + ".tmp." + suffix.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot write cache file " + tmp.string());
        out << response_to_json(resp).dump();
    }
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorKind::Io, "cannot publish cache file " + target.string());
    }
}

std::string clean_token(std::string_view token) {
    std::string folded = to_lower(token);
    auto strip = [](unsigned char c) { return std::isspace(c) || std::ispunct(c); };
    std::size_t b = 0;
    std::size_t e = folded.size();
    while (b < e && strip(static_cast<unsigned char>(folded[b]))) ++b;
    while (e > b && strip(static_cast<unsigned char>(folded[e - 1]))) --e;
    return folded.substr(b, e - b);
}

TargetMatch extract_target_logprob(const ChatResponse& resp, const std::set<std::string>& targets) {
    if (!resp.token_logprobs) throw Error(ErrorKind::NoLogprobs, "response carries no token logprobs");
    double total = 0.0;
    for (const auto& t : *resp.token_logprobs) {
        const std::string cleaned = clean_token(t.token);
        if (targets.count(cleaned) != 0) return {cleaned, t.logprob};
        total += t.logprob;
    }
    return {std::nullopt, total};
}

}  // namespace dtv
