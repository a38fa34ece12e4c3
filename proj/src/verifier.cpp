#include "dtv/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "dtv/error.hpp"

namespace dtv {

std::string_view to_string(VerifierBackend backend) {
    switch (backend) {
        case VerifierBackend::RemoteNli: return "remote_nli";
        case VerifierBackend::LlmFewShot: return "llm_fewshot";
        case VerifierBackend::FixtureTable: return "fixture_table";
    }
    return "fixture_table";
}

VerifierBackend parse_verifier_backend(std::string_view name) {
    const std::string n = to_lower(trim(name));
    if (n == "remote_nli" || n == "remotenli") return VerifierBackend::RemoteNli;
    if (n == "llm_fewshot" || n == "llmfewshot") return VerifierBackend::LlmFewShot;
    if (n == "fixture_table" || n == "fixturetable" || n == "fixture") return VerifierBackend::FixtureTable;
    throw Error(ErrorKind::InvalidConfig, "unknown verifier backend '" + std::string(name) + "'");
}

double clamp_score(double raw) {
    if (!std::isfinite(raw)) throw Error(ErrorKind::OutOfRange, "non-finite entailment score");
    return std::clamp(raw, 0.0, 1.0);
}

SubClaimScore score_subclaim(std::size_t subclaim_index, std::string_view claim,
                             std::span<const EvidenceItem> evidence, const EntailmentScorer& scorer) {
    if (evidence.empty()) throw Error(ErrorKind::EmptyEvidence, std::string(claim));
    SubClaimScore out;
    out.subclaim_index = subclaim_index;
    out.backend_id = scorer.id();
    out.per_evidence = scorer.score(claim, evidence);
    if (out.per_evidence.empty()) throw Error(ErrorKind::MalformedResponse, "scorer returned no scores");
    for (double& s : out.per_evidence) s = clamp_score(s);
    out.combined = *std::max_element(out.per_evidence.begin(), out.per_evidence.end());
    return out;
}

double parse_nli_score(std::string_view body) {
    Json j;
    try {
        j = Json::parse(body);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorKind::MalformedResponse, e.what());
    }
    auto it = j.is_object() ? j.find("score") : j.end();
    if (it == j.end()) throw Error(ErrorKind::MalformedResponse, "missing 'score'");
    double value = 0.0;
    if (it->is_number()) {
        value = it->get<double>();
    } else if (it->is_string()) {
        const std::string s = it->get<std::string>();
        try {
            std::size_t used = 0;
            value = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
        } catch (const std::out_of_range&) {
            throw Error(ErrorKind::OutOfRange, "score '" + s + "'");
        } catch (const std::invalid_argument&) {
            throw Error(ErrorKind::MalformedResponse, "score '" + s + "' is not numeric");
        }
    } else {
        throw Error(ErrorKind::MalformedResponse, "score has type " + std::string(it->type_name()));
    }
    return clamp_score(value);
}

RemoteNliScorer::RemoteNliScorer(std::string endpoint, std::string api_key, std::shared_ptr<const HttpClient> http,
                                 RetryPolicy retry, Sleeper sleeper, std::shared_ptr<InFlightLimiter> limiter)
    : endpoint_(std::move(endpoint)),
      api_key_(std::move(api_key)),
      http_(std::move(http)),
      retry_(retry),
      sleeper_(std::move(sleeper)),
      limiter_(std::move(limiter)) {
    if (endpoint_.empty()) throw Error(ErrorKind::InvalidConfig, "remote NLI endpoint not configured");
}

double RemoteNliScorer::score_pair(std::string_view claim, std::string_view evidence_text) const {
    const Json body = {{"premise", std::string(evidence_text)}, {"hypothesis", std::string(claim)}};
    Headers headers;
    if (!api_key_.empty()) headers["Authorization"] = "Bearer " + api_key_;
    return parse_nli_score(post_with_retry(*http_, endpoint_, body.dump(), headers, retry_, sleeper_, limiter_.get()));
}

std::vector<double> RemoteNliScorer::score(std::string_view claim, std::span<const EvidenceItem> evidence) const {
    std::vector<double> scores;
    scores.reserve(evidence.size());
    for (const auto& e : evidence) scores.push_back(score_pair(claim, e.text));
    return scores;
}

FewShotVerdict fewshot_score_from_response(const ChatResponse& resp) {
    static const std::set<std::string> kTargets = {"supported", "unsupported"};
    const TargetMatch match = extract_target_logprob(resp, kTargets);
    const double p = std::exp(match.logprob);

    std::string verdict;
    if (match.matched) {
        verdict = *match.matched;
    } else {
        const std::string cleaned = clean_token(resp.text);
        // "unsupported" contains "supported", so test it first.
        if (cleaned.find("unsupported") != std::string::npos || cleaned.find("not supported") != std::string::npos) {
            verdict = "unsupported";
        } else if (cleaned.find("supported") != std::string::npos) {
            verdict = "supported";
        } else {
            throw Error(ErrorKind::UnparseableVerdict, resp.text.substr(0, 200));
        }
    }
    const double score = verdict == "supported" ? p : 1.0 - p;
    return {verdict, clamp_score(score)};
}

std::string truncate_snippet(std::string_view text, std::size_t limit) {
    if (text.size() <= limit) return std::string(text);
    std::size_t cut = limit;
    // Back off over UTF-8 continuation bytes.
    while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
    return std::string(text.substr(0, cut));
}

std::string format_evidence_list(std::span<const EvidenceItem> evidence) {
    std::string out;
    for (std::size_t i = 0; i < evidence.size(); ++i) {
        const auto& e = evidence[i];
        out += "[" + std::to_string(i + 1) + "] ";
        if (!e.title.empty()) out += truncate_snippet(e.title) + ": ";
        out += truncate_snippet(e.text);
        if (i + 1 < evidence.size()) out += '\n';
    }
    return out;
}

LlmFewShotScorer::LlmFewShotScorer(const Gateway& gateway, PromptLibrary prompts, std::string model_id)
    : gateway_(gateway), prompts_(std::move(prompts)), model_id_(std::move(model_id)) {}

FewShotVerdict LlmFewShotScorer::classify(std::string_view claim, std::span<const EvidenceItem> evidence) const {
    if (evidence.empty()) throw Error(ErrorKind::EmptyEvidence, std::string(claim));
    ChatRequest req;
    req.model_id = model_id_;
    req.want_logprobs = true;
    req.messages = build_messages(prompts_.get("verify_fewshot"),
                                  {{"claim", std::string(claim)}, {"evidence", format_evidence_list(evidence)}});
    return fewshot_score_from_response(gateway_.complete(req));
}

std::vector<double> LlmFewShotScorer::score(std::string_view claim, std::span<const EvidenceItem> evidence) const {
    return {classify(claim, evidence).score};
}

FixtureTableScorer::FixtureTableScorer(std::map<std::pair<std::string, std::string>, double> exact,
                                       std::map<std::string, double> by_claim)
    : exact_(std::move(exact)), by_claim_(std::move(by_claim)) {}

FixtureTableScorer::FixtureTableScorer(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open verifier fixture " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            const Json j = Json::parse(line);
            const std::string claim = j.at("claim").get<std::string>();
            const double score = j.at("score").get<double>();
            if (auto ev = j.find("evidence"); ev != j.end() && !ev->is_null()) {
                exact_[{claim, ev->get<std::string>()}] = score;
            } else {
                by_claim_[claim] = score;
            }
        } catch (const Json::exception& e) {
            throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

std::vector<double> FixtureTableScorer::score(std::string_view claim, std::span<const EvidenceItem> evidence) const {
    std::vector<double> scores;
    scores.reserve(evidence.size());
    const std::string c(claim);
    for (const auto& e : evidence) {
        if (auto it = exact_.find({c, e.text}); it != exact_.end()) {
            scores.push_back(it->second);
        } else if (auto jt = by_claim_.find(c); jt != by_claim_.end()) {
            scores.push_back(jt->second);
        } else {
            throw Error(ErrorKind::MissingFixture, "no verifier fixture for claim '" + c + "'");
        }
    }
    return scores;
}

}  // namespace dtv
