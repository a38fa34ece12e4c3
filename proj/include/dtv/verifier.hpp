#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dtv/core.hpp"
#include "dtv/decomposer.hpp"
#include "dtv/gateway.hpp"
#include "dtv/retriever.hpp"

namespace dtv {

enum class VerifierBackend { RemoteNli, LlmFewShot, FixtureTable };

std::string_view to_string(VerifierBackend backend);
VerifierBackend parse_verifier_backend(std::string_view name);

struct VerifierConfig {
    VerifierBackend backend = VerifierBackend::FixtureTable;
    std::string endpoint;  // RemoteNli
    std::string key_env;   // RemoteNli
    std::string model_id;  // LlmFewShot
    std::filesystem::path fixture_path;  // FixtureTable
    RetryPolicy retry;
};

// Entailment backend: one score per evidence item, or a single score over the whole list.
class EntailmentScorer {
public:
    virtual ~EntailmentScorer() = default;
    virtual std::vector<double> score(std::string_view claim, std::span<const EvidenceItem> evidence) const = 0;
    virtual std::string id() const = 0;
};

// Throws EmptyEvidence. combined = max(per_evidence).
SubClaimScore score_subclaim(std::size_t subclaim_index, std::string_view claim,
                             std::span<const EvidenceItem> evidence, const EntailmentScorer& scorer);

// Finite values are clamped to [0,1]; NaN and infinities raise OutOfRange.
double clamp_score(double raw);

// Parses {"score": x}; x may be a number or a numeric string.
double parse_nli_score(std::string_view body);

// POSTs {premise: evidence, hypothesis: claim} per evidence item.
class RemoteNliScorer final : public EntailmentScorer {
public:
    RemoteNliScorer(std::string endpoint, std::string api_key, std::shared_ptr<const HttpClient> http,
                    RetryPolicy retry = {}, Sleeper sleeper = real_sleeper(),
                    std::shared_ptr<InFlightLimiter> limiter = nullptr);

    double score_pair(std::string_view claim, std::string_view evidence_text) const;
    std::vector<double> score(std::string_view claim, std::span<const EvidenceItem> evidence) const override;
    std::string id() const override { return "remote_nli"; }

private:
    std::string endpoint_;
    std::string api_key_;
    std::shared_ptr<const HttpClient> http_;
    RetryPolicy retry_;
    Sleeper sleeper_;
    std::shared_ptr<InFlightLimiter> limiter_;
};

struct FewShotVerdict {
    std::string label_token;  // "supported" or "unsupported"
    double score = 0.0;
};

// Score from a logprob-bearing reply: p = exp(logprob of the matched verdict token),
// score = p for "supported" and 1 - p for "unsupported". Without a matched token, p comes
// from the cumulative logprob and the verdict from the cleaned reply text.
FewShotVerdict fewshot_score_from_response(const ChatResponse& resp);

inline constexpr std::size_t kSnippetLimit = 1000;

// Cuts at a UTF-8 boundary at or below `limit` bytes.
std::string truncate_snippet(std::string_view text, std::size_t limit = kSnippetLimit);

std::string format_evidence_list(std::span<const EvidenceItem> evidence);

class LlmFewShotScorer final : public EntailmentScorer {
public:
    LlmFewShotScorer(const Gateway& gateway, PromptLibrary prompts, std::string model_id);

    FewShotVerdict classify(std::string_view claim, std::span<const EvidenceItem> evidence) const;
    std::vector<double> score(std::string_view claim, std::span<const EvidenceItem> evidence) const override;
    std::string id() const override { return "llm_fewshot:" + model_id_; }

private:
    const Gateway& gateway_;
    PromptLibrary prompts_;
    std::string model_id_;
};

// JSONL rows {claim, evidence?, score}. A row without "evidence" applies to any evidence
// for that claim; exact (claim, evidence) rows take precedence. Misses raise MissingFixture.
class FixtureTableScorer final : public EntailmentScorer {
public:
    explicit FixtureTableScorer(const std::filesystem::path& path);
    FixtureTableScorer(std::map<std::pair<std::string, std::string>, double> exact,
                       std::map<std::string, double> by_claim);

    std::vector<double> score(std::string_view claim, std::span<const EvidenceItem> evidence) const override;
    std::string id() const override { return "fixture_table"; }

private:
    std::map<std::pair<std::string, std::string>, double> exact_;
    std::map<std::string, double> by_claim_;
};

}  // namespace dtv
