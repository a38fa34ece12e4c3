#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dtv/http.hpp"

namespace dtv {

struct EvidenceItem {
    std::string title;
    std::string text;
    std::string source_uri;
    int rank = 1;
    std::optional<double> backend_score;

    bool operator==(const EvidenceItem&) const = default;
};

enum class RetrieverBackend { Fixture, WebSearch, VectorIndex };

std::string_view to_string(RetrieverBackend backend);
RetrieverBackend parse_retriever_backend(std::string_view name);

struct RetrieverConfig {
    RetrieverBackend backend = RetrieverBackend::Fixture;
    // 0 means the backend default: 3 for the vector index and the fixture corpus, 10 for web search.
    int top_k = 0;
    // Fixture and VectorIndex: JSONL of {doc_id, title, text}.
    std::filesystem::path corpus_path;
    // VectorIndex: binary index file.
    std::filesystem::path index_path;
    // WebSearch: search API URL. VectorIndex: embeddings URL.
    std::string endpoint;
    std::string key_env;
    std::string embedding_model;
    RetryPolicy retry;

    int effective_top_k() const;
};

std::vector<std::string> tokenize(std::string_view text);

// Number of distinct case-folded query tokens that also occur in the document.
double lexical_score(std::string_view query, std::string_view document);

// organic[i] -> EvidenceItem{title, snippet, link, rank = i + 1}. Throws MalformedSearchResponse.
std::vector<EvidenceItem> parse_search_response(std::string_view json_body);

struct CorpusDocument {
    std::string doc_id;
    std::string title;
    std::string text;
};

std::vector<CorpusDocument> load_corpus(const std::filesystem::path& path);

// Vector index file, little-endian: u32 dim, then per record a u32 id length, the id
// bytes, and dim f32 values.
struct IndexRecord {
    std::string doc_id;
    std::vector<float> vector;
};

void write_vector_index(const std::filesystem::path& path, std::uint32_t dim,
                        const std::vector<IndexRecord>& records);
std::vector<IndexRecord> read_vector_index(const std::filesystem::path& path);

double cosine_similarity(const std::vector<float>& a, const std::vector<float>& b);

class Retriever {
public:
    virtual ~Retriever() = default;
    // At most top_k items with ranks 1..k in order.
    virtual std::vector<EvidenceItem> retrieve(std::string_view query) const = 0;
};

// Ranks every document by (lexical_score desc, doc_id asc); title and text are both scored.
class FixtureRetriever final : public Retriever {
public:
    FixtureRetriever(std::vector<CorpusDocument> docs, int top_k);
    std::vector<EvidenceItem> retrieve(std::string_view query) const override;

private:
    std::vector<CorpusDocument> docs_;
    int top_k_;
};

class WebSearchRetriever final : public Retriever {
public:
    WebSearchRetriever(std::string endpoint, std::string api_key, int top_k,
                       std::shared_ptr<const HttpClient> http, RetryPolicy retry = {},
                       Sleeper sleeper = real_sleeper(), std::shared_ptr<InFlightLimiter> limiter = nullptr);
    std::vector<EvidenceItem> retrieve(std::string_view query) const override;

private:
    std::string endpoint_;
    std::string api_key_;
    int top_k_;
    std::shared_ptr<const HttpClient> http_;
    RetryPolicy retry_;
    Sleeper sleeper_;
    std::shared_ptr<InFlightLimiter> limiter_;
};

// Exact cosine search over a flat index; query embeddings come from an
// embeddings endpoint ({model, input} -> data[0].embedding).
class VectorIndexRetriever final : public Retriever {
public:
    VectorIndexRetriever(std::vector<IndexRecord> index, std::vector<CorpusDocument> docs, int top_k,
                         std::string endpoint, std::string api_key, std::string model,
                         std::shared_ptr<const HttpClient> http, RetryPolicy retry = {},
                         Sleeper sleeper = real_sleeper(), std::shared_ptr<InFlightLimiter> limiter = nullptr);
    std::vector<EvidenceItem> retrieve(std::string_view query) const override;

    std::vector<float> embed(std::string_view text) const;

private:
    std::vector<IndexRecord> index_;
    std::vector<CorpusDocument> docs_;
    int top_k_;
    std::string endpoint_;
    std::string api_key_;
    std::string model_;
    std::shared_ptr<const HttpClient> http_;
    RetryPolicy retry_;
    Sleeper sleeper_;
    std::shared_ptr<InFlightLimiter> limiter_;
};

std::unique_ptr<Retriever> make_retriever(const RetrieverConfig& cfg, std::shared_ptr<const HttpClient> http,
                                          std::shared_ptr<InFlightLimiter> limiter = nullptr);

}  // namespace dtv
