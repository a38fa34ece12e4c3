#include "dtv/retriever.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>

#include "dtv/core.hpp"
#include "dtv/error.hpp"

namespace dtv {

namespace fs = std::filesystem;

std::string_view to_string(RetrieverBackend backend) {
    switch (backend) {
        case RetrieverBackend::Fixture: return "fixture";
        case RetrieverBackend::WebSearch: return "web_search";
        case RetrieverBackend::VectorIndex: return "vector_index";
    }
    return "fixture";
}

RetrieverBackend parse_retriever_backend(std::string_view name) {
    const std::string n = to_lower(trim(name));
    if (n == "fixture") return RetrieverBackend::Fixture;
    if (n == "web_search" || n == "websearch") return RetrieverBackend::WebSearch;
    if (n == "vector_index" || n == "vectorindex") return RetrieverBackend::VectorIndex;
    throw Error(ErrorKind::InvalidConfig, "unknown retriever backend '" + std::string(name) + "'");
}

int RetrieverConfig::effective_top_k() const {
    if (top_k < 0) throw Error(ErrorKind::InvalidConfig, "retriever.top_k must be >= 1");
    if (top_k > 0) return top_k;
    return backend == RetrieverBackend::WebSearch ? 10 : 3;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c >= 0x80) {
            current += static_cast<char>(std::tolower(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

double lexical_score(std::string_view query, std::string_view document) {
    const auto q = tokenize(query);
    const auto d = tokenize(document);
    const std::set<std::string> query_types(q.begin(), q.end());
    const std::set<std::string> doc_types(d.begin(), d.end());
    std::size_t overlap = 0;
    for (const auto& t : query_types) overlap += doc_types.count(t);
    return static_cast<double>(overlap);
}

std::vector<EvidenceItem> parse_search_response(std::string_view json_body) {
    Json j;
    try {
        j = Json::parse(json_body);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorKind::MalformedSearchResponse, e.what());
    }
    if (!j.is_object()) throw Error(ErrorKind::MalformedSearchResponse, "body is not an object");
    auto organic = j.find("organic");
    if (organic == j.end() || !organic->is_array()) {
        throw Error(ErrorKind::MalformedSearchResponse, "missing 'organic' array");
    }
    std::vector<EvidenceItem> items;
    int rank = 0;
    for (const auto& r : *organic) {
        ++rank;
        if (!r.is_object()) throw Error(ErrorKind::MalformedSearchResponse, "organic entry is not an object");
        auto str = [&](const char* key) {
            auto it = r.find(key);
            return (it != r.end() && it->is_string()) ? it->get<std::string>() : std::string{};
        };
        EvidenceItem item{str("title"), str("snippet"), str("link"), rank, std::nullopt};
        if (trim(item.text).empty()) item.text = item.title;
        // Results with neither snippet nor title carry no evidence; ranks keep their gap.
        if (trim(item.text).empty()) continue;
        items.push_back(std::move(item));
    }
    return items;
}

std::vector<CorpusDocument> load_corpus(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open corpus " + path.string());
    std::vector<CorpusDocument> docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            const Json j = Json::parse(line);
            CorpusDocument doc{j.at("doc_id").get<std::string>(), j.value("title", std::string{}),
                               j.at("text").get<std::string>()};
            if (trim(doc.text).empty()) {
                throw Error(ErrorKind::InvalidField, "empty text for doc " + doc.doc_id);
            }
            docs.push_back(std::move(doc));
        } catch (const Json::exception& e) {
            throw Error(ErrorKind::ParseError,
                        path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return docs;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
    const unsigned char bytes[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                    static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4)) throw Error(ErrorKind::Io, "truncated vector index");
    return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
           (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
}

void put_f32(std::ostream& out, float f) {
    std::uint32_t bits = 0;
    std::memcpy(&bits, &f, sizeof bits);
    put_u32(out, bits);
}

float get_f32(std::istream& in) {
    const std::uint32_t bits = get_u32(in);
    float f = 0.0F;
    std::memcpy(&f, &bits, sizeof f);
    return f;
}

}  // namespace

void write_vector_index(const fs::path& path, std::uint32_t dim, const std::vector<IndexRecord>& records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write vector index " + path.string());
    put_u32(out, dim);
    for (const auto& r : records) {
        if (r.vector.size() != dim) {
            throw Error(ErrorKind::InvalidArgument, "vector for " + r.doc_id + " has wrong dimension");
        }
        put_u32(out, static_cast<std::uint32_t>(r.doc_id.size()));
        out.write(r.doc_id.data(), static_cast<std::streamsize>(r.doc_id.size()));
        for (float f : r.vector) put_f32(out, f);
    }
}

std::vector<IndexRecord> read_vector_index(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open vector index " + path.string());
    const std::uint32_t dim = get_u32(in);
    std::vector<IndexRecord> records;
    while (in.peek() != std::char_traits<char>::eof()) {
        IndexRecord r;
        const std::uint32_t len = get_u32(in);
        r.doc_id.resize(len);
        if (!in.read(r.doc_id.data(), len)) throw Error(ErrorKind::Io, "truncated vector index");
        r.vector.resize(dim);
        for (auto& f : r.vector) f = get_f32(in);
        records.push_back(std::move(r));
    }
    return records;
}

double cosine_similarity(const std::vector<float>& a, const std::vector<float>& b) {
    if (a.size() != b.size()) throw Error(ErrorKind::InvalidArgument, "embedding dimension mismatch");
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

void require_query(std::string_view query) {
    if (trim(query).empty()) throw Error(ErrorKind::InvalidArgument, "empty retrieval query");
}

void require_top_k(int top_k) {
    if (top_k < 1) throw Error(ErrorKind::InvalidConfig, "top_k must be >= 1");
}

}  // namespace

FixtureRetriever::FixtureRetriever(std::vector<CorpusDocument> docs, int top_k)
    : docs_(std::move(docs)), top_k_(top_k) {
    require_top_k(top_k_);
}

std::vector<EvidenceItem> FixtureRetriever::retrieve(std::string_view query) const {
    require_query(query);
    if (docs_.empty()) throw Error(ErrorKind::EmptyCorpus, "fixture corpus has no documents");

    std::vector<std::pair<double, const CorpusDocument*>> scored;
    scored.reserve(docs_.size());
    for (const auto& d : docs_) scored.emplace_back(lexical_score(query, d.title + " " + d.text), &d);
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(top_k_), scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(),
                      [](const auto& a, const auto& b) {
                          if (a.first != b.first) return a.first > b.first;
                          return a.second->doc_id < b.second->doc_id;
                      });
    std::vector<EvidenceItem> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const auto& [score, doc] = scored[i];
        out.push_back({doc->title, doc->text, "fixture:" + doc->doc_id, static_cast<int>(i + 1), score});
    }
    return out;
}

WebSearchRetriever::WebSearchRetriever(std::string endpoint, std::string api_key, int top_k,
                                       std::shared_ptr<const HttpClient> http, RetryPolicy retry, Sleeper sleeper,
                                       std::shared_ptr<InFlightLimiter> limiter)
    : endpoint_(std::move(endpoint)),
      api_key_(std::move(api_key)),
      top_k_(top_k),
      http_(std::move(http)),
      retry_(retry),
      sleeper_(std::move(sleeper)),
      limiter_(std::move(limiter)) {
    require_top_k(top_k_);
    if (endpoint_.empty()) throw Error(ErrorKind::InvalidConfig, "web search endpoint not configured");
}

std::vector<EvidenceItem> WebSearchRetriever::retrieve(std::string_view query) const {
    require_query(query);
    const Json body = {{"q", std::string(query)}, {"num", top_k_}};
    Headers headers;
    if (!api_key_.empty()) headers["X-API-KEY"] = api_key_;
    std::string resp;
    try {
        resp = post_with_retry(*http_, endpoint_, body.dump(), headers, retry_, sleeper_, limiter_.get());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Transport) throw Error(ErrorKind::BackendUnavailable, e.detail());
        throw;
    }
    auto items = parse_search_response(resp);
    if (items.size() > static_cast<std::size_t>(top_k_)) items.resize(static_cast<std::size_t>(top_k_));
    return items;
}

VectorIndexRetriever::VectorIndexRetriever(std::vector<IndexRecord> index, std::vector<CorpusDocument> docs,
                                           int top_k, std::string endpoint, std::string api_key, std::string model,
                                           std::shared_ptr<const HttpClient> http, RetryPolicy retry,
                                           Sleeper sleeper, std::shared_ptr<InFlightLimiter> limiter)
    : index_(std::move(index)),
      docs_(std::move(docs)),
      top_k_(top_k),
      endpoint_(std::move(endpoint)),
      api_key_(std::move(api_key)),
      model_(std::move(model)),
      http_(std::move(http)),
      retry_(retry),
      sleeper_(std::move(sleeper)),
      limiter_(std::move(limiter)) {
    require_top_k(top_k_);
    std::sort(docs_.begin(), docs_.end(), [](const auto& a, const auto& b) { return a.doc_id < b.doc_id; });
}

std::vector<float> VectorIndexRetriever::embed(std::string_view text) const {
    const Json body = {{"model", model_}, {"input", std::string(text)}};
    Headers headers;
    if (!api_key_.empty()) headers["Authorization"] = "Bearer " + api_key_;
    std::string resp;
    try {
        resp = post_with_retry(*http_, endpoint_, body.dump(), headers, retry_, sleeper_, limiter_.get());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Transport) throw Error(ErrorKind::BackendUnavailable, e.detail());
        throw;
    }
    try {
        return Json::parse(resp).at("data").at(0).at("embedding").get<std::vector<float>>();
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::MalformedResponse, std::string("embedding response: ") + e.what());
    }
}

std::vector<EvidenceItem> VectorIndexRetriever::retrieve(std::string_view query) const {
    require_query(query);
    if (index_.empty()) throw Error(ErrorKind::EmptyCorpus, "vector index has no records");
    const std::vector<float> q = embed(query);

    std::vector<std::pair<double, const IndexRecord*>> scored;
    scored.reserve(index_.size());
    for (const auto& r : index_) scored.emplace_back(cosine_similarity(q, r.vector), &r);
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(top_k_), scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(),
                      [](const auto& a, const auto& b) {
                          if (a.first != b.first) return a.first > b.first;
                          return a.second->doc_id < b.second->doc_id;
                      });
    std::vector<EvidenceItem> out;
    for (std::size_t i = 0; i < k; ++i) {
        const auto& [score, rec] = scored[i];
        auto doc = std::lower_bound(docs_.begin(), docs_.end(), rec->doc_id,
                                    [](const CorpusDocument& d, const std::string& id) { return d.doc_id < id; });
        if (doc == docs_.end() || doc->doc_id != rec->doc_id) {
            throw Error(ErrorKind::MissingFixture, "index doc " + rec->doc_id + " not in corpus");
        }
        out.push_back({doc->title, doc->text, "index:" + doc->doc_id, static_cast<int>(i + 1), score});
    }
    return out;
}

std::unique_ptr<Retriever> make_retriever(const RetrieverConfig& cfg, std::shared_ptr<const HttpClient> http,
                                          std::shared_ptr<InFlightLimiter> limiter) {
    const int k = cfg.effective_top_k();
    switch (cfg.backend) {
        case RetrieverBackend::Fixture:
            return std::make_unique<FixtureRetriever>(load_corpus(cfg.corpus_path), k);
        case RetrieverBackend::WebSearch:
            return std::make_unique<WebSearchRetriever>(cfg.endpoint, env_or_empty(cfg.key_env), k, std::move(http),
                                                        cfg.retry, real_sleeper(), std::move(limiter));
        case RetrieverBackend::VectorIndex:
            return std::make_unique<VectorIndexRetriever>(read_vector_index(cfg.index_path),
                                                          load_corpus(cfg.corpus_path), k, cfg.endpoint,
                                                          env_or_empty(cfg.key_env), cfg.embedding_model,
                                                          std::move(http), cfg.retry, real_sleeper(),
                                                          std::move(limiter));
    }
    throw Error(ErrorKind::InvalidConfig, "unknown retriever backend");
}

}  // namespace dtv
