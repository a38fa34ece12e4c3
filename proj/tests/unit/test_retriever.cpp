#include <doctest.h>

#include <algorithm>
#include <random>

#include "dtv/retriever.hpp"
#include "support/expect.hpp"
#include "support/mock_http.hpp"
#include "support/temp_dir.hpp"

using namespace dtv;
using namespace dtv::testing;

namespace {

std::vector<CorpusDocument> corpus(std::size_t n) {
    const std::vector<CorpusDocument> all = {
        {"d1", "Arctic Ocean", "The Arctic Ocean is the smallest ocean."},
        {"d2", "Pacific Ocean", "The Pacific Ocean is the largest ocean."},
        {"d3", "Imran Khan", "Imran Khan was prime minister of Pakistan."},
        {"d4", "Cricket", "Cricket is played with a bat and ball."},
        {"d5", "Mount Everest", "Everest is the highest mountain above sea level."},
    };
    return {all.begin(), all.begin() + static_cast<long>(n)};
}

}  // namespace

TEST_CASE("lexical_score") {
    CHECK(lexical_score("arctic ocean", "The Arctic Ocean is small") == 2.0);
    CHECK(lexical_score("xyz", "abc") == 0.0);
    CHECK(lexical_score("alpha beta gamma delta", "alpha beta gamma delta") == 4.0);
    // Distinct query tokens only.
    CHECK(lexical_score("ocean ocean", "ocean") == 1.0);
    CHECK(lexical_score("", "anything") == 0.0);
}

TEST_CASE("fixture retriever") {
    SUBCASE("top_k caps the result") {
        FixtureRetriever r(corpus(5), 3);
        const auto items = r.retrieve("ocean");
        REQUIRE(items.size() == 3);
        for (int i = 0; i < 3; ++i) CHECK(items[static_cast<std::size_t>(i)].rank == i + 1);
        CHECK(items[0].source_uri == "fixture:d1");
        CHECK(items[1].source_uri == "fixture:d2");
    }
    SUBCASE("corpus smaller than k") { CHECK(FixtureRetriever(corpus(2), 10).retrieve("anything").size() == 2); }
    SUBCASE("no overlap falls back to doc id order") {
        const auto items = FixtureRetriever(corpus(5), 5).retrieve("zzz");
        std::vector<std::string> ids;
        for (const auto& i : items) ids.push_back(i.source_uri);
        CHECK(ids == std::vector<std::string>{"fixture:d1", "fixture:d2", "fixture:d3", "fixture:d4", "fixture:d5"});
    }
    SUBCASE("empty corpus") {
        CHECK(thrown_kind([] { FixtureRetriever({}, 3).retrieve("q"); }) == ErrorKind::EmptyCorpus);
    }
    SUBCASE("empty query") {
        CHECK(thrown_kind([] { FixtureRetriever(corpus(2), 3).retrieve("  "); }) == ErrorKind::InvalidArgument);
    }
}

TEST_CASE("fixture ordering equals brute force sorting") {
    std::mt19937_64 rng(7);
    const std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "f", "g"};
    auto random_text = [&](std::size_t len) {
        std::string s;
        for (std::size_t i = 0; i < len; ++i) s += vocab[rng() % vocab.size()] + " ";
        return s;
    };
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<CorpusDocument> docs;
        const std::size_t n = 1 + rng() % 12;
        for (std::size_t i = 0; i < n; ++i) {
            docs.push_back({"doc" + std::to_string(rng() % 1000) + "_" + std::to_string(i), "", random_text(1 + rng() % 6)});
        }
        const std::string query = random_text(1 + rng() % 4);
        const int k = 1 + static_cast<int>(rng() % 5);

        auto expected = docs;
        std::sort(expected.begin(), expected.end(), [&](const CorpusDocument& x, const CorpusDocument& y) {
            const double sx = lexical_score(query, x.title + " " + x.text);
            const double sy = lexical_score(query, y.title + " " + y.text);
            return sx != sy ? sx > sy : x.doc_id < y.doc_id;
        });
        const auto got = FixtureRetriever(docs, k).retrieve(query);
        REQUIRE(got.size() == std::min<std::size_t>(static_cast<std::size_t>(k), n));
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].source_uri == "fixture:" + expected[i].doc_id);
            CHECK(got[i].rank == static_cast<int>(i) + 1);
        }
    }
}

TEST_CASE("parse_search_response") {
    const auto one = parse_search_response(R"({"organic":[{"title":"T","snippet":"S","link":"L"}]})");
    REQUIRE(one.size() == 1);
    CHECK(one[0] == EvidenceItem{"T", "S", "L", 1, std::nullopt});
    CHECK(parse_search_response(R"({"organic":[]})").empty());
    CHECK(thrown_kind([] { parse_search_response(R"({"results":[]})"); }) == ErrorKind::MalformedSearchResponse);
    CHECK(thrown_kind([] { parse_search_response("not json"); }) == ErrorKind::MalformedSearchResponse);

    const auto two = parse_search_response(
        R"({"organic":[{"title":"A","snippet":"x","link":"1"},{"title":"B","snippet":"y","link":"2"}]})");
    REQUIRE(two.size() == 2);
    CHECK(two[1].rank == 2);
}

TEST_CASE("web search retriever") {
    auto http = std::make_shared<MockHttp>([](const RecordedRequest&, std::size_t) {
        return HttpResponse{200, R"({"organic":[{"title":"A","snippet":"x","link":"1"},
                                                {"title":"B","snippet":"y","link":"2"},
                                                {"title":"C","snippet":"z","link":"3"}]})",
                            ""};
    });
    WebSearchRetriever r("http://search.local", "k", 2, http, RetryPolicy{0, std::chrono::milliseconds(0)}, no_sleep());
    const auto items = r.retrieve("query text");
    CHECK(items.size() == 2);
    const auto body = Json::parse(http->requests().at(0).body);
    CHECK(body["q"] == "query text");
    CHECK(body["num"] == 2);

    auto down = std::make_shared<MockHttp>([](const RecordedRequest&, std::size_t) -> HttpResponse {
        throw Error(ErrorKind::Transport, "connection refused");
    });
    WebSearchRetriever broken("http://search.local", "k", 2, down, RetryPolicy{0, std::chrono::milliseconds(0)},
                              no_sleep());
    CHECK(thrown_kind([&] { broken.retrieve("q"); }) == ErrorKind::BackendUnavailable);
}

TEST_CASE("vector index") {
    TempDir dir;
    const std::vector<IndexRecord> records = {{"d1", {1.0f, 0.0f}}, {"d2", {0.0f, 1.0f}}, {"d3", {0.7f, 0.7f}}};
    write_vector_index(dir / "index.bin", 2, records);
    const auto back = read_vector_index(dir / "index.bin");
    REQUIRE(back.size() == 3);
    CHECK(back[2].doc_id == "d3");
    CHECK(back[2].vector == records[2].vector);

    CHECK(cosine_similarity({1, 0}, {1, 0}) == doctest::Approx(1.0));
    CHECK(cosine_similarity({1, 0}, {0, 1}) == doctest::Approx(0.0));
    CHECK(thrown_kind([] { cosine_similarity({1}, {1, 2}); }) == ErrorKind::InvalidArgument);

    auto http = std::make_shared<MockHttp>([](const RecordedRequest&, std::size_t) {
        return HttpResponse{200, R"({"data":[{"embedding":[0.9,0.1]}]})", ""};
    });
    VectorIndexRetriever r(back, corpus(3), 2, "http://embed.local", "k", "embed-model", http,
                           RetryPolicy{0, std::chrono::milliseconds(0)}, no_sleep());
    const auto items = r.retrieve("arctic");
    REQUIRE(items.size() == 2);
    CHECK(items[0].source_uri == "index:d1");
    CHECK(items[1].source_uri == "index:d3");
    CHECK(items[0].backend_score.has_value());
    CHECK(Json::parse(http->requests().at(0).body)["model"] == "embed-model");
}

TEST_CASE("load_corpus") {
    TempDir dir;
    dir.write("c.jsonl", "{\"doc_id\":\"a\",\"title\":\"T\",\"text\":\"x\"}\n\n{\"doc_id\":\"b\",\"title\":\"U\",\"text\":\"y\"}\n");
    CHECK(load_corpus(dir / "c.jsonl").size() == 2);
    dir.write("bad.jsonl", "{\"doc_id\":\"a\"\n");
    CHECK(thrown_kind([&] { load_corpus(dir / "bad.jsonl"); }) == ErrorKind::ParseError);
    CHECK(thrown_kind([&] { load_corpus(dir / "missing.jsonl"); }) == ErrorKind::Io);
}

TEST_CASE("default top_k") {
    RetrieverConfig cfg;
    cfg.backend = RetrieverBackend::WebSearch;
    CHECK(cfg.effective_top_k() == 10);
    cfg.backend = RetrieverBackend::VectorIndex;
    CHECK(cfg.effective_top_k() == 3);
    cfg.top_k = 5;
    CHECK(cfg.effective_top_k() == 5);
}
