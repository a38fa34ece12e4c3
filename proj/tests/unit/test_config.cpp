#include <doctest.h>

#include "dtv/config.hpp"
#include "support/expect.hpp"
#include "support/temp_dir.hpp"

using namespace dtv;
using namespace dtv::testing;

TEST_CASE("TOML subset") {
    const auto j = parse_toml(R"(
# comment
top = 1
[a]
s = "x \"quoted\" \u00e9"  # trailing comment
lit = 'C:\path'
i = -42
f = 1.5e-3
b = true
arr = [1, 2, 3]
mixed = ["a", 'b']
"quoted key" = false
[a.sub]
deep.key = "v"
)");
    CHECK(j["top"] == 1);
    CHECK(j["a"]["s"] == "x \"quoted\" \xC3\xA9");
    CHECK(j["a"]["lit"] == "C:\\path");
    CHECK(j["a"]["i"] == -42);
    CHECK(j["a"]["f"].get<double>() == doctest::Approx(0.0015));
    CHECK(j["a"]["b"] == true);
    CHECK(j["a"]["arr"] == Json::array({1, 2, 3}));
    CHECK(j["a"]["mixed"] == Json::array({"a", "b"}));
    CHECK(j["a"]["quoted key"] == false);
    CHECK(j["a"]["sub"]["deep"]["key"] == "v");
}

TEST_CASE("TOML dotted tables") {
    const auto j = parse_toml("[x.y]\nz = 2\n[w]\nv.u = 3\n");
    CHECK(j["x"]["y"]["z"] == 2);
    CHECK(j["w"]["v"]["u"] == 3);
}

TEST_CASE("TOML errors carry the line") {
    auto line_of = [](const std::string& text) -> std::string {
        try {
            parse_toml(text);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::InvalidConfig);
            return e.detail();
        }
        return "no error";
    };
    CHECK(line_of("a = 1\nb = \n").rfind("line 2", 0) == 0);
    CHECK(line_of("a = \"unterminated\n").rfind("line 1", 0) == 0);
    CHECK(line_of("[a]\nx = 1\nx = 2\n").rfind("line 3", 0) == 0);
    CHECK(line_of("[broken\n").rfind("line 1", 0) == 0);
    CHECK(line_of("novalue\n").rfind("line 1", 0) == 0);
    CHECK(line_of("[a]\nb = true\n[a.b]\n").rfind("line 3", 0) == 0);
}

TEST_CASE("pipeline config") {
    TempDir dir;
    dir.write("corpus.jsonl", "{\"doc_id\":\"a\",\"title\":\"\",\"text\":\"x\"}\n");
    dir.write("verifier.jsonl", "{\"claim\":\"c\",\"score\":0.5}\n");
    const std::string base =
        "[retriever]\nbackend = \"fixture\"\ncorpus_path = \"corpus.jsonl\"\n"
        "[verifier]\nbackend = \"fixture_table\"\nfixture_path = \"verifier.jsonl\"\n";

    SUBCASE("baseline with fixtures needs no gateway") {
        const auto cfg = load_config(dir.write("c.toml", base));
        CHECK(cfg.decomposer.method == DecompositionMethod::baseline());
        CHECK_FALSE(cfg.needs_gateway());
        CHECK(cfg.retriever.corpus_path == dir / "corpus.jsonl");
        CHECK(cfg.output_dir == std::filesystem::absolute(dir.path()));
        CHECK(cfg.aggregator.threshold == 0.5);
        CHECK(cfg.gateway.max_in_flight == 8);
    }
    SUBCASE("every section") {
        const auto cfg = load_config(dir.write(
            "c.toml", base +
                          "[decomposer]\nmethod = \"exact_n\"\nexact_n = 4\nmodel_id = \"m\"\ngranularity = \"response\"\n"
                          "[aggregator]\nmethod = \"min\"\nthreshold = 0.6\nepsilon = 1e-4\n"
                          "[gateway]\nendpoint = \"http://x\"\nkey_env = \"K\"\ncache_dir = \"cache\"\n"
                          "max_in_flight = 2\nretries = 5\nbackoff_ms = 10\n"
                          "[output]\ndir = \"results\"\n"));
        CHECK(cfg.decomposer.method == DecompositionMethod::exact(4));
        CHECK(cfg.decomposer.granularity == Granularity::Response);
        CHECK(cfg.aggregator.method == AggregationMethod::Min);
        CHECK(cfg.aggregator.threshold == 0.6);
        CHECK(cfg.gateway.cache_dir == std::filesystem::absolute(dir.path()) / "cache");
        CHECK(cfg.gateway.retries == 5);
        CHECK(cfg.verifier.retry.retries == 5);
        CHECK(cfg.output_dir == std::filesystem::absolute(dir.path()) / "results");
    }
    SUBCASE("rejections") {
        auto kind_for = [&](const std::string& extra) {
            return thrown_kind([&] { load_config(dir.write("bad.toml", base + extra)); });
        };
        CHECK(kind_for("[decomposer]\nmethod = \"factscore\"\n") == ErrorKind::InvalidConfig);  // no model_id
        CHECK(kind_for("[decomposer]\nmethod = \"factscore\"\nmodel_id = \"m\"\n") == ErrorKind::InvalidConfig);  // no gateway
        CHECK(kind_for("[decomposer]\nmethod = \"magic\"\n") == ErrorKind::InvalidConfig);
        CHECK(kind_for("[aggregator]\nthreshold = 1.5\n") == ErrorKind::InvalidConfig);
        CHECK(kind_for("[aggregator]\nthresold = 0.5\n") == ErrorKind::InvalidConfig);
        CHECK(kind_for("[gateway]\nmax_in_flight = 0\n") == ErrorKind::InvalidConfig);
        CHECK(kind_for("[extras]\nx = 1\n") == ErrorKind::InvalidConfig);
        CHECK(kind_for("[decomposer]\nbackend = \"fixture\"\nfixture_path = \"nope.jsonl\"\n") == ErrorKind::InvalidConfig);
        CHECK(thrown_kind([&] { load_config(dir / "missing.toml"); }) == ErrorKind::InvalidConfig);
        CHECK(thrown_kind([&] {
                  load_config(dir.write("nocorpus.toml", "[verifier]\nfixture_path = \"verifier.jsonl\"\n"));
              }) == ErrorKind::InvalidConfig);
    }
}
