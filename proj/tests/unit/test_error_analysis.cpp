#include <doctest.h>

#include <random>
#include <set>

#include "dtv/error_analysis.hpp"
#include "support/analysis_cases.hpp"
#include "support/expect.hpp"
#include "support/mock_http.hpp"

using namespace dtv;
using namespace dtv::testing;

namespace {

using C = ErrorCategory;
using S = ErrorSubtype;

Decomposition decomposition_of(const std::vector<std::string>& texts, const std::string& id = "e1") {
    return make_decomposition(id, DecompositionMethod::of(MethodKind::FactScore), texts, "mock-model");
}

}  // namespace

TEST_CASE("taxonomy membership") {
    CHECK(category_of(S::MissingCoreClaims) == C::OmissionOfContext);
    CHECK(category_of(S::MissingLogicalRelationships) == C::OmissionOfContext);
    CHECK(category_of(S::VagueLanguage) == C::Ambiguity);
    CHECK(category_of(S::RedundantInformation) == C::OverDecomposition);
    CHECK(category_of(S::ExcessiveFragmentation) == C::OverDecomposition);
    CHECK(thrown_kind([] { ErrorType::make(C::AlterationOfMeaning, S::VagueLanguage); }) == ErrorKind::InvalidArgument);
    CHECK(to_string(et(C::OverDecomposition, S::ExcessiveFragmentation)) == "Over-Decomposition: Excessive Fragmentation");
}

TEST_CASE("parse_error_type") {
    CHECK(parse_error_type("Omission of Context Information - Missing Logical Relationships") ==
          et(C::OmissionOfContext, S::MissingLogicalRelationships));
    CHECK(parse_error_type("- Over-Decomposition: Excessive Fragmentation") ==
          et(C::OverDecomposition, S::ExcessiveFragmentation));
    CHECK(parse_error_type("Alteration of Original Meaning") == et(C::AlterationOfMeaning));
    CHECK(parse_error_type("AMBIGUITY: VAGUE LANGUAGE") == et(C::Ambiguity, S::VagueLanguage));
    CHECK(parse_error_type("Omission of Context Information: Missing Core Claims or Key Details") ==
          et(C::OmissionOfContext, S::MissingCoreClaims));
    CHECK(parse_error_type("**Over-Decomposition** (Redundant Information)") ==
          et(C::OverDecomposition, S::RedundantInformation));
    CHECK(thrown_kind([] { parse_error_type("Factual Error"); }) == ErrorKind::UnknownErrorType);
    CHECK(thrown_kind([] { parse_error_type("Ambiguity - Missing Core Claims"); }) == ErrorKind::UnknownErrorType);
}

TEST_CASE("parse_judgment") {
    CHECK(parse_judgment("Acceptable") == Judgment::Acceptable);
    CHECK(parse_judgment("Good") == Judgment::Acceptable);
    CHECK(parse_judgment("problematic") == Judgment::Problematic);
    CHECK(parse_judgment("No need for decomposition") == Judgment::NoNeedForDecomposition);
    CHECK(thrown_kind([] { parse_judgment("unclear"); }) == ErrorKind::ParseError);
}

TEST_CASE("detection fixture suite") {
    for (const auto& c : detection_cases()) {
        CAPTURE(c.name);
        if (c.error_kind) {
            CHECK(thrown_kind([&] { parse_detection_response(c.raw); }) == c.error_kind);
            continue;
        }
        const auto report = parse_detection_response(c.raw);
        CHECK(report.judgment == *c.judgment);
        CHECK(report.errors == c.errors);
        CHECK(report.raw == c.raw);
        CHECK_FALSE(report.reasoning.empty());
    }
}

TEST_CASE("reflection fixture suite") {
    for (const auto& c : reflection_cases()) {
        CAPTURE(c.name);
        const auto original = decomposition_of(c.original);
        if (c.error_kind) {
            CHECK(thrown_kind([&] { parse_reflection_response(c.raw, c.input_text, original); }) == c.error_kind);
            continue;
        }
        const auto result = parse_reflection_response(c.raw, c.input_text, original);
        CHECK(result.refined.texts() == c.refined);
        CHECK(result.refined.method == DecompositionMethod::reflected(original.method));
        CHECK(result.refined.source_id == "e1");
    }
}

TEST_CASE("imran khan refinement keeps the causal link in every sub-claim") {
    const auto result = parse_reflection_response(read_fixture("analysis/reflect_imran_khan.txt"), kImranKhanInput,
                                                  decomposition_of(kImranKhanDecomposition));
    for (const auto& t : result.refined.texts()) CHECK(t.rfind("Due to Imran Khan's criticism", 0) == 0);
}

TEST_CASE("render then parse round-trips random reports") {
    const std::vector<ErrorType> pool = {
        et(C::OmissionOfContext), et(C::OmissionOfContext, S::MissingCoreClaims),
        et(C::OmissionOfContext, S::MissingLogicalRelationships), et(C::Ambiguity), et(C::Ambiguity, S::VagueLanguage),
        et(C::OverDecomposition), et(C::OverDecomposition, S::RedundantInformation),
        et(C::OverDecomposition, S::ExcessiveFragmentation), et(C::AlterationOfMeaning)};
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        ErrorReport r;
        const auto pick = rng() % 3;
        r.judgment = pick == 0 ? Judgment::Acceptable : pick == 1 ? Judgment::Problematic : Judgment::NoNeedForDecomposition;
        if (r.judgment == Judgment::Problematic) {
            const std::size_t n = 1 + rng() % 5;
            for (std::size_t i = 0; i < n; ++i) r.errors.push_back(pool[rng() % pool.size()]);
        }
        r.reasoning = "Reason " + std::to_string(trial) + ".\nSecond line.";
        const auto back = parse_detection_response(render_detection_response(r));
        CHECK(back.judgment == r.judgment);
        CHECK(back.errors == r.errors);
        CHECK(back.reasoning == r.reasoning);
    }
}

TEST_CASE("error_distribution") {
    ErrorReport over_only{Judgment::Problematic, {et(C::OverDecomposition, S::RedundantInformation)}, "", ""};
    ErrorReport over_and_vague{
        Judgment::Problematic,
        {et(C::OverDecomposition), et(C::OverDecomposition, S::ExcessiveFragmentation), et(C::Ambiguity)}, "", ""};
    const std::vector<ErrorReport> two = {over_only, over_and_vague};
    const auto d = error_distribution(two);
    CHECK(d.at(C::OverDecomposition) == 1.0);
    CHECK(d.at(C::Ambiguity) == 0.5);
    CHECK(d.at(C::OmissionOfContext) == 0.0);
    CHECK(d.at(C::AlterationOfMeaning) == 0.0);

    const std::vector<ErrorReport> clean(3, ErrorReport{});
    for (const auto& [c, v] : error_distribution(clean)) CHECK(v == 0.0);

    const std::vector<ErrorReport> all = {ErrorReport{
        Judgment::Problematic,
        {et(C::OmissionOfContext), et(C::Ambiguity), et(C::OverDecomposition), et(C::AlterationOfMeaning)}, "", ""}};
    for (const auto& [c, v] : error_distribution(all)) CHECK(v == 1.0);

    CHECK(thrown_kind([] { error_distribution({}); }) == ErrorKind::EmptyReports);
}

TEST_CASE("error_distribution equals brute-force counting") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<ErrorReport> reports(1 + rng() % 8);
        for (auto& r : reports) {
            const std::size_t n = rng() % 4;
            for (std::size_t i = 0; i < n; ++i) r.errors.push_back(et(kAllCategories[rng() % 4]));
        }
        const auto d = error_distribution(reports);
        for (auto c : kAllCategories) {
            std::size_t count = 0;
            for (const auto& r : reports) {
                bool any = false;
                for (const auto& e : r.errors) any = any || e.category == c;
                count += any ? 1 : 0;
            }
            CHECK(d.at(c) == static_cast<double>(count) / static_cast<double>(reports.size()));
            CHECK(d.at(c) >= 0.0);
            CHECK(d.at(c) <= 1.0);
        }
    }
}

TEST_CASE("report JSON") {
    const auto report = parse_detection_response(read_fixture("analysis/detect_imran_khan.txt"));
    const auto j = report_to_json("e7", report);
    CHECK(j["entry_id"] == "e7");
    CHECK(j["judgment"] == "Problematic");
    CHECK(j["errors"] == Json::array({"Omission of Context Information: Missing Logical Relationships"}));
    CHECK(j["reasoning"].get<std::string>().find("causal relationship") != std::string::npos);
}

TEST_CASE("analyzer renders the prompt and parses the reply") {
    auto http = scripted_chat({read_fixture("analysis/reflect_imran_khan.txt")});
    Gateway gw(mock_gateway_config(), http, no_sleep());
    ErrorAnalyzer analyzer(gw, PromptLibrary::builtin(), "mock-model");
    const auto original = decomposition_of(kImranKhanDecomposition);

    const auto report = analyzer.detect_errors(kImranKhanInput, original);
    CHECK(report.judgment == Judgment::Problematic);
    const auto prompt = Json::parse(http->requests().at(0).body)["messages"].back()["content"].get<std::string>();
    CHECK(prompt.find(kImranKhanInput) != std::string::npos);
    CHECK(prompt.find("- French authorities deported 118 Pakistani citizens from the country.") != std::string::npos);

    const auto result = analyzer.reflect(kImranKhanInput, original);
    CHECK(result.refined.size() == 2);
    CHECK(result.refined.method.kind == MethodKind::Reflected);
    CHECK(result.refined.method.base == MethodKind::FactScore);
}
