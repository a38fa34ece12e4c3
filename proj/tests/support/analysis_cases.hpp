#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dtv/error.hpp"
#include "dtv/error_analysis.hpp"

namespace dtv::testing {

inline std::string read_fixture(const std::string& relative) {
    std::ifstream in(std::string(DTV_TEST_FIXTURES) + "/" + relative, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "missing test fixture " + relative);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline ErrorType et(ErrorCategory c, std::optional<ErrorSubtype> s = std::nullopt) { return ErrorType::make(c, s); }

struct DetectionCase {
    std::string name;
    std::string raw;
    std::optional<Judgment> judgment;    // absent when an error is expected
    std::vector<ErrorType> errors;
    std::optional<ErrorKind> error_kind;
};

struct ReflectionCase {
    std::string name;
    std::string raw;
    std::string input_text;
    std::vector<std::string> original;
    std::vector<std::string> refined;    // expected; empty when an error is expected
    std::optional<ErrorKind> error_kind;
};

inline const std::string kImranKhanInput =
    "Imran Khan criticized Macron's comments on Islam, French authorities cancelled the visas of 183 "
    "Pakistani citizens and deported 118 from the country.";
inline const std::vector<std::string> kImranKhanDecomposition = {
    "French authorities cancelled the visas of 183 Pakistani citizens.",
    "French authorities deported 118 Pakistani citizens from the country.",
};
inline const std::string kArcticInput =
    "The smallest ocean in the world is the Arctic Ocean. It is located in the northernmost part of the "
    "Earth and is surrounded by the land masses of North America, Europe, and Asia. It covers about 14.05 "
    "million square kilometers.";
inline const std::vector<std::string> kArcticDecomposition = {
    "The Arctic Ocean is the smallest ocean in the world.",
    "The Arctic Ocean is surrounded by North America.",
    "The Arctic Ocean is surrounded by Europe.",
    "The Arctic Ocean is surrounded by Asia.",
    "The Arctic Ocean covers about 14.05 million square kilometers.",
};

inline std::string detection(const std::string& reasoning, const std::string& errors, const std::string& judgment) {
    return "### Reasoning\n```\n" + reasoning + "\n```\n\n### Error Type\n```\n" + errors +
           "\n```\n\n### Judgment\n```\n" + judgment + "\n```\n";
}

inline std::vector<DetectionCase> detection_cases() {
    using C = ErrorCategory;
    using S = ErrorSubtype;
    std::vector<DetectionCase> cases;
    cases.push_back({"imran khan demonstration", read_fixture("analysis/detect_imran_khan.txt"), Judgment::Problematic,
                     {et(C::OmissionOfContext, S::MissingLogicalRelationships)}, std::nullopt});
    cases.push_back({"arctic ocean demonstration", read_fixture("analysis/detect_arctic_ocean.txt"),
                     Judgment::Problematic,
                     {et(C::OverDecomposition, S::ExcessiveFragmentation), et(C::OverDecomposition, S::RedundantInformation),
                      et(C::OmissionOfContext, S::MissingCoreClaims), et(C::AlterationOfMeaning)},
                     std::nullopt});
    cases.push_back({"acceptable with empty error block", detection("All sub-claims are faithful.", "", "Acceptable"),
                     Judgment::Acceptable, {}, std::nullopt});
    cases.push_back({"acceptable with None", detection("Fine.", "None", "Acceptable"), Judgment::Acceptable, {},
                     std::nullopt});
    cases.push_back({"two errors with mixed separators",
                     detection("r", "- Over-Decomposition: Excessive Fragmentation\n- Alteration of Original Meaning",
                               "Problematic"),
                     Judgment::Problematic,
                     {et(C::OverDecomposition, S::ExcessiveFragmentation), et(C::AlterationOfMeaning)}, std::nullopt});
    cases.push_back({"lowercase names and numbered list",
                     detection("r", "1. ambiguity - vague language\n2. over-decomposition - redundant information",
                               "problematic"),
                     Judgment::Problematic,
                     {et(C::Ambiguity, S::VagueLanguage), et(C::OverDecomposition, S::RedundantInformation)},
                     std::nullopt});
    cases.push_back({"repeated error kept as multiset",
                     detection("r", "- Ambiguity: Vague Language\n- Ambiguity: Vague Language", "Problematic"),
                     Judgment::Problematic,
                     {et(C::Ambiguity, S::VagueLanguage), et(C::Ambiguity, S::VagueLanguage)}, std::nullopt});
    cases.push_back({"category without subtype", detection("r", "Omission of Context Information", "Problematic"),
                     Judgment::Problematic, {et(C::OmissionOfContext)}, std::nullopt});
    cases.push_back({"no need for decomposition", detection("Already atomic.", "None", "No need for decomposition"),
                     Judgment::NoNeedForDecomposition, {}, std::nullopt});
    cases.push_back({"british spelling of the judgment header",
                     "### Reasoning\n```\nr\n```\n### Error Type\n```\nAmbiguity - Vague Language\n```\n"
                     "### Judgement\n```\nProblematic\n```\n",
                     Judgment::Problematic, {et(C::Ambiguity, S::VagueLanguage)}, std::nullopt});
    cases.push_back({"CRLF line endings",
                     "### Reasoning\r\n```\r\nr\r\n```\r\n### Error Type\r\n```\r\nAlteration of Original Meaning\r\n"
                     "```\r\n### Judgment\r\n```\r\nProblematic\r\n```\r\n",
                     Judgment::Problematic, {et(C::AlterationOfMeaning)}, std::nullopt});

    // Malformed replies.
    cases.push_back({"missing judgment section",
                     "### Reasoning\n```\nr\n```\n### Error Type\n```\nAmbiguity\n```\n", std::nullopt, {},
                     ErrorKind::ParseError});
    cases.push_back({"missing error type section", "### Reasoning\n```\nr\n```\n### Judgment\n```\nAcceptable\n```\n",
                     std::nullopt, {}, ErrorKind::ParseError});
    cases.push_back({"unknown error type", detection("r", "- Hallucinated Entity", "Problematic"), std::nullopt, {},
                     ErrorKind::UnknownErrorType});
    cases.push_back({"subtype under the wrong category", detection("r", "Ambiguity: Excessive Fragmentation", "Problematic"),
                     std::nullopt, {}, ErrorKind::UnknownErrorType});
    cases.push_back({"unknown judgment", detection("r", "None", "Maybe"), std::nullopt, {}, ErrorKind::ParseError});
    cases.push_back({"problematic without errors", detection("r", "None", "Problematic"), std::nullopt, {},
                     ErrorKind::ParseError});
    cases.push_back({"acceptable with errors", detection("r", "Ambiguity - Vague Language", "Acceptable"), std::nullopt,
                     {}, ErrorKind::ParseError});
    cases.push_back({"plain prose reply", "The decomposition looks fine to me.", std::nullopt, {}, ErrorKind::ParseError});
    return cases;
}

inline std::string reflection(const std::string& errors, const std::string& judgment, const std::string& refined) {
    return detection("r", errors, judgment) + "\n### Refined Decomposition\n```\n" + refined + "\n```\n";
}

inline std::vector<ReflectionCase> reflection_cases() {
    std::vector<ReflectionCase> cases;
    cases.push_back({"imran khan demonstration", read_fixture("analysis/reflect_imran_khan.txt"), kImranKhanInput,
                     kImranKhanDecomposition,
                     {"Due to Imran Khan's criticism of Macron's comments on Islam, French authorities cancelled the "
                      "visas of 183 Pakistani citizens.",
                      "Due to Imran Khan's criticism of Macron's comments on Islam, French authorities deported 118 "
                      "Pakistani citizens from the country."},
                     std::nullopt});
    cases.push_back({"arctic ocean demonstration", read_fixture("analysis/reflect_arctic_ocean.txt"), kArcticInput,
                     kArcticDecomposition,
                     {"The smallest ocean in the world is the Arctic Ocean.",
                      "The Arctic Ocean is located in the northernmost part of the Earth.",
                      "The Arctic Ocean is surrounded by the land masses of North America, Europe, and Asia.",
                      "The Arctic Ocean covers an area of about 14.05 million square kilometers."},
                     std::nullopt});
    cases.push_back({"no need for decomposition", reflection("None", "No need for decomposition", "- ignored"),
                     "Paris is in France.", {"Paris is a city.", "Paris is in France."}, {"Paris is in France."},
                     std::nullopt});
    cases.push_back({"good keeps the original", reflection("None", "Good", "- A.\n- B."), "x", {"A.", "B."}, {"A.", "B."},
                     std::nullopt});
    cases.push_back({"acceptable keeps the original without a refined section", detection("r", "None", "Acceptable"), "x",
                     {"A.", "B."}, {"A.", "B."}, std::nullopt});
    cases.push_back({"refined list deduplicated",
                     reflection("Over-Decomposition: Redundant Information", "Problematic", "- A.\n- A.\n- B."), "x",
                     {"A.", "A2.", "B."}, {"A.", "B."}, std::nullopt});
    cases.push_back({"refined block as plain lines",
                     reflection("Ambiguity - Vague Language", "Problematic", "The mayor of Paris resigned.\nShe was elected in 2014."),
                     "x", {"She resigned."},
                     {"The mayor of Paris resigned.", "She was elected in 2014."}, std::nullopt});

    cases.push_back({"problematic with empty refinement",
                     reflection("Ambiguity - Vague Language", "Problematic", ""), "x", {"A."}, {},
                     ErrorKind::EmptyRefinement});
    cases.push_back({"problematic without refined section", detection("r", "Ambiguity - Vague Language", "Problematic"),
                     "x", {"A."}, {}, ErrorKind::ParseError});
    return cases;
}

}  // namespace dtv::testing
