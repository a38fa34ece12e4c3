#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dtv/core.hpp"
#include "dtv/decomposer.hpp"
#include "dtv/gateway.hpp"

namespace dtv {

enum class ErrorCategory { OmissionOfContext, Ambiguity, OverDecomposition, AlterationOfMeaning };

enum class ErrorSubtype {
    MissingCoreClaims,
    MissingLogicalRelationships,
    VagueLanguage,
    RedundantInformation,
    ExcessiveFragmentation,
};

inline constexpr ErrorCategory kAllCategories[] = {
    ErrorCategory::OmissionOfContext, ErrorCategory::Ambiguity, ErrorCategory::OverDecomposition,
    ErrorCategory::AlterationOfMeaning};

// Display names as they appear in the detection prompt, e.g. "Over-Decomposition".
std::string_view display_name(ErrorCategory category);
std::string_view display_name(ErrorSubtype subtype);
// Stable identifiers used in JSON, e.g. "over_decomposition".
std::string_view key(ErrorCategory category);
ErrorCategory category_of(ErrorSubtype subtype);

struct ErrorType {
    ErrorCategory category = ErrorCategory::OmissionOfContext;
    std::optional<ErrorSubtype> subtype;

    // Throws InvalidArgument if the subtype belongs to another category.
    static ErrorType make(ErrorCategory category, std::optional<ErrorSubtype> subtype = std::nullopt);

    auto operator<=>(const ErrorType&) const = default;
};

// "Category" or "Category: Subtype".
std::string to_string(const ErrorType& type);

// Accepts "Category", "Category - Subtype" and "Category: Subtype", case-insensitively,
// with an optional leading list marker. Throws UnknownErrorType.
ErrorType parse_error_type(std::string_view line);

enum class Judgment { Acceptable, Problematic, NoNeedForDecomposition };

std::string_view to_string(Judgment judgment);
// "Acceptable" and "Good" both map to Acceptable.
Judgment parse_judgment(std::string_view text);

struct ErrorReport {
    Judgment judgment = Judgment::Acceptable;
    std::vector<ErrorType> errors;  // multiset, in reply order
    std::string reasoning;
    std::string raw;
};

// Contents of the fenced block following "### <header>", or nullopt when the header is absent.
std::optional<std::string> extract_section(std::string_view raw, std::string_view header);

// Reads the Reasoning, Error Type and Judgment sections. Throws ParseError on a missing
// section, an unknown judgment, or a judgment that contradicts the error list.
ErrorReport parse_detection_response(std::string_view raw);

// Inverse of parse_detection_response for well-formed reports.
std::string render_detection_response(const ErrorReport& report);

struct ReflectionResult {
    ErrorReport report;
    Decomposition refined;
};

// Parses a reflection reply against the decomposition it critiques.
//   Acceptable ("Good")          -> original sub-claims unchanged
//   NoNeedForDecomposition       -> the input text as the single sub-claim
//   Problematic                  -> sub-claims from "### Refined Decomposition"
// The refined method is Reflected(base). Throws ParseError, EmptyRefinement.
ReflectionResult parse_reflection_response(std::string_view raw, std::string_view input_text,
                                           const Decomposition& original);

std::string render_decomposition(const Decomposition& d);

class ErrorAnalyzer {
public:
    ErrorAnalyzer(const Gateway& gateway, PromptLibrary prompts, std::string model_id);

    ErrorReport detect_errors(std::string_view input_text, const Decomposition& decomposition) const;
    ReflectionResult reflect(std::string_view input_text, const Decomposition& decomposition) const;

private:
    std::string ask(std::string_view prompt_name, std::string_view input_text, const Decomposition& d) const;

    const Gateway& gateway_;
    PromptLibrary prompts_;
    std::string model_id_;
};

// Share of reports with at least one error in each category. Throws EmptyReports.
std::map<ErrorCategory, double> error_distribution(std::span<const ErrorReport> reports);

// {entry_id, judgment, errors[], reasoning}
Json report_to_json(std::string_view entry_id, const ErrorReport& report);

}  // namespace dtv
