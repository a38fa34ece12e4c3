#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace dtv {

using Json = nlohmann::json;

enum class Label { Supported, Unsupported };

// Serialized lowercase; parsing is case-insensitive and ignores surrounding whitespace.
std::string_view to_string(Label label);
Label parse_label(std::string_view raw);

struct ClaimAnnotation {
    std::string text;
    Label label = Label::Supported;

    bool operator==(const ClaimAnnotation&) const = default;
};

struct DatasetEntry {
    std::string id;
    std::string dataset_id;
    std::string input_text;
    std::optional<std::vector<std::string>> context;
    std::optional<std::string> question;
    Label gold_label = Label::Supported;
    std::optional<std::vector<ClaimAnnotation>> claims;
    // Unknown top-level fields land here as well; non-string values keep their JSON text.
    std::map<std::string, std::string> meta;

    bool operator==(const DatasetEntry&) const = default;
};

// Validates one parsed JSONL record. Throws MissingField, InvalidField, EmptyInput or BadLabel.
DatasetEntry validate_entry(const Json& raw);
Json to_json(const DatasetEntry& entry);

struct SubClaim {
    std::string text;
    std::size_t index = 0;

    bool operator==(const SubClaim&) const = default;
};

enum class MethodKind { Baseline, FactScore, VeriScore, Wice, ExactN, Reflected };

struct DecompositionMethod {
    MethodKind kind = MethodKind::Baseline;
    // ExactN, or a Reflected method whose base was ExactN.
    int exact_n = 0;
    // Set only when kind == Reflected.
    std::optional<MethodKind> base;

    static DecompositionMethod baseline() { return {MethodKind::Baseline, 0, std::nullopt}; }
    static DecompositionMethod of(MethodKind kind) { return {kind, 0, std::nullopt}; }
    static DecompositionMethod exact(int n) { return {MethodKind::ExactN, n, std::nullopt}; }
    static DecompositionMethod reflected(const DecompositionMethod& from);

    bool operator==(const DecompositionMethod&) const = default;
};

// "baseline", "factscore", "veriscore", "wice", "exact_n(3)", "reflected(factscore)".
std::string to_string(const DecompositionMethod& method);
DecompositionMethod parse_method(std::string_view name);
std::string_view method_name(MethodKind kind);
MethodKind parse_method_kind(std::string_view name);

struct Decomposition {
    std::string source_id;
    DecompositionMethod method;
    std::vector<SubClaim> subclaims;
    std::string model_id;

    std::size_t size() const { return subclaims.size(); }
    std::vector<std::string> texts() const;

    bool operator==(const Decomposition&) const = default;
};

// Trims each text, assigns contiguous indices and checks the method invariants.
// Throws EmptyDecomposition on an empty list, InvalidArgument on a blank sub-claim,
// CountMismatch when an ExactN method does not get exactly n items.
Decomposition make_decomposition(std::string source_id, DecompositionMethod method,
                                 const std::vector<std::string>& texts, std::string model_id);

struct SubClaimScore {
    std::size_t subclaim_index = 0;
    std::vector<double> per_evidence;
    double combined = 0.0;
    std::string backend_id;

    bool operator==(const SubClaimScore&) const = default;
};

struct PipelineRecord {
    std::string entry_id;
    Decomposition decomposition;
    std::vector<SubClaimScore> subclaim_scores;
    double final_score = 0.0;
    Label predicted = Label::Unsupported;
};

Json to_json(const Decomposition& d);
Decomposition decomposition_from_json(const Json& j);
Json to_json(const SubClaimScore& s);
Json to_json(const PipelineRecord& r);

// Sorted keys, compact separators, prompt strings with normalized line endings and
// trailing whitespace removed per line.
std::string canonical_payload(const Json& payload);

// Lowercase hex SHA-256 of the payload bytes.
std::string cache_key(std::string_view payload);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

}  // namespace dtv
