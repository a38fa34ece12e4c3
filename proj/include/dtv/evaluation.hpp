#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dtv/core.hpp"

namespace dtv {

// Maps a dataset's native label onto the binary scheme. Raw labels match case-insensitively.
//   wice:        SUPPORTED -> S; PARTIALLY-SUPPORTED, NOT-SUPPORTED -> U
//   claimdecomp: mostly-true, true -> S; pants-on-fire, false, barely-true, half-true -> U
//   felm:        true -> S; false -> U
//   bingchat:    refuted -> U; any other non-empty claim annotation -> S
// Throws UnknownDataset, UnknownRawLabel.
Label binarize_label(std::string_view dataset_id, std::string_view raw_label);

// Response-level label from per-claim annotations: Unsupported iff any claim is Unsupported.
Label binarize_response(std::span<const Label> claim_labels);

// Positive class is Supported.
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
    bool operator==(const ConfusionMatrix&) const = default;
};

// Throws LengthMismatch, Empty.
ConfusionMatrix confusion(std::span<const Label> preds, std::span<const Label> golds);

struct Metrics {
    double bacc = 0.0;
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

// Every 0/0 ratio is 0.
Metrics metrics(const ConfusionMatrix& cm);

// JSONL, one DatasetEntry per line; blank lines are skipped.
// Throws Io, ParseError("<path>:<line>: ..."), DuplicateId.
std::vector<DatasetEntry> load_dataset(const std::filesystem::path& path);
std::vector<DatasetEntry> parse_dataset(std::string_view jsonl, std::string_view source_name = "<memory>");

// Mean sub-claim count. Throws Empty.
double avg_subclaims(std::span<const PipelineRecord> records);
double avg_subclaims(std::span<const std::size_t> sizes);

// One row of a predictions file. Accepts both the compact {entry_id, final_score,
// predicted, gold} form and full pipeline output lines.
struct PredictionRow {
    std::string entry_id;
    std::optional<double> final_score;
    std::optional<Label> predicted;
    Label gold = Label::Supported;
    bool failed = false;
    std::optional<std::size_t> n_subclaims;
    std::optional<int> complexity;
    std::string dataset_id;
    std::string method;
    std::string verifier;
};

PredictionRow prediction_from_json(const Json& j);
// Throws Io, ParseError, Empty (no rows).
std::vector<PredictionRow> load_predictions(const std::filesystem::path& path);

struct RunReport {
    std::string dataset_id;
    std::string method;
    std::string verifier;
    std::size_t n_entries = 0;  // evaluated rows
    std::size_t n_failed = 0;   // rows marked failed, excluded from metrics
    std::optional<double> avg_subclaims;  // absent when no row carries a count
    ConfusionMatrix cm;
    Metrics metrics;
};

// Throws Empty when no row is usable.
RunReport build_report(std::span<const PredictionRow> rows);
Json to_json(const RunReport& report);

}  // namespace dtv
