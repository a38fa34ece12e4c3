#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dtv/aggregator.hpp"
#include "dtv/config.hpp"
#include "dtv/core.hpp"
#include "dtv/decomposer.hpp"
#include "dtv/error_analysis.hpp"
#include "dtv/gateway.hpp"
#include "dtv/retriever.hpp"
#include "dtv/verifier.hpp"

namespace dtv {

// Produces the sub-claims for one entry.
class SubClaimSource {
public:
    virtual ~SubClaimSource() = default;
    virtual Decomposition decompose(const DatasetEntry& entry) const = 0;
};

class BaselineSource final : public SubClaimSource {
public:
    Decomposition decompose(const DatasetEntry& entry) const override;
};

// Optional decontextualization when the entry has a question, then the configured method.
class LlmSource final : public SubClaimSource {
public:
    LlmSource(const Decomposer& decomposer, DecompositionMethod method, Granularity granularity,
              bool decontextualize);
    Decomposition decompose(const DatasetEntry& entry) const override;

private:
    const Decomposer& decomposer_;
    DecompositionMethod method_;
    Granularity granularity_;
    bool decontextualize_;
};

// Pre-computed decompositions from JSONL rows {id, subclaims[, method]}.
class FixtureSource final : public SubClaimSource {
public:
    FixtureSource(const std::filesystem::path& path, DecompositionMethod default_method);
    FixtureSource(std::map<std::string, Decomposition> table);
    Decomposition decompose(const DatasetEntry& entry) const override;

private:
    std::map<std::string, Decomposition> table_;
};

// Runs reflection over another source's output.
class ReflectingSource final : public SubClaimSource {
public:
    ReflectingSource(const SubClaimSource& inner, const ErrorAnalyzer& analyzer);
    Decomposition decompose(const DatasetEntry& entry) const override;

private:
    const SubClaimSource& inner_;
    const ErrorAnalyzer& analyzer_;
};

struct PipelineStages {
    const SubClaimSource& decomposer;
    const Retriever& retriever;
    const EntailmentScorer& scorer;
    AggregatorConfig aggregator;
};

// Decompose, retrieve per sub-claim, verify, aggregate, classify.
PipelineRecord process_entry(const DatasetEntry& entry, const PipelineStages& stages);

struct EntryOutcome {
    DatasetEntry entry;
    std::optional<PipelineRecord> record;  // absent on failure
    std::string error;
};

// Calls fn(i) for every i in [0, n) on up to `workers` threads. fn must not throw.
void for_each_index(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

// Processes entries on up to `workers` threads. Results are ordered by entry id.
// Per-entry errors are captured in the outcome, never rethrown.
std::vector<EntryOutcome> run_pipeline(std::span<const DatasetEntry> entries, const PipelineStages& stages,
                                       std::size_t workers);

// One output line: the record fields plus gold, dataset_id, status and n_subclaims;
// failed entries carry status "failed" and the error text instead of a record.
Json to_json(const EntryOutcome& outcome);
void write_outcomes(std::ostream& out, std::span<const EntryOutcome> outcomes);

// Live objects built from a PipelineConfig.
class PipelineRuntime {
public:
    PipelineRuntime(const PipelineConfig& config, std::shared_ptr<const HttpClient> http);

    PipelineStages stages() const;
    const Gateway& gateway() const;
    const ErrorAnalyzer& analyzer() const;
    const SubClaimSource& decomposer() const { return *source_; }
    // The decomposer without the reflection pass.
    const SubClaimSource& base_decomposer() const { return base_source_ ? *base_source_ : *source_; }

private:
    PipelineConfig config_;
    std::shared_ptr<const HttpClient> http_;
    std::unique_ptr<Gateway> gateway_;
    std::unique_ptr<Decomposer> llm_decomposer_;
    std::unique_ptr<ErrorAnalyzer> analyzer_;
    std::unique_ptr<SubClaimSource> base_source_;
    std::unique_ptr<SubClaimSource> source_;
    std::unique_ptr<Retriever> retriever_;
    std::unique_ptr<EntailmentScorer> scorer_;
};

}  // namespace dtv
