#include "dtv/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include "dtv/error.hpp"

namespace dtv {

Decomposition BaselineSource::decompose(const DatasetEntry& entry) const {
    return decompose_baseline(entry.id, entry.input_text);
}

LlmSource::LlmSource(const Decomposer& decomposer, DecompositionMethod method, Granularity granularity,
                     bool decontextualize)
    : decomposer_(decomposer), method_(method), granularity_(granularity), decontextualize_(decontextualize) {}

Decomposition LlmSource::decompose(const DatasetEntry& entry) const {
    std::string text = entry.input_text;
    if (decontextualize_ && entry.question && !trim(*entry.question).empty()) {
        text = decomposer_.decontextualize(*entry.question, text);
    }
    switch (method_.kind) {
        case MethodKind::Baseline: return decompose_baseline(entry.id, text);
        case MethodKind::ExactN: return decomposer_.decompose_exact_n(entry.id, text, method_.exact_n);
        case MethodKind::Reflected:
            throw Error(ErrorKind::InvalidConfig, "reflection is enabled with decomposer.reflect, not as a method");
        default: return decomposer_.decompose(entry.id, text, method_.kind, granularity_);
    }
}

FixtureSource::FixtureSource(std::map<std::string, Decomposition> table) : table_(std::move(table)) {}

FixtureSource::FixtureSource(const std::filesystem::path& path, DecompositionMethod default_method) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open decomposition fixture " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        try {
            const Json j = Json::parse(line);
            Decomposition d;
            std::string id;
            if (auto it = j.find("decomposition"); it != j.end()) {
                // A line of pipeline output.
                id = j.at("entry_id").get<std::string>();
                d = decomposition_from_json(*it);
            } else {
                id = j.at("id").get<std::string>();
                const auto method = j.contains("method") ? parse_method(j.at("method").get<std::string>())
                                                         : default_method;
                d = make_decomposition(id, method, j.at("subclaims").get<std::vector<std::string>>(),
                                       j.value("model_id", std::string("fixture")));
            }
            if (!table_.emplace(id, std::move(d)).second) throw Error(ErrorKind::DuplicateId, id);
        } catch (const Json::exception& e) {
            throw Error(ErrorKind::ParseError, where + ": " + e.what());
        } catch (const Error& e) {
            throw Error(e.kind(), where + ": " + e.detail());
        }
    }
}

Decomposition FixtureSource::decompose(const DatasetEntry& entry) const {
    auto it = table_.find(entry.id);
    if (it == table_.end()) throw Error(ErrorKind::MissingFixture, "no decomposition for entry '" + entry.id + "'");
    Decomposition d = it->second;
    d.source_id = entry.id;
    return d;
}

ReflectingSource::ReflectingSource(const SubClaimSource& inner, const ErrorAnalyzer& analyzer)
    : inner_(inner), analyzer_(analyzer) {}

Decomposition ReflectingSource::decompose(const DatasetEntry& entry) const {
    return analyzer_.reflect(entry.input_text, inner_.decompose(entry)).refined;
}

PipelineRecord process_entry(const DatasetEntry& entry, const PipelineStages& stages) {
    PipelineRecord record;
    record.entry_id = entry.id;
    record.decomposition = stages.decomposer.decompose(entry);

    std::vector<double> combined;
    for (const auto& sc : record.decomposition.subclaims) {
        const auto evidence = stages.retriever.retrieve(sc.text);
        record.subclaim_scores.push_back(score_subclaim(sc.index, sc.text, evidence, stages.scorer));
        combined.push_back(record.subclaim_scores.back().combined);
    }
    record.final_score = aggregate(combined, stages.aggregator);
    record.predicted = classify(record.final_score, stages.aggregator);
    return record;
}

void for_each_index(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (std::size_t i = next++; i < n; i = next++) fn(i);
    };
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
    if (workers == 1) {
        work();
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
}

std::vector<EntryOutcome> run_pipeline(std::span<const DatasetEntry> entries, const PipelineStages& stages,
                                       std::size_t workers) {
    std::vector<EntryOutcome> outcomes(entries.size());
    for_each_index(entries.size(), workers, [&](std::size_t i) {
        auto& out = outcomes[i];
        out.entry = entries[i];
        try {
            out.record = process_entry(entries[i], stages);
        } catch (const std::exception& e) {
            out.error = e.what();
        }
    });
    std::stable_sort(outcomes.begin(), outcomes.end(),
                     [](const EntryOutcome& a, const EntryOutcome& b) { return a.entry.id < b.entry.id; });
    return outcomes;
}

Json to_json(const EntryOutcome& outcome) {
    Json j;
    if (outcome.record) {
        j = to_json(*outcome.record);
        j["status"] = "ok";
        j["n_subclaims"] = outcome.record->decomposition.size();
    } else {
        j = {{"entry_id", outcome.entry.id}, {"status", "failed"}, {"error", outcome.error}};
    }
    j["gold"] = to_string(outcome.entry.gold_label);
    j["dataset_id"] = outcome.entry.dataset_id;
    if (auto it = outcome.entry.meta.find("complexity"); it != outcome.entry.meta.end()) {
        try {
            j["complexity"] = std::stoi(it->second);
        } catch (const std::exception&) {
            j["complexity"] = it->second;
        }
    }
    return j;
}

void write_outcomes(std::ostream& out, std::span<const EntryOutcome> outcomes) {
    for (const auto& o : outcomes) out << to_json(o).dump() << '\n';
}

PipelineRuntime::PipelineRuntime(const PipelineConfig& config, std::shared_ptr<const HttpClient> http)
    : config_(config), http_(std::move(http)) {
    const auto& g = config_.gateway;
    if (!g.endpoint.empty()) {
        GatewayConfig gc;
        gc.endpoint = g.endpoint;
        gc.api_key = env_or_empty(g.key_env);
        gc.cache_dir = g.cache_dir;
        gc.retry = RetryPolicy{g.retries, g.backoff_base};
        gc.max_in_flight = static_cast<std::size_t>(g.max_in_flight);
        gateway_ = std::make_unique<Gateway>(std::move(gc), http_);
    }
    auto limiter = gateway_ ? gateway_->limiter() : std::make_shared<InFlightLimiter>(g.max_in_flight);

    const auto& d = config_.decomposer;
    const PromptLibrary prompts = d.prompt_dir ? PromptLibrary::load(*d.prompt_dir) : PromptLibrary::builtin();
    if (gateway_ && !d.model_id.empty()) {
        llm_decomposer_ = std::make_unique<Decomposer>(*gateway_, prompts, d.model_id);
        analyzer_ = std::make_unique<ErrorAnalyzer>(*gateway_, prompts, d.model_id);
    }

    if (d.backend == DecomposerBackend::Fixture) {
        base_source_ = std::make_unique<FixtureSource>(d.fixture_path, d.method);
    } else if (d.method.kind == MethodKind::Baseline && !d.decontextualize) {
        base_source_ = std::make_unique<BaselineSource>();
    } else {
        if (!llm_decomposer_) throw Error(ErrorKind::InvalidConfig, "decomposer needs [gateway] endpoint and model_id");
        base_source_ = std::make_unique<LlmSource>(*llm_decomposer_, d.method, d.granularity, d.decontextualize);
    }
    if (d.reflect) {
        source_ = std::make_unique<ReflectingSource>(*base_source_, analyzer());
    } else {
        source_ = std::move(base_source_);
    }

    retriever_ = make_retriever(config_.retriever, http_, limiter);

    const auto& v = config_.verifier;
    switch (v.backend) {
        case VerifierBackend::FixtureTable: scorer_ = std::make_unique<FixtureTableScorer>(v.fixture_path); break;
        case VerifierBackend::RemoteNli:
            scorer_ = std::make_unique<RemoteNliScorer>(v.endpoint, env_or_empty(v.key_env), http_, v.retry,
                                                        real_sleeper(), limiter);
            break;
        case VerifierBackend::LlmFewShot:
            if (!gateway_) throw Error(ErrorKind::InvalidConfig, "llm_fewshot verifier needs [gateway] endpoint");
            scorer_ = std::make_unique<LlmFewShotScorer>(*gateway_, prompts, v.model_id);
            break;
    }
}

PipelineStages PipelineRuntime::stages() const { return {*source_, *retriever_, *scorer_, config_.aggregator}; }

const Gateway& PipelineRuntime::gateway() const {
    if (!gateway_) throw Error(ErrorKind::InvalidConfig, "[gateway] endpoint is not configured");
    return *gateway_;
}

const ErrorAnalyzer& PipelineRuntime::analyzer() const {
    if (!analyzer_) throw Error(ErrorKind::InvalidConfig, "error analysis needs [gateway] endpoint and decomposer model_id");
    return *analyzer_;
}

}  // namespace dtv
