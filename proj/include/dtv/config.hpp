#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "dtv/aggregator.hpp"
#include "dtv/core.hpp"
#include "dtv/decomposer.hpp"
#include "dtv/retriever.hpp"
#include "dtv/verifier.hpp"

namespace dtv {

// Reads the TOML subset used by pipeline configs into a JSON object:
// [table] and [dotted.table] headers, bare or quoted keys, basic and literal strings,
// integers, floats, booleans, single-line arrays of those, and # comments.
// Throws InvalidConfig("line N: ...").
Json parse_toml(std::string_view text);

enum class DecomposerBackend { Llm, Fixture };

struct DecomposerSettings {
    DecompositionMethod method = DecompositionMethod::baseline();
    DecomposerBackend backend = DecomposerBackend::Llm;
    std::string model_id;
    std::optional<std::filesystem::path> prompt_dir;
    // JSONL {id, subclaims[, method]}; used by the fixture backend.
    std::filesystem::path fixture_path;
    Granularity granularity = Granularity::Claim;
    bool decontextualize = false;
    bool reflect = false;
};

struct GatewaySettings {
    std::string endpoint;
    std::string key_env;
    std::optional<std::filesystem::path> cache_dir;
    int max_in_flight = 8;
    int retries = 2;
    std::chrono::milliseconds backoff_base{500};
};

struct PipelineConfig {
    DecomposerSettings decomposer;
    RetrieverConfig retriever;
    VerifierConfig verifier;
    AggregatorConfig aggregator;
    GatewaySettings gateway;
    std::filesystem::path output_dir = ".";

    // True when some stage talks to a chat-completion endpoint.
    bool needs_gateway() const;
};

// Relative paths resolve against base_dir. Referenced input files must exist.
// Throws InvalidConfig.
PipelineConfig config_from_json(const Json& doc, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace dtv
