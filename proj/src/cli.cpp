#include "dtv/cli.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "dtv/complexity.hpp"
#include "dtv/config.hpp"
#include "dtv/error_analysis.hpp"
#include "dtv/evaluation.hpp"
#include "dtv/pipeline.hpp"
#include "dtv/tradeoff.hpp"

namespace dtv {

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidConfig:
        case ErrorKind::InvalidArgument: return kExitUsage;
        default: return kExitData;
    }
}

namespace {

// Writes through a sibling temp file so a failed run never leaves a partial output.
void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(ErrorKind::Io, "cannot write " + path.string());
        f << content;
        if (!f) throw Error(ErrorKind::Io, "write failed for " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

struct SharedOptions {
    std::string config;
    std::string dataset;
    std::string out;
    std::optional<std::string> cache_dir;
    std::optional<int> max_in_flight;
};

PipelineConfig load_with_overrides(const SharedOptions& o) {
    PipelineConfig cfg = load_config(o.config);
    if (o.cache_dir) cfg.gateway.cache_dir = *o.cache_dir;
    if (o.max_in_flight) {
        if (*o.max_in_flight < 1) throw Error(ErrorKind::InvalidArgument, "--max-in-flight must be >= 1");
        cfg.gateway.max_in_flight = *o.max_in_flight;
    }
    return cfg;
}

std::filesystem::path output_path(const SharedOptions& o, const PipelineConfig& cfg, const char* default_name) {
    return o.out.empty() ? cfg.output_dir / default_name : std::filesystem::path(o.out);
}

int cmd_run(const SharedOptions& o, std::ostream& out, std::shared_ptr<const HttpClient> http) {
    const PipelineConfig cfg = load_with_overrides(o);
    const auto entries = load_dataset(o.dataset);
    const PipelineRuntime runtime(cfg, std::move(http));
    const auto outcomes = run_pipeline(entries, runtime.stages(), static_cast<std::size_t>(cfg.gateway.max_in_flight));

    std::ostringstream buf;
    write_outcomes(buf, outcomes);
    const auto path = output_path(o, cfg, "predictions.jsonl");
    write_file(path, buf.str());
    const auto failed = std::count_if(outcomes.begin(), outcomes.end(), [](const auto& x) { return !x.record; });
    out << "processed " << outcomes.size() << " entries (" << failed << " failed) -> " << path.string() << '\n';
    return kExitOk;
}

int cmd_eval(const std::string& predictions, const std::string& report_path, const std::string& heatmap_path,
             std::ostream& out) {
    const auto rows = load_predictions(predictions);
    const RunReport report = build_report(rows);
    const Json j = to_json(report);
    write_file(report_path, j.dump(2) + "\n");
    out << j.dump(2) << '\n';
    if (!heatmap_path.empty()) {
        const Heatmap map = heatmap(rows);
        std::ostringstream csv;
        write_heatmap_csv(csv, map);
        write_file(heatmap_path, csv.str());
        if (map.excluded > 0) out << "heatmap: excluded " << map.excluded << " untagged or failed rows\n";
    }
    return kExitOk;
}

int cmd_detect_errors(const SharedOptions& o, const std::string& decompositions, std::ostream& out,
                      std::shared_ptr<const HttpClient> http) {
    const PipelineConfig cfg = load_with_overrides(o);
    const auto entries = load_dataset(o.dataset);
    const PipelineRuntime runtime(cfg, std::move(http));
    std::unique_ptr<FixtureSource> fixture;
    if (!decompositions.empty()) fixture = std::make_unique<FixtureSource>(decompositions, cfg.decomposer.method);
    const SubClaimSource& source = fixture ? *fixture : runtime.base_decomposer();
    const ErrorAnalyzer& analyzer = runtime.analyzer();

    std::vector<std::optional<ErrorReport>> reports(entries.size());
    std::vector<std::string> errors(entries.size());
    for_each_index(entries.size(), static_cast<std::size_t>(cfg.gateway.max_in_flight), [&](std::size_t i) {
        try {
            reports[i] = analyzer.detect_errors(entries[i].input_text, source.decompose(entries[i]));
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    std::vector<std::size_t> order(entries.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return entries[a].id < entries[b].id; });

    std::ostringstream buf;
    std::vector<ErrorReport> ok;
    for (std::size_t i : order) {
        Json line;
        if (reports[i]) {
            line = report_to_json(entries[i].id, *reports[i]);
            line["status"] = "ok";
            ok.push_back(*reports[i]);
        } else {
            line = {{"entry_id", entries[i].id}, {"status", "failed"}, {"error", errors[i]}};
        }
        buf << line.dump() << '\n';
    }
    write_file(output_path(o, cfg, "error_reports.jsonl"), buf.str());

    Json summary = {{"n_reports", ok.size()}, {"n_failed", entries.size() - ok.size()}};
    if (!ok.empty()) {
        Json dist = Json::object();
        for (const auto& [category, share] : error_distribution(ok)) dist[std::string(key(category))] = share;
        summary["distribution"] = std::move(dist);
    }
    out << summary.dump(2) << '\n';
    return kExitOk;
}

int cmd_reflect(const SharedOptions& o, const std::string& decompositions, std::ostream& out,
                std::shared_ptr<const HttpClient> http) {
    const PipelineConfig cfg = load_with_overrides(o);
    const auto entries = load_dataset(o.dataset);
    const PipelineRuntime runtime(cfg, std::move(http));
    std::unique_ptr<FixtureSource> fixture;
    if (!decompositions.empty()) fixture = std::make_unique<FixtureSource>(decompositions, cfg.decomposer.method);
    const SubClaimSource& source = fixture ? *fixture : runtime.base_decomposer();
    const ErrorAnalyzer& analyzer = runtime.analyzer();

    std::vector<Json> lines(entries.size());
    for_each_index(entries.size(), static_cast<std::size_t>(cfg.gateway.max_in_flight), [&](std::size_t i) {
        try {
            const Decomposition original = source.decompose(entries[i]);
            const ReflectionResult r = analyzer.reflect(entries[i].input_text, original);
            Json j = report_to_json(entries[i].id, r.report);
            j["original"] = to_json(original);
            j["refined"] = to_json(r.refined);
            j["status"] = "ok";
            lines[i] = std::move(j);
        } catch (const std::exception& e) {
            lines[i] = {{"entry_id", entries[i].id}, {"status", "failed"}, {"error", e.what()}};
        }
    });
    std::sort(lines.begin(), lines.end(),
              [](const Json& a, const Json& b) { return a["entry_id"].get<std::string>() < b["entry_id"].get<std::string>(); });

    std::ostringstream buf;
    std::size_t failed = 0;
    for (const auto& j : lines) {
        buf << j.dump() << '\n';
        if (j["status"] == "failed") ++failed;
    }
    const auto path = output_path(o, cfg, "reflections.jsonl");
    write_file(path, buf.str());
    out << "reflected " << lines.size() << " entries (" << failed << " failed) -> " << path.string() << '\n';
    return kExitOk;
}

struct CombosOptions {
    std::string dataset;
    std::string out;
    std::optional<std::size_t> samples;
    std::size_t max_complexity = 9;
    std::uint64_t seed = 0;
    bool scaled_up = false;
};

int cmd_combos(const CombosOptions& o, std::ostream& out) {
    const auto entries = load_dataset(o.dataset);
    std::vector<DatasetEntry> result;
    if (o.scaled_up) {
        for (const auto& e : entries) result.push_back(build_scaled_up(e));
    } else {
        std::vector<Combination> pool;
        std::map<std::string, std::string> dataset_of;
        for (const auto& e : entries) {
            auto combos = build_combinations(e);
            pool.insert(pool.end(), combos.begin(), combos.end());
            dataset_of[e.id] = e.dataset_id;
        }
        std::vector<Combination> chosen;
        if (o.samples) {
            chosen = sample_combinations(pool, *o.samples, o.max_complexity, o.seed);
        } else {
            std::copy_if(pool.begin(), pool.end(), std::back_inserter(chosen),
                         [&](const Combination& c) { return c.complexity() <= o.max_complexity; });
        }
        for (const auto& c : chosen) result.push_back(to_entry(c, dataset_of[c.source_id]));
    }

    std::ostringstream buf;
    for (const auto& e : result) buf << to_json(e).dump() << '\n';
    write_file(o.out, buf.str());
    out << "wrote " << result.size() << " entries -> " << o.out << '\n';
    return kExitOk;
}

struct SimulateOptions {
    TradeoffParams params;
    int k_max = 9;
    int n_max = 9;
    std::string out;
};

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
    o.params.validate();
    if (o.k_max < 1 || o.n_max < 1) throw Error(ErrorKind::InvalidArgument, "--k-max and --n-max must be >= 1");
    std::vector<double> ks;
    std::vector<int> ns;
    for (int k = 1; k <= o.k_max; ++k) ks.push_back(k);
    for (int n = 1; n <= o.n_max; ++n) ns.push_back(n);
    std::ostringstream csv;
    write_sweep_csv(csv, sweep_grid(o.params, ks, ns));
    if (o.out.empty()) {
        out << csv.str();
    } else {
        write_file(o.out, csv.str());
    }
    return kExitOk;
}

void add_shared(CLI::App& cmd, SharedOptions& o, const char* out_help) {
    cmd.add_option("--config", o.config, "Pipeline TOML config")->required();
    cmd.add_option("--dataset", o.dataset, "Dataset JSONL")->required();
    cmd.add_option("--out", o.out, out_help);
    cmd.add_option("--cache-dir", o.cache_dir, "Override [gateway] cache_dir");
    cmd.add_option("--max-in-flight", o.max_in_flight, "Override [gateway] max_in_flight");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            std::shared_ptr<const HttpClient> http) {
    if (!http) http = default_http_client();

    CLI::App app{"dtv: decompose-then-verify fact-checking toolkit", "dtv"};
    app.require_subcommand(1);

    SharedOptions run_opts;
    auto* run = app.add_subcommand("run", "Decompose, retrieve, verify and aggregate every dataset entry");
    add_shared(*run, run_opts, "Predictions JSONL (default <output.dir>/predictions.jsonl)");

    std::string predictions, report, heatmap_out;
    auto* eval = app.add_subcommand("eval", "Compute BAcc/F1/precision/recall from predictions");
    eval->add_option("--predictions", predictions, "Predictions JSONL")->required();
    eval->add_option("--out", report, "Report JSON")->required();
    eval->add_option("--heatmap", heatmap_out, "Also write the (complexity, n_subclaims) F1 grid as CSV");

    SharedOptions detect_opts;
    std::string detect_decomps;
    auto* detect = app.add_subcommand("detect-errors", "Classify decomposition errors per entry");
    add_shared(*detect, detect_opts, "Reports JSONL (default <output.dir>/error_reports.jsonl)");
    detect->add_option("--decompositions", detect_decomps, "Pre-computed decompositions JSONL");

    SharedOptions reflect_opts;
    std::string reflect_decomps;
    auto* reflect = app.add_subcommand("reflect", "Critique and refine decompositions");
    add_shared(*reflect, reflect_opts, "Reflections JSONL (default <output.dir>/reflections.jsonl)");
    reflect->add_option("--decompositions", reflect_decomps, "Pre-computed decompositions JSONL");

    CombosOptions combos_opts;
    auto* combos = app.add_subcommand("combos", "Build claim combinations or scaled-up entries");
    combos->add_option("--dataset", combos_opts.dataset, "Dataset JSONL with claim annotations")->required();
    combos->add_option("--out", combos_opts.out, "Output dataset JSONL")->required();
    combos->add_option("--samples", combos_opts.samples, "Sample this many combinations");
    combos->add_option("--max-complexity", combos_opts.max_complexity, "Largest claim count per combination")
        ->capture_default_str();
    combos->add_option("--seed", combos_opts.seed, "Sampling seed")->capture_default_str();
    combos->add_flag("--scaled-up", combos_opts.scaled_up, "Prepend context sentences instead of combining");

    SimulateOptions sim_opts;
    auto* simulate = app.add_subcommand("simulate", "Sweep the accuracy-vs-noise model over (k_o, n)");
    simulate->add_option("--a0", sim_opts.params.a0, "Accuracy at complexity 1")->capture_default_str();
    simulate->add_option("--lambda", sim_opts.params.lambda, "Accuracy decay rate")->capture_default_str();
    simulate->add_option("--e-r", sim_opts.params.e_r, "Per-retrieval noise")->capture_default_str();
    simulate->add_option("--e-d", sim_opts.params.e_d, "Per-split decomposition noise")->capture_default_str();
    simulate->add_option("--k-max", sim_opts.k_max, "Largest input complexity")->capture_default_str();
    simulate->add_option("--n-max", sim_opts.n_max, "Largest sub-claim count")->capture_default_str();
    simulate->add_option("--out", sim_opts.out, "CSV path (default stdout)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*run) return cmd_run(run_opts, out, http);
        if (*eval) return cmd_eval(predictions, report, heatmap_out, out);
        if (*detect) return cmd_detect_errors(detect_opts, detect_decomps, out, http);
        if (*reflect) return cmd_reflect(reflect_opts, reflect_decomps, out, http);
        if (*combos) return cmd_combos(combos_opts, out);
        if (*simulate) return cmd_simulate(sim_opts, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace dtv
