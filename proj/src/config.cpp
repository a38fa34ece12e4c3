#include "dtv/config.hpp"

#include <cctype>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#include "dtv/error.hpp"

namespace dtv {

namespace {

class TomlLine {
public:
    TomlLine(std::string_view text, std::size_t line_no) : s_(text), line_no_(line_no) {}

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(line_no_) + ": " + what);
    }

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    }

    bool at_end_or_comment() {
        skip_ws();
        return pos_ >= s_.size() || s_[pos_] == '#';
    }

    char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

    void expect(char c) {
        skip_ws();
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    std::string key() {
        skip_ws();
        if (peek() == '"' || peek() == '\'') return string_value();
        const std::size_t start = pos_;
        while (pos_ < s_.size()) {
            const auto c = static_cast<unsigned char>(s_[pos_]);
            if (!(std::isalnum(c) || c == '_' || c == '-')) break;
            ++pos_;
        }
        if (start == pos_) fail("expected a key");
        return std::string(s_.substr(start, pos_ - start));
    }

    // Dotted key path such as a.b.c
    std::vector<std::string> key_path() {
        std::vector<std::string> parts{key()};
        for (skip_ws(); peek() == '.'; skip_ws()) {
            ++pos_;
            parts.push_back(key());
        }
        return parts;
    }

    Json value() {
        skip_ws();
        const char c = peek();
        if (c == '"' || c == '\'') return string_value();
        if (c == '[') return array_value();
        if (s_.substr(pos_, 4) == "true") {
            pos_ += 4;
            return true;
        }
        if (s_.substr(pos_, 5) == "false") {
            pos_ += 5;
            return false;
        }
        return number_value();
    }

private:
    std::string string_value() {
        const char quote = s_[pos_++];
        std::string out;
        while (pos_ < s_.size() && s_[pos_] != quote) {
            char c = s_[pos_++];
            if (quote == '"' && c == '\\') {
                if (pos_ >= s_.size()) fail("dangling escape");
                switch (const char e = s_[pos_++]) {
                    case 'n': c = '\n'; break;
                    case 't': c = '\t'; break;
                    case 'r': c = '\r'; break;
                    case 'b': c = '\b'; break;
                    case 'f': c = '\f'; break;
                    case '"': c = '"'; break;
                    case '\\': c = '\\'; break;
                    case 'u': append_utf8(out, hex_code_point(4)); continue;
                    case 'U': append_utf8(out, hex_code_point(8)); continue;
                    default: fail(std::string("unsupported escape \\") + e);
                }
            }
            out += c;
        }
        if (pos_ >= s_.size()) fail("unterminated string");
        ++pos_;
        return out;
    }

    std::uint32_t hex_code_point(std::size_t digits) {
        if (pos_ + digits > s_.size()) fail("truncated unicode escape");
        std::uint32_t cp = 0;
        for (std::size_t i = 0; i < digits; ++i) {
            const char h = s_[pos_++];
            cp <<= 4;
            if (h >= '0' && h <= '9') cp |= static_cast<std::uint32_t>(h - '0');
            else if (h >= 'a' && h <= 'f') cp |= static_cast<std::uint32_t>(h - 'a' + 10);
            else if (h >= 'A' && h <= 'F') cp |= static_cast<std::uint32_t>(h - 'A' + 10);
            else fail("bad hex digit in unicode escape");
        }
        if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) fail("invalid unicode scalar value");
        return cp;
    }

    static void append_utf8(std::string& out, std::uint32_t cp) {
        if (cp < 0x80) {
            out += static_cast<char>(cp);
        } else if (cp < 0x800) {
            out += static_cast<char>(0xC0 | (cp >> 6));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else if (cp < 0x10000) {
            out += static_cast<char>(0xE0 | (cp >> 12));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else {
            out += static_cast<char>(0xF0 | (cp >> 18));
            out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        }
    }

    Json array_value() {
        ++pos_;
        Json arr = Json::array();
        skip_ws();
        if (peek() == ']') {
            ++pos_;
            return arr;
        }
        while (true) {
            arr.push_back(value());
            skip_ws();
            if (peek() == ',') {
                ++pos_;
                skip_ws();
                if (peek() == ']') {
                    ++pos_;
                    return arr;
                }
                continue;
            }
            if (peek() == ']') {
                ++pos_;
                return arr;
            }
            fail("expected ',' or ']' in array");
        }
    }

    Json number_value() {
        const std::size_t start = pos_;
        while (pos_ < s_.size()) {
            const char c = s_[pos_];
            if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.' || c == 'e' ||
                  c == 'E' || c == '_')) {
                break;
            }
            ++pos_;
        }
        std::string text;
        for (char c : s_.substr(start, pos_ - start)) {
            if (c != '_') text += c;
        }
        if (text.empty()) fail("expected a value");
        try {
            std::size_t used = 0;
            if (text.find_first_of(".eE") == std::string::npos) {
                const long long v = std::stoll(text, &used);
                if (used == text.size()) return v;
            } else {
                const double v = std::stod(text, &used);
                if (used == text.size()) return v;
            }
        } catch (const std::exception&) {
        }
        fail("invalid value '" + text + "'");
    }

    std::string_view s_;
    std::size_t line_no_;
    std::size_t pos_ = 0;
};

Json& descend(Json& root, const std::vector<std::string>& path, const TomlLine& line) {
    Json* node = &root;
    for (const auto& part : path) {
        Json& next = (*node)[part];
        if (next.is_null()) next = Json::object();
        if (!next.is_object()) line.fail("'" + part + "' is not a table");
        node = &next;
    }
    return *node;
}

}  // namespace

Json parse_toml(std::string_view text) {
    Json root = Json::object();
    Json* table = &root;
    std::set<std::string> seen_tables;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        TomlLine line(raw, line_no);
        if (line.at_end_or_comment()) continue;

        if (line.peek() == '[') {
            line.expect('[');
            const auto path = line.key_path();
            line.expect(']');
            if (!line.at_end_or_comment()) line.fail("trailing characters after table header");
            std::string joined;
            for (const auto& p : path) joined += (joined.empty() ? "" : ".") + p;
            if (!seen_tables.insert(joined).second) line.fail("duplicate table [" + joined + "]");
            table = &descend(root, path, line);
            continue;
        }

        auto path = line.key_path();
        line.expect('=');
        Json v = line.value();
        if (!line.at_end_or_comment()) line.fail("trailing characters after value");
        const std::string leaf = path.back();
        path.pop_back();
        Json& target = descend(*table, path, line);
        if (target.contains(leaf)) line.fail("duplicate key '" + leaf + "'");
        target[leaf] = std::move(v);
    }
    return root;
}

namespace {

class Section {
public:
    Section(const Json& doc, std::string name) : name_(std::move(name)) {
        if (auto it = doc.find(name_); it != doc.end()) {
            if (!it->is_object()) fail("section must be a table");
            node_ = &*it;
        }
    }

    // Rejects keys that were never read.
    void finish() const {
        if (!node_) return;
        for (const auto& [k, v] : node_->items()) {
            if (!used_.count(k)) fail("unknown key '" + k + "'");
        }
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorKind::InvalidConfig, "[" + name_ + "] " + what);
    }

    const Json* get(const std::string& key) {
        used_.insert(key);
        if (!node_) return nullptr;
        auto it = node_->find(key);
        return it == node_->end() ? nullptr : &*it;
    }

    std::optional<std::string> str(const std::string& key) {
        const Json* v = get(key);
        if (!v) return std::nullopt;
        if (!v->is_string()) fail("'" + key + "' must be a string");
        return v->get<std::string>();
    }

    std::optional<long long> integer(const std::string& key) {
        const Json* v = get(key);
        if (!v) return std::nullopt;
        if (!v->is_number_integer()) fail("'" + key + "' must be an integer");
        return v->get<long long>();
    }

    std::optional<double> real(const std::string& key) {
        const Json* v = get(key);
        if (!v) return std::nullopt;
        if (!v->is_number()) fail("'" + key + "' must be a number");
        return v->get<double>();
    }

    std::optional<bool> boolean(const std::string& key) {
        const Json* v = get(key);
        if (!v) return std::nullopt;
        if (!v->is_boolean()) fail("'" + key + "' must be a boolean");
        return v->get<bool>();
    }

    // Wraps library parse errors for enum-valued keys.
    template <typename F>
    auto parsed(const std::string& key, F&& parse) -> std::optional<decltype(parse(std::string_view{}))> {
        auto s = str(key);
        if (!s) return std::nullopt;
        try {
            return parse(*s);
        } catch (const Error& e) {
            fail("'" + key + "': " + e.detail());
        }
    }

private:
    std::string name_;
    const Json* node_ = nullptr;
    std::set<std::string> used_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::filesystem::path existing(Section& sec, const std::string& key, const std::filesystem::path& base,
                               bool required) {
    auto s = sec.str(key);
    if (!s) {
        if (required) sec.fail("'" + key + "' is required");
        return {};
    }
    auto p = resolve(base, *s);
    if (!std::filesystem::exists(p)) sec.fail("'" + key + "' does not exist: " + p.string());
    return p;
}

}  // namespace

bool PipelineConfig::needs_gateway() const {
    const bool llm_decomposer =
        decomposer.backend == DecomposerBackend::Llm && decomposer.method.kind != MethodKind::Baseline;
    return llm_decomposer || decomposer.decontextualize || decomposer.reflect ||
           verifier.backend == VerifierBackend::LlmFewShot;
}

PipelineConfig config_from_json(const Json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) throw Error(ErrorKind::InvalidConfig, "config root must be a table");
    static const std::set<std::string> kSections = {"decomposer", "retriever", "verifier",
                                                    "aggregator", "gateway",   "output"};
    for (const auto& [k, v] : doc.items()) {
        if (!kSections.count(k)) throw Error(ErrorKind::InvalidConfig, "unknown section [" + k + "]");
    }

    PipelineConfig cfg;
    {
        Section sec(doc, "decomposer");
        auto& d = cfg.decomposer;
        // A bare "exact_n" takes its count from the exact_n key.
        if (auto m = sec.parsed("method", [](std::string_view s) {
                return to_lower(trim(s)) == "exact_n" ? DecompositionMethod::exact(0) : parse_method(s);
            })) {
            d.method = *m;
        }
        if (auto n = sec.integer("exact_n")) {
            if (*n < 2) sec.fail("'exact_n' must be >= 2");
            d.method = DecompositionMethod::exact(static_cast<int>(*n));
        }
        if (d.method.kind == MethodKind::ExactN && d.method.exact_n < 2) sec.fail("exact_n method needs exact_n >= 2");
        if (auto b = sec.str("backend")) {
            if (*b == "llm") d.backend = DecomposerBackend::Llm;
            else if (*b == "fixture") d.backend = DecomposerBackend::Fixture;
            else sec.fail("unknown backend '" + *b + "'");
        }
        d.model_id = sec.str("model_id").value_or("");
        if (auto p = existing(sec, "prompt_dir", base_dir, false); !p.empty()) d.prompt_dir = p;
        d.fixture_path = existing(sec, "fixture_path", base_dir, d.backend == DecomposerBackend::Fixture);
        if (auto g = sec.str("granularity")) {
            if (*g == "claim") d.granularity = Granularity::Claim;
            else if (*g == "response") d.granularity = Granularity::Response;
            else sec.fail("granularity must be 'claim' or 'response'");
        }
        d.decontextualize = sec.boolean("decontextualize").value_or(false);
        d.reflect = sec.boolean("reflect").value_or(false);
        const bool llm_method = d.backend == DecomposerBackend::Llm && d.method.kind != MethodKind::Baseline;
        if ((llm_method || d.decontextualize || d.reflect) && d.model_id.empty()) sec.fail("'model_id' is required");
        sec.finish();
    }
    {
        Section sec(doc, "retriever");
        auto& r = cfg.retriever;
        if (auto b = sec.parsed("backend", [](std::string_view s) { return parse_retriever_backend(s); })) r.backend = *b;
        if (auto k = sec.integer("top_k")) {
            if (*k < 0) sec.fail("'top_k' must be >= 0");
            r.top_k = static_cast<int>(*k);
        }
        const bool needs_corpus = r.backend != RetrieverBackend::WebSearch;
        r.corpus_path = existing(sec, "corpus_path", base_dir, needs_corpus);
        r.index_path = existing(sec, "index_path", base_dir, r.backend == RetrieverBackend::VectorIndex);
        r.endpoint = sec.str("endpoint").value_or("");
        r.key_env = sec.str("key_env").value_or("");
        r.embedding_model = sec.str("embedding_model").value_or("");
        if (r.backend != RetrieverBackend::Fixture && r.endpoint.empty()) sec.fail("'endpoint' is required");
        sec.finish();
    }
    {
        Section sec(doc, "verifier");
        auto& v = cfg.verifier;
        if (auto b = sec.parsed("backend", [](std::string_view s) { return parse_verifier_backend(s); })) v.backend = *b;
        v.endpoint = sec.str("endpoint").value_or("");
        v.key_env = sec.str("key_env").value_or("");
        v.model_id = sec.str("model_id").value_or("");
        v.fixture_path = existing(sec, "fixture_path", base_dir, v.backend == VerifierBackend::FixtureTable);
        if (v.backend == VerifierBackend::RemoteNli && v.endpoint.empty()) sec.fail("'endpoint' is required");
        if (v.backend == VerifierBackend::LlmFewShot && v.model_id.empty()) sec.fail("'model_id' is required");
        sec.finish();
    }
    {
        Section sec(doc, "aggregator");
        auto& a = cfg.aggregator;
        if (auto m = sec.parsed("method", [](std::string_view s) { return parse_aggregation_method(s); })) a.method = *m;
        a.threshold = sec.real("threshold").value_or(a.threshold);
        a.epsilon = sec.real("epsilon").value_or(a.epsilon);
        try {
            a.validate();
        } catch (const Error& e) {
            sec.fail(e.detail());
        }
        sec.finish();
    }
    {
        Section sec(doc, "gateway");
        auto& g = cfg.gateway;
        g.endpoint = sec.str("endpoint").value_or("");
        g.key_env = sec.str("key_env").value_or("");
        if (auto c = sec.str("cache_dir")) g.cache_dir = resolve(base_dir, *c);
        if (auto m = sec.integer("max_in_flight")) {
            if (*m < 1) sec.fail("'max_in_flight' must be >= 1");
            g.max_in_flight = static_cast<int>(*m);
        }
        if (auto r = sec.integer("retries")) {
            if (*r < 0) sec.fail("'retries' must be >= 0");
            g.retries = static_cast<int>(*r);
        }
        if (auto b = sec.integer("backoff_ms")) {
            if (*b < 0) sec.fail("'backoff_ms' must be >= 0");
            g.backoff_base = std::chrono::milliseconds(*b);
        }
        cfg.retriever.retry = cfg.verifier.retry = RetryPolicy{g.retries, g.backoff_base};
        sec.finish();
    }
    {
        Section sec(doc, "output");
        if (auto d = sec.str("dir")) cfg.output_dir = resolve(base_dir, *d);
        else cfg.output_dir = base_dir;
        sec.finish();
    }
    if (cfg.needs_gateway() && cfg.gateway.endpoint.empty()) {
        throw Error(ErrorKind::InvalidConfig, "[gateway] 'endpoint' is required by the configured stages");
    }
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::InvalidConfig, "cannot open config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    const Json doc = parse_toml(buf.str());
    auto base = std::filesystem::absolute(path).parent_path();
    return config_from_json(doc, base);
}

}  // namespace dtv
