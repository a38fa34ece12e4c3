#include "dtv/core.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include <openssl/evp.h>

#include "dtv/error.hpp"

namespace dtv {

std::string trim(std::string_view s) {
    auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view to_string(Label label) {
    return label == Label::Supported ? "supported" : "unsupported";
}

Label parse_label(std::string_view raw) {
    const std::string folded = to_lower(trim(raw));
    if (folded == "supported") return Label::Supported;
    if (folded == "unsupported") return Label::Unsupported;
    throw Error(ErrorKind::BadLabel, std::string(raw));
}

namespace {

const std::array<std::string_view, 8> kKnownFields = {
    "id", "dataset_id", "input_text", "context", "question", "gold_label", "claims", "meta"};

const std::string& require_string(const Json& raw, const char* name) {
    auto it = raw.find(name);
    if (it == raw.end() || it->is_null()) throw Error(ErrorKind::MissingField, name);
    if (!it->is_string()) throw Error(ErrorKind::InvalidField, name);
    return it->get_ref<const std::string&>();
}

std::string meta_value(const Json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
}

}  // namespace

DatasetEntry validate_entry(const Json& raw) {
    if (!raw.is_object()) throw Error(ErrorKind::InvalidField, "record is not a JSON object");

    DatasetEntry entry;
    entry.id = require_string(raw, "id");
    if (trim(entry.id).empty()) throw Error(ErrorKind::InvalidField, "id");
    entry.dataset_id = require_string(raw, "dataset_id");
    entry.input_text = require_string(raw, "input_text");
    if (trim(entry.input_text).empty()) throw Error(ErrorKind::EmptyInput, entry.id);
    entry.gold_label = parse_label(require_string(raw, "gold_label"));

    if (auto it = raw.find("context"); it != raw.end() && !it->is_null()) {
        if (!it->is_array()) throw Error(ErrorKind::InvalidField, "context");
        std::vector<std::string> ctx;
        for (const auto& s : *it) {
            if (!s.is_string()) throw Error(ErrorKind::InvalidField, "context");
            ctx.push_back(s.get<std::string>());
        }
        entry.context = std::move(ctx);
    }
    if (auto it = raw.find("question"); it != raw.end() && !it->is_null()) {
        if (!it->is_string()) throw Error(ErrorKind::InvalidField, "question");
        entry.question = it->get<std::string>();
    }
    if (auto it = raw.find("claims"); it != raw.end() && !it->is_null()) {
        if (!it->is_array() || it->empty()) throw Error(ErrorKind::InvalidField, "claims");
        std::vector<ClaimAnnotation> claims;
        for (const auto& c : *it) {
            if (!c.is_object()) throw Error(ErrorKind::InvalidField, "claims");
            ClaimAnnotation ann;
            ann.text = require_string(c, "text");
            ann.label = parse_label(require_string(c, "label"));
            claims.push_back(std::move(ann));
        }
        entry.claims = std::move(claims);
    }
    if (auto it = raw.find("meta"); it != raw.end() && !it->is_null()) {
        if (!it->is_object()) throw Error(ErrorKind::InvalidField, "meta");
        for (const auto& [k, v] : it->items()) entry.meta[k] = meta_value(v);
    }
    for (const auto& [k, v] : raw.items()) {
        if (std::find(kKnownFields.begin(), kKnownFields.end(), k) == kKnownFields.end()) {
            entry.meta.try_emplace(k, meta_value(v));
        }
    }
    return entry;
}

Json to_json(const DatasetEntry& entry) {
    Json j = {
        {"id", entry.id},
        {"dataset_id", entry.dataset_id},
        {"input_text", entry.input_text},
        {"gold_label", to_string(entry.gold_label)},
    };
    if (entry.context) j["context"] = *entry.context;
    if (entry.question) j["question"] = *entry.question;
    if (entry.claims) {
        Json claims = Json::array();
        for (const auto& c : *entry.claims) {
            claims.push_back({{"text", c.text}, {"label", to_string(c.label)}});
        }
        j["claims"] = std::move(claims);
    }
    if (!entry.meta.empty()) j["meta"] = entry.meta;
    return j;
}

DecompositionMethod DecompositionMethod::reflected(const DecompositionMethod& from) {
    if (from.kind == MethodKind::Reflected) return from;
    return {MethodKind::Reflected, from.exact_n, from.kind};
}

std::string_view method_name(MethodKind kind) {
    switch (kind) {
        case MethodKind::Baseline: return "baseline";
        case MethodKind::FactScore: return "factscore";
        case MethodKind::VeriScore: return "veriscore";
        case MethodKind::Wice: return "wice";
        case MethodKind::ExactN: return "exact_n";
        case MethodKind::Reflected: return "reflected";
    }
    return "unknown";
}

MethodKind parse_method_kind(std::string_view name) {
    const std::string n = to_lower(trim(name));
    if (n == "baseline") return MethodKind::Baseline;
    if (n == "factscore") return MethodKind::FactScore;
    if (n == "veriscore") return MethodKind::VeriScore;
    if (n == "wice") return MethodKind::Wice;
    if (n == "exact_n") return MethodKind::ExactN;
    if (n == "reflected") return MethodKind::Reflected;
    throw Error(ErrorKind::InvalidArgument, "unknown decomposition method '" + std::string(name) + "'");
}

std::string to_string(const DecompositionMethod& method) {
    auto plain = [](MethodKind kind, int n) {
        std::string s(method_name(kind));
        if (kind == MethodKind::ExactN) s += "(" + std::to_string(n) + ")";
        return s;
    };
    if (method.kind == MethodKind::Reflected) {
        return "reflected(" + plain(method.base.value_or(MethodKind::Baseline), method.exact_n) + ")";
    }
    return plain(method.kind, method.exact_n);
}

DecompositionMethod parse_method(std::string_view name) {
    const std::string n = to_lower(trim(name));
    auto inner = [&](std::string_view prefix) -> std::optional<std::string> {
        if (n.size() > prefix.size() + 1 && n.compare(0, prefix.size(), prefix) == 0 &&
            n[prefix.size()] == '(' && n.back() == ')') {
            return n.substr(prefix.size() + 1, n.size() - prefix.size() - 2);
        }
        return std::nullopt;
    };
    if (auto arg = inner("reflected")) return DecompositionMethod::reflected(parse_method(*arg));
    if (auto arg = inner("exact_n")) {
        try {
            return DecompositionMethod::exact(std::stoi(*arg));
        } catch (const std::exception&) {
            throw Error(ErrorKind::InvalidArgument, "bad exact_n count in '" + std::string(name) + "'");
        }
    }
    const MethodKind kind = parse_method_kind(n);
    if (kind == MethodKind::ExactN || kind == MethodKind::Reflected) {
        throw Error(ErrorKind::InvalidArgument, "method '" + n + "' needs an argument");
    }
    return DecompositionMethod::of(kind);
}

std::vector<std::string> Decomposition::texts() const {
    std::vector<std::string> out;
    out.reserve(subclaims.size());
    for (const auto& s : subclaims) out.push_back(s.text);
    return out;
}

Decomposition make_decomposition(std::string source_id, DecompositionMethod method,
                                 const std::vector<std::string>& texts, std::string model_id) {
    if (texts.empty()) throw Error(ErrorKind::EmptyDecomposition, source_id);
    Decomposition d{std::move(source_id), method, {}, std::move(model_id)};
    d.subclaims.reserve(texts.size());
    for (const auto& t : texts) {
        std::string text = trim(t);
        if (text.empty()) throw Error(ErrorKind::InvalidArgument, "blank sub-claim in " + d.source_id);
        d.subclaims.push_back({std::move(text), d.subclaims.size()});
    }
    if (method.kind == MethodKind::Baseline && d.subclaims.size() != 1) {
        throw Error(ErrorKind::InvalidArgument, "baseline decomposition must have one sub-claim");
    }
    if (method.kind == MethodKind::ExactN &&
        d.subclaims.size() != static_cast<std::size_t>(method.exact_n)) {
        throw Error(ErrorKind::CountMismatch, "expected " + std::to_string(method.exact_n) + ", got " +
                                                  std::to_string(d.subclaims.size()));
    }
    return d;
}

Json to_json(const Decomposition& d) {
    return {
        {"source_id", d.source_id},
        {"method", to_string(d.method)},
        {"model_id", d.model_id},
        {"subclaims", d.texts()},
    };
}

Decomposition decomposition_from_json(const Json& j) {
    try {
        return make_decomposition(j.at("source_id").get<std::string>(),
                                  parse_method(j.at("method").get<std::string>()),
                                  j.at("subclaims").get<std::vector<std::string>>(),
                                  j.value("model_id", std::string{}));
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::InvalidField, std::string("decomposition: ") + e.what());
    }
}

Json to_json(const SubClaimScore& s) {
    return {
        {"subclaim_index", s.subclaim_index},
        {"per_evidence", s.per_evidence},
        {"combined", s.combined},
        {"backend_id", s.backend_id},
    };
}

Json to_json(const PipelineRecord& r) {
    Json scores = Json::array();
    for (const auto& s : r.subclaim_scores) scores.push_back(to_json(s));
    return {
        {"entry_id", r.entry_id},
        {"decomposition", to_json(r.decomposition)},
        {"subclaim_scores", std::move(scores)},
        {"final_score", r.final_score},
        {"predicted", to_string(r.predicted)},
    };
}

namespace {

std::string normalize_prompt_text(const std::string& s) {
    std::string unified;
    unified.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\r') {
            unified += '\n';
            if (i + 1 < s.size() && s[i + 1] == '\n') ++i;
        } else {
            unified += s[i];
        }
    }
    std::string out;
    out.reserve(unified.size());
    std::size_t start = 0;
    while (true) {
        const std::size_t nl = unified.find('\n', start);
        std::string_view line(unified.data() + start,
                              (nl == std::string::npos ? unified.size() : nl) - start);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
        out += line;
        if (nl == std::string::npos) break;
        out += '\n';
        start = nl + 1;
    }
    return trim(out);
}

Json normalize(const Json& j) {
    if (j.is_string()) return normalize_prompt_text(j.get<std::string>());
    if (j.is_array()) {
        Json out = Json::array();
        for (const auto& v : j) out.push_back(normalize(v));
        return out;
    }
    if (j.is_object()) {
        Json out = Json::object();
        for (const auto& [k, v] : j.items()) out[k] = normalize(v);
        return out;
    }
    return j;
}

}  // namespace

std::string canonical_payload(const Json& payload) {
    // nlohmann::json objects are std::map backed, so dump() emits sorted keys.
    return normalize(payload).dump();
}

std::string cache_key(std::string_view payload) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(payload.data(), payload.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorKind::InvalidArgument, "sha256 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    hex.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        hex += kHex[digest[i] >> 4];
        hex += kHex[digest[i] & 0x0f];
    }
    return hex;
}

}  // namespace dtv
