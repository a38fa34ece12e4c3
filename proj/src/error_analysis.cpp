#include "dtv/error_analysis.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "dtv/error.hpp"

namespace dtv {

std::string_view display_name(ErrorCategory category) {
    switch (category) {
        case ErrorCategory::OmissionOfContext: return "Omission of Context Information";
        case ErrorCategory::Ambiguity: return "Ambiguity";
        case ErrorCategory::OverDecomposition: return "Over-Decomposition";
        case ErrorCategory::AlterationOfMeaning: return "Alteration of Original Meaning";
    }
    return "";
}

std::string_view display_name(ErrorSubtype subtype) {
    switch (subtype) {
        case ErrorSubtype::MissingCoreClaims: return "Missing Core Claims or Key Details";
        case ErrorSubtype::MissingLogicalRelationships: return "Missing Logical Relationships";
        case ErrorSubtype::VagueLanguage: return "Vague Language";
        case ErrorSubtype::RedundantInformation: return "Redundant Information";
        case ErrorSubtype::ExcessiveFragmentation: return "Excessive Fragmentation";
    }
    return "";
}

std::string_view key(ErrorCategory category) {
    switch (category) {
        case ErrorCategory::OmissionOfContext: return "omission_of_context";
        case ErrorCategory::Ambiguity: return "ambiguity";
        case ErrorCategory::OverDecomposition: return "over_decomposition";
        case ErrorCategory::AlterationOfMeaning: return "alteration_of_meaning";
    }
    return "";
}

ErrorCategory category_of(ErrorSubtype subtype) {
    switch (subtype) {
        case ErrorSubtype::MissingCoreClaims:
        case ErrorSubtype::MissingLogicalRelationships: return ErrorCategory::OmissionOfContext;
        case ErrorSubtype::VagueLanguage: return ErrorCategory::Ambiguity;
        case ErrorSubtype::RedundantInformation:
        case ErrorSubtype::ExcessiveFragmentation: return ErrorCategory::OverDecomposition;
    }
    return ErrorCategory::OmissionOfContext;
}

ErrorType ErrorType::make(ErrorCategory category, std::optional<ErrorSubtype> subtype) {
    if (subtype && category_of(*subtype) != category) {
        throw Error(ErrorKind::InvalidArgument, std::string(display_name(*subtype)) + " is not a subtype of " +
                                                    std::string(display_name(category)));
    }
    return {category, subtype};
}

std::string to_string(const ErrorType& type) {
    std::string s(display_name(type.category));
    if (type.subtype) {
        s += ": ";
        s += display_name(*type.subtype);
    }
    return s;
}

namespace {

struct Alias {
    std::string_view text;
    ErrorCategory category;
};

// Longest spellings first so prefix matching picks the most specific one.
constexpr Alias kCategoryAliases[] = {
    {"omission of context information", ErrorCategory::OmissionOfContext},
    {"alteration of original meaning", ErrorCategory::AlterationOfMeaning},
    {"omission of context", ErrorCategory::OmissionOfContext},
    {"over-decomposition", ErrorCategory::OverDecomposition},
    {"over decomposition", ErrorCategory::OverDecomposition},
    {"ambiguity", ErrorCategory::Ambiguity},
};

struct SubtypeAlias {
    std::string_view text;
    ErrorSubtype subtype;
};

constexpr SubtypeAlias kSubtypeAliases[] = {
    {"missing core claims or key details", ErrorSubtype::MissingCoreClaims},
    {"missing logical relationships", ErrorSubtype::MissingLogicalRelationships},
    {"excessive fragmentation", ErrorSubtype::ExcessiveFragmentation},
    {"redundant information", ErrorSubtype::RedundantInformation},
    {"missing core claims", ErrorSubtype::MissingCoreClaims},
    {"vague language", ErrorSubtype::VagueLanguage},
};

std::string strip_list_marker(std::string_view line) {
    std::string t = trim(line);
    if (t.rfind("- ", 0) == 0 || t.rfind("* ", 0) == 0) return trim(std::string_view(t).substr(2));
    std::size_t i = 0;
    while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
    if (i > 0 && i + 1 < t.size() && (t[i] == '.' || t[i] == ')') && t[i + 1] == ' ') {
        return trim(std::string_view(t).substr(i + 2));
    }
    return t;
}

std::string strip_decoration(std::string s) {
    // Markdown emphasis and trailing sentence punctuation.
    s.erase(std::remove(s.begin(), s.end(), '*'), s.end());
    s = trim(s);
    while (!s.empty() && (s.back() == '.' || s.back() == ',' || s.back() == ';')) s.pop_back();
    return trim(s);
}

std::optional<ErrorSubtype> match_subtype(std::string_view text) {
    for (const auto& a : kSubtypeAliases) {
        if (text == a.text) return a.subtype;
    }
    return std::nullopt;
}

bool is_no_error_line(const std::string& folded) {
    static const std::set<std::string, std::less<>> kNone = {
        "none", "n/a", "na", "no error", "no errors", "no error found", "no errors found", "not applicable", "-"};
    return folded.empty() || kNone.count(folded) != 0;
}

}  // namespace

ErrorType parse_error_type(std::string_view line) {
    const std::string cleaned = strip_decoration(strip_list_marker(line));
    const std::string folded = to_lower(cleaned);

    for (const auto& alias : kCategoryAliases) {
        if (folded.rfind(alias.text, 0) != 0) continue;
        std::string rest = trim(std::string_view(folded).substr(alias.text.size()));
        if (rest.empty()) return ErrorType::make(alias.category);
        if (rest.front() == '-' || rest.front() == ':') {
            rest = trim(std::string_view(rest).substr(1));
        } else if (rest.front() == '(' && rest.back() == ')') {
            rest = trim(std::string_view(rest).substr(1, rest.size() - 2));
        } else {
            continue;
        }
        if (auto sub = match_subtype(rest); sub && category_of(*sub) == alias.category) {
            return ErrorType::make(alias.category, sub);
        }
        throw Error(ErrorKind::UnknownErrorType, std::string(trim(line)));
    }
    if (auto sub = match_subtype(folded)) return ErrorType::make(category_of(*sub), sub);
    throw Error(ErrorKind::UnknownErrorType, std::string(trim(line)));
}

std::string_view to_string(Judgment judgment) {
    switch (judgment) {
        case Judgment::Acceptable: return "Acceptable";
        case Judgment::Problematic: return "Problematic";
        case Judgment::NoNeedForDecomposition: return "No need for decomposition";
    }
    return "";
}

Judgment parse_judgment(std::string_view text) {
    std::string folded;
    for (unsigned char c : to_lower(text)) {
        if (std::isalpha(c) || c == ' ') folded += static_cast<char>(c);
        else if (std::isspace(c)) folded += ' ';
    }
    folded = trim(folded);
    if (folded == "acceptable" || folded == "good") return Judgment::Acceptable;
    if (folded == "problematic") return Judgment::Problematic;
    if (folded == "no need for decomposition") return Judgment::NoNeedForDecomposition;
    if (folded.find("no need for decomposition") != std::string::npos) return Judgment::NoNeedForDecomposition;
    if (folded.find("problematic") != std::string::npos) return Judgment::Problematic;
    if (folded.find("acceptable") != std::string::npos) return Judgment::Acceptable;
    throw Error(ErrorKind::ParseError, "unrecognized judgment '" + trim(text) + "'");
}

namespace {

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view l = text.substr(start, nl - start);
        if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
        lines.push_back(l);
        start = nl + 1;
    }
    return lines;
}

// "### Header", "## header:", "**Header**" style lines.
std::optional<std::string> header_title(std::string_view line) {
    std::string t = trim(line);
    if (t.empty() || t[0] != '#') return std::nullopt;
    std::size_t i = 0;
    while (i < t.size() && t[i] == '#') ++i;
    std::string title = strip_decoration(t.substr(i));
    while (!title.empty() && (title.back() == ':' || title.back() == '\\')) title.pop_back();
    return to_lower(trim(title));
}

bool is_fence_line(std::string_view line) { return trim(line).rfind("```", 0) == 0; }

}  // namespace

std::optional<std::string> extract_section(std::string_view raw, std::string_view header) {
    const auto lines = lines_of(raw);
    const std::string wanted = to_lower(header);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto title = header_title(lines[i]);
        if (!title || *title != wanted) continue;

        std::vector<std::string_view> body;
        std::size_t j = i + 1;
        while (j < lines.size() && trim(lines[j]).empty()) ++j;
        if (j < lines.size() && is_fence_line(lines[j])) {
            const std::string opener = trim(lines[j]);
            // Inline form: ```text```
            if (opener.size() > 6 && opener.compare(opener.size() - 3, 3, "```") == 0) {
                return trim(std::string_view(opener).substr(3, opener.size() - 6));
            }
            for (++j; j < lines.size() && !is_fence_line(lines[j]); ++j) body.push_back(lines[j]);
        } else {
            // Unfenced: everything up to the next header.
            for (; j < lines.size() && !header_title(lines[j]); ++j) body.push_back(lines[j]);
        }
        std::string out;
        for (auto l : body) {
            out += l;
            out += '\n';
        }
        return trim(out);
    }
    return std::nullopt;
}

ErrorReport parse_detection_response(std::string_view raw) {
    auto reasoning = extract_section(raw, "Reasoning");
    if (!reasoning) throw Error(ErrorKind::ParseError, "missing section: Reasoning");
    auto error_type = extract_section(raw, "Error Type");
    if (!error_type) throw Error(ErrorKind::ParseError, "missing section: Error Type");
    auto judgment = extract_section(raw, "Judgment");
    if (!judgment) judgment = extract_section(raw, "Judgement");
    if (!judgment) throw Error(ErrorKind::ParseError, "missing section: Judgment");

    ErrorReport report;
    report.raw = std::string(raw);
    report.reasoning = *reasoning;
    report.judgment = parse_judgment(*judgment);
    for (auto line : lines_of(*error_type)) {
        const std::string folded = to_lower(strip_decoration(strip_list_marker(line)));
        if (is_no_error_line(folded)) continue;
        report.errors.push_back(parse_error_type(line));
    }
    if (report.judgment == Judgment::Acceptable && !report.errors.empty()) {
        throw Error(ErrorKind::ParseError, "judgment Acceptable contradicts listed errors");
    }
    if (report.judgment == Judgment::Problematic && report.errors.empty()) {
        throw Error(ErrorKind::ParseError, "judgment Problematic without any error type");
    }
    return report;
}

std::string render_detection_response(const ErrorReport& report) {
    std::string out = "### Reasoning\n```\n" + report.reasoning + "\n```\n\n### Error Type\n```\n";
    if (report.errors.empty()) {
        out += "None\n";
    } else {
        for (const auto& e : report.errors) out += "- " + to_string(e) + "\n";
    }
    out += "```\n\n### Judgment\n```\n";
    out += to_string(report.judgment);
    out += "\n```\n";
    return out;
}

std::string render_decomposition(const Decomposition& d) {
    std::string out;
    for (std::size_t i = 0; i < d.subclaims.size(); ++i) {
        out += "- " + d.subclaims[i].text;
        if (i + 1 < d.subclaims.size()) out += '\n';
    }
    return out;
}

ReflectionResult parse_reflection_response(std::string_view raw, std::string_view input_text,
                                           const Decomposition& original) {
    ReflectionResult result{parse_detection_response(raw), original};
    const auto method = DecompositionMethod::reflected(original.method);

    switch (result.report.judgment) {
        case Judgment::Acceptable:
            result.refined.method = method;
            return result;
        case Judgment::NoNeedForDecomposition:
            result.refined = make_decomposition(original.source_id, method, {trim(input_text)}, original.model_id);
            return result;
        case Judgment::Problematic: break;
    }

    auto section = extract_section(raw, "Refined Decomposition");
    if (!section) throw Error(ErrorKind::ParseError, "missing section: Refined Decomposition");
    auto claims = parse_subclaims(*section);
    if (claims.empty()) {
        for (auto line : lines_of(*section)) {
            std::string t = trim(line);
            if (!t.empty()) claims.push_back(std::move(t));
        }
    }
    claims = dedupe(std::move(claims));
    if (claims.empty()) throw Error(ErrorKind::EmptyRefinement, original.source_id);

    Decomposition refined;
    refined.source_id = original.source_id;
    refined.method = method;
    refined.model_id = original.model_id;
    for (auto& c : claims) refined.subclaims.push_back({std::move(c), refined.subclaims.size()});
    result.refined = std::move(refined);
    return result;
}

ErrorAnalyzer::ErrorAnalyzer(const Gateway& gateway, PromptLibrary prompts, std::string model_id)
    : gateway_(gateway), prompts_(std::move(prompts)), model_id_(std::move(model_id)) {}

std::string ErrorAnalyzer::ask(std::string_view prompt_name, std::string_view input_text,
                               const Decomposition& d) const {
    if (d.subclaims.empty()) throw Error(ErrorKind::EmptyDecomposition, d.source_id);
    ChatRequest req;
    req.model_id = model_id_;
    req.messages = build_messages(prompts_.get(prompt_name), {{"input_text", trim(input_text)},
                                                              {"decomposition", render_decomposition(d)}});
    return gateway_.complete(req).text;
}

ErrorReport ErrorAnalyzer::detect_errors(std::string_view input_text, const Decomposition& decomposition) const {
    return parse_detection_response(ask("detect_errors", input_text, decomposition));
}

ReflectionResult ErrorAnalyzer::reflect(std::string_view input_text, const Decomposition& decomposition) const {
    return parse_reflection_response(ask("reflect", input_text, decomposition), input_text, decomposition);
}

std::map<ErrorCategory, double> error_distribution(std::span<const ErrorReport> reports) {
    if (reports.empty()) throw Error(ErrorKind::EmptyReports, "no reports");
    std::map<ErrorCategory, std::size_t> counts;
    for (auto c : kAllCategories) counts[c] = 0;
    for (const auto& r : reports) {
        std::set<ErrorCategory> present;
        for (const auto& e : r.errors) present.insert(e.category);
        for (auto c : present) ++counts[c];
    }
    std::map<ErrorCategory, double> ratios;
    for (const auto& [c, n] : counts) ratios[c] = static_cast<double>(n) / static_cast<double>(reports.size());
    return ratios;
}

Json report_to_json(std::string_view entry_id, const ErrorReport& report) {
    Json errors = Json::array();
    for (const auto& e : report.errors) errors.push_back(to_string(e));
    return {
        {"entry_id", std::string(entry_id)},
        {"judgment", to_string(report.judgment)},
        {"errors", std::move(errors)},
        {"reasoning", report.reasoning},
    };
}

}  // namespace dtv
