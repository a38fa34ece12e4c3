#include "dtv/decomposer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "dtv/error.hpp"
#include "prompt_assets.hpp"

namespace dtv {

namespace fs = std::filesystem;

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = nl + 1;
    }
    return lines;
}

std::string strip_trailing_newlines(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
}

}  // namespace

PromptTemplate parse_prompt_asset(std::string_view text, std::string name) {
    PromptTemplate tmpl;
    tmpl.name = std::move(name);

    enum class Section { None, System, User, DemoInput, DemoOutput };
    Section section = Section::None;
    std::string buffer;
    bool have_user = false;
    std::optional<std::string> pending_input;

    auto flush = [&] {
        std::string body = strip_trailing_newlines(buffer);
        switch (section) {
            case Section::None:
                if (!trim(body).empty()) {
                    throw Error(ErrorKind::InvalidConfig, "prompt '" + tmpl.name + "': text before first section");
                }
                break;
            case Section::System: tmpl.system = std::move(body); break;
            case Section::User:
                tmpl.user_template = std::move(body);
                have_user = true;
                break;
            case Section::DemoInput:
                if (pending_input) {
                    throw Error(ErrorKind::InvalidConfig, "prompt '" + tmpl.name + "': demo input without output");
                }
                pending_input = std::move(body);
                break;
            case Section::DemoOutput:
                if (!pending_input) {
                    throw Error(ErrorKind::InvalidConfig, "prompt '" + tmpl.name + "': demo output without input");
                }
                tmpl.demonstrations.push_back({std::move(*pending_input), std::move(body)});
                pending_input.reset();
                break;
        }
        buffer.clear();
    };

    for (std::string_view line : split_lines(text)) {
        if (line.rfind("@@ ", 0) == 0) {
            const std::string directive = trim(line.substr(3));
            if (directive.rfind("version", 0) == 0) {
                try {
                    tmpl.version = std::stoi(directive.substr(7));
                } catch (const std::exception&) {
                    throw Error(ErrorKind::InvalidConfig, "prompt '" + tmpl.name + "': bad version line");
                }
                continue;
            }
            flush();
            if (directive == "system") section = Section::System;
            else if (directive == "user") section = Section::User;
            else if (directive == "demo input") section = Section::DemoInput;
            else if (directive == "demo output") section = Section::DemoOutput;
            else throw Error(ErrorKind::InvalidConfig, "prompt '" + tmpl.name + "': unknown section " + directive);
            continue;
        }
        buffer.append(line);
        buffer.push_back('\n');
    }
    flush();
    if (pending_input) throw Error(ErrorKind::InvalidConfig, "prompt '" + tmpl.name + "': demo input without output");
    if (!have_user) throw Error(ErrorKind::InvalidConfig, "prompt '" + tmpl.name + "' has no user section");
    return tmpl;
}

std::string render(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            const std::size_t close = tmpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                auto it = vars.find(std::string(tmpl.substr(i + 1, close - i - 1)));
                if (it != vars.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += tmpl[i++];
    }
    return out;
}

std::vector<ChatMessage> build_messages(const PromptTemplate& tmpl,
                                        const std::map<std::string, std::string>& vars) {
    std::vector<ChatMessage> messages;
    if (!tmpl.system.empty()) messages.push_back({Role::System, render(tmpl.system, vars)});
    const bool takes_input = tmpl.user_template.find("{input_text}") != std::string::npos;
    for (const auto& demo : tmpl.demonstrations) {
        std::string user = takes_input ? render(tmpl.user_template, {{"input_text", demo.input}}) : demo.input;
        messages.push_back({Role::User, std::move(user)});
        messages.push_back({Role::Assistant, demo.output});
    }
    messages.push_back({Role::User, render(tmpl.user_template, vars)});
    return messages;
}

PromptLibrary PromptLibrary::builtin() {
    PromptLibrary lib;
    for (const auto& [name, text] : detail::builtin_prompt_assets()) {
        lib.put(parse_prompt_asset(text, std::string(name)));
    }
    return lib;
}

PromptLibrary PromptLibrary::load(const fs::path& dir) {
    PromptLibrary lib = builtin();
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw Error(ErrorKind::InvalidConfig, "prompt dir not found: " + dir.string());
    for (const auto& item : fs::directory_iterator(dir)) {
        if (!item.is_regular_file() || item.path().extension() != ".prompt") continue;
        std::ifstream in(item.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        lib.put(parse_prompt_asset(ss.str(), item.path().stem().string()));
    }
    return lib;
}

const PromptTemplate& PromptLibrary::get(std::string_view name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) throw Error(ErrorKind::InvalidConfig, "no prompt asset named " + std::string(name));
    return it->second;
}

bool PromptLibrary::contains(std::string_view name) const {
    return templates_.find(name) != templates_.end();
}

void PromptLibrary::put(PromptTemplate tmpl) {
    std::string key = tmpl.name;
    templates_.insert_or_assign(std::move(key), std::move(tmpl));
}

namespace {

bool is_fence(std::string_view trimmed) { return trimmed.rfind("```", 0) == 0; }

// Returns the list item body when the line is "- x", "* x", "N. x" or "N) x".
std::optional<std::string> list_item(std::string_view line) {
    const std::string t = trim(line);
    if (t == "-" || t == "*") return std::string{};
    if (t.rfind("- ", 0) == 0 || t.rfind("* ", 0) == 0) return trim(std::string_view(t).substr(2));
    std::size_t i = 0;
    while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
    if (i > 0 && i < t.size() && (t[i] == '.' || t[i] == ')')) {
        if (i + 1 == t.size()) return std::string{};
        if (std::isspace(static_cast<unsigned char>(t[i + 1]))) return trim(std::string_view(t).substr(i + 2));
    }
    return std::nullopt;
}

std::string join_collapsed(const std::vector<std::string_view>& lines) {
    std::string out;
    for (auto line : lines) {
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (!out.empty()) out += ' ';
        out += t;
    }
    return out;
}

void append_block(const std::vector<std::string_view>& block, std::vector<std::string>& out) {
    std::vector<std::string_view> nonempty;
    for (auto l : block) {
        if (!trim(l).empty()) nonempty.push_back(l);
    }
    if (nonempty.empty()) return;
    const bool all_items = std::all_of(nonempty.begin(), nonempty.end(),
                                       [](std::string_view l) { return list_item(l).has_value(); });
    if (all_items) {
        for (auto l : nonempty) {
            std::string item = *list_item(l);
            if (!item.empty()) out.push_back(std::move(item));
        }
        return;
    }
    std::string text = join_collapsed(nonempty);
    if (!text.empty()) out.push_back(std::move(text));
}

}  // namespace

std::vector<std::string> parse_subclaims(std::string_view raw) {
    const auto lines = split_lines(raw);

    std::vector<std::string> fenced;
    bool saw_fence = false;
    bool inside = false;
    std::vector<std::string_view> block;
    for (auto line : lines) {
        const std::string t = trim(line);
        if (is_fence(t)) {
            saw_fence = true;
            // ```text``` on one line
            if (!inside && t.size() > 6 && t.compare(t.size() - 3, 3, "```") == 0) {
                std::string inner = trim(std::string_view(t).substr(3, t.size() - 6));
                if (!inner.empty()) fenced.push_back(std::move(inner));
                continue;
            }
            if (inside) {
                append_block(block, fenced);
                block.clear();
            }
            inside = !inside;
            continue;
        }
        if (inside) block.push_back(line);
    }
    if (inside) append_block(block, fenced);
    if (saw_fence && !fenced.empty()) return fenced;

    std::vector<std::string> items;
    for (auto line : lines) {
        if (auto item = list_item(line); item && !item->empty()) items.push_back(std::move(*item));
    }
    return items;
}

std::vector<std::string> dedupe(std::vector<std::string> items) {
    std::set<std::string> seen;
    std::vector<std::string> out;
    out.reserve(items.size());
    for (auto& item : items) {
        if (seen.insert(item).second) out.push_back(std::move(item));
    }
    return out;
}

namespace {

bool is_abbreviation(std::string_view before) {
    static const std::set<std::string, std::less<>> kAbbrev = {
        "mr", "mrs", "ms", "dr", "prof", "st", "jr", "sr", "vs", "etc", "e.g", "i.e", "u.s", "u.k", "no", "inc", "co", "ltd"};
    std::size_t start = before.size();
    while (start > 0 && !std::isspace(static_cast<unsigned char>(before[start - 1]))) --start;
    std::string word = to_lower(before.substr(start));
    if (word.size() == 1 && std::isalpha(static_cast<unsigned char>(word[0]))) return true;  // initials
    return kAbbrev.count(word) != 0;
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    const std::size_t n = text.size();
    for (std::size_t i = 0; i < n; ++i) {
        const char c = text[i];
        if (c != '.' && c != '!' && c != '?') continue;
        std::size_t end = i + 1;
        while (end < n && (text[end] == '"' || text[end] == '\'' || text[end] == ')')) ++end;
        if (end < n && !std::isspace(static_cast<unsigned char>(text[end]))) continue;
        std::size_t next = end;
        while (next < n && std::isspace(static_cast<unsigned char>(text[next]))) ++next;
        if (next < n) {
            const unsigned char nc = static_cast<unsigned char>(text[next]);
            if (!(std::isupper(nc) || std::isdigit(nc) || nc == '"' || nc == '\'' || nc == '(')) continue;
        }
        if (c == '.' && is_abbreviation(text.substr(start, i - start))) continue;
        std::string sentence = trim(text.substr(start, end - start));
        if (!sentence.empty()) out.push_back(std::move(sentence));
        start = end;
        i = end - 1;
    }
    std::string tail = trim(text.substr(std::min(start, n)));
    if (!tail.empty()) out.push_back(std::move(tail));
    return out;
}

std::vector<std::string> sentence_windows(const std::vector<std::string>& sentences) {
    std::vector<std::string> windows;
    windows.reserve(sentences.size());
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        std::string w;
        if (i > 0) w += sentences[i - 1] + " ";
        w += "<SOS>" + sentences[i] + "<EOS>";
        if (i + 1 < sentences.size()) w += " " + sentences[i + 1];
        windows.push_back(std::move(w));
    }
    return windows;
}

Decomposition decompose_baseline(const std::string& source_id, std::string_view text) {
    std::string t = trim(text);
    if (t.empty()) throw Error(ErrorKind::EmptyInput, source_id);
    return make_decomposition(source_id, DecompositionMethod::baseline(), {t}, "");
}

std::string_view template_name(MethodKind method) {
    switch (method) {
        case MethodKind::FactScore: return "factscore";
        case MethodKind::VeriScore: return "veriscore";
        case MethodKind::Wice: return "wice";
        case MethodKind::ExactN: return "exact_n";
        default: break;
    }
    throw Error(ErrorKind::InvalidArgument,
                "no decomposition prompt for method " + std::string(method_name(method)));
}

Decomposer::Decomposer(const Gateway& gateway, PromptLibrary prompts, std::string model_id)
    : gateway_(gateway), prompts_(std::move(prompts)), model_id_(std::move(model_id)) {}

std::string Decomposer::ask(std::vector<ChatMessage> messages) const {
    ChatRequest req;
    req.model_id = model_id_;
    req.messages = std::move(messages);
    return gateway_.complete(req).text;
}

Decomposition Decomposer::decompose(const std::string& source_id, std::string_view text, MethodKind method,
                                    Granularity granularity) const {
    if (trim(text).empty()) throw Error(ErrorKind::EmptyInput, source_id);
    if (method == MethodKind::Baseline || method == MethodKind::ExactN || method == MethodKind::Reflected) {
        throw Error(ErrorKind::InvalidArgument,
                    "decompose() takes factscore, veriscore or wice, not " + std::string(method_name(method)));
    }
    const PromptTemplate& tmpl = prompts_.get(template_name(method));

    std::vector<std::string> inputs;
    if (method == MethodKind::VeriScore) {
        if (granularity == Granularity::Response) {
            inputs = sentence_windows(split_sentences(text));
        } else {
            inputs.push_back("<SOS>" + trim(text) + "<EOS>");
        }
    } else {
        inputs.push_back(trim(text));
    }

    std::vector<std::string> claims;
    for (const auto& input : inputs) {
        auto parsed = parse_subclaims(ask(build_messages(tmpl, {{"input_text", input}})));
        claims.insert(claims.end(), std::make_move_iterator(parsed.begin()), std::make_move_iterator(parsed.end()));
    }
    claims = dedupe(std::move(claims));
    if (claims.empty()) throw Error(ErrorKind::EmptyDecomposition, source_id);
    return make_decomposition(source_id, DecompositionMethod::of(method), claims, model_id_);
}

Decomposition Decomposer::decompose_exact_n(const std::string& source_id, std::string_view text, int n) const {
    if (n < 2) throw Error(ErrorKind::InvalidArgument, "exact-N decomposition needs n >= 2");
    if (trim(text).empty()) throw Error(ErrorKind::EmptyInput, source_id);

    const PromptTemplate& tmpl = prompts_.get("exact_n");
    auto messages = build_messages(tmpl, {{"input_text", trim(text)}, {"num_sub_claims", std::to_string(n)}});
    std::string reply = ask(messages);
    auto claims = dedupe(parse_subclaims(reply));
    if (claims.size() != static_cast<std::size_t>(n)) {
        messages.push_back({Role::Assistant, reply});
        messages.push_back({Role::User, "Your answer contained " + std::to_string(claims.size()) +
                                            " claims, but exactly " + std::to_string(n) +
                                            " claims are required. Please answer again with exactly " +
                                            std::to_string(n) +
                                            " claims, each enclosed with triple backticks."});
        claims = dedupe(parse_subclaims(ask(messages)));
        if (claims.size() != static_cast<std::size_t>(n)) {
            throw Error(ErrorKind::CountMismatch,
                        "expected " + std::to_string(n) + ", got " + std::to_string(claims.size()));
        }
    }
    return make_decomposition(source_id, DecompositionMethod::exact(n), claims, model_id_);
}

std::string Decomposer::decontextualize(std::string_view question, std::string_view response) const {
    if (trim(question).empty() || trim(response).empty()) {
        throw Error(ErrorKind::InvalidArgument, "decontextualize needs a question and a response");
    }
    const PromptTemplate& tmpl = prompts_.get("decontextualize");
    const std::string reply =
        ask(build_messages(tmpl, {{"question", std::string(question)}, {"response", std::string(response)}}));

    static constexpr std::string_view kMarker = "### decontextualized response:";
    const std::string folded = to_lower(reply);
    const auto pos = folded.find(kMarker);
    if (pos == std::string::npos) throw Error(ErrorKind::MarkerMissing, "decontextualized response marker");
    std::string tail = trim(std::string_view(reply).substr(pos + kMarker.size()));
    if (tail.empty()) throw Error(ErrorKind::MarkerMissing, "nothing follows the marker");
    return tail;
}

}  // namespace dtv
