#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dtv/core.hpp"
#include "dtv/gateway.hpp"

namespace dtv {

struct Demonstration {
    std::string input;
    std::string output;
};

// One prompt asset. Files use "@@ <section>" marker lines:
//   @@ version 1
//   @@ system          (optional)
//   @@ user            (required; may hold {placeholders})
//   @@ demo input / @@ demo output   (repeatable pairs)
struct PromptTemplate {
    std::string name;
    int version = 1;
    std::string system;
    std::string user_template;
    std::vector<Demonstration> demonstrations;
};

PromptTemplate parse_prompt_asset(std::string_view text, std::string name);

// Replaces each {key} for keys present in vars; other braces are left alone.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& vars);

// System message, one user/assistant pair per demonstration, then the rendered instance.
// A demo input is substituted for {input_text} when the user template has it, else sent verbatim.
std::vector<ChatMessage> build_messages(const PromptTemplate& tmpl,
                                        const std::map<std::string, std::string>& vars);

// Built-in assets compiled from prompts/*.prompt; a directory overrides them file by file.
class PromptLibrary {
public:
    static PromptLibrary builtin();
    static PromptLibrary load(const std::filesystem::path& dir);

    const PromptTemplate& get(std::string_view name) const;
    bool contains(std::string_view name) const;
    void put(PromptTemplate tmpl);

private:
    std::map<std::string, PromptTemplate, std::less<>> templates_;
};

// Fenced ``` blocks win when present; otherwise "- ", "* " and "N." / "N)" list lines.
// Items are trimmed and empties dropped.
std::vector<std::string> parse_subclaims(std::string_view raw);

// Exact-string duplicates removed, first occurrence kept.
std::vector<std::string> dedupe(std::vector<std::string> items);

std::vector<std::string> split_sentences(std::string_view text);

// One window per sentence: previous, focal and next sentence, with the focal one
// wrapped in <SOS>...<EOS>.
std::vector<std::string> sentence_windows(const std::vector<std::string>& sentences);

enum class Granularity { Claim, Response };

Decomposition decompose_baseline(const std::string& source_id, std::string_view text);

class Decomposer {
public:
    Decomposer(const Gateway& gateway, PromptLibrary prompts, std::string model_id);

    // FactScore, VeriScore or Wice. VeriScore on response-level input runs one request per
    // sentence window. Throws EmptyDecomposition when nothing parses.
    Decomposition decompose(const std::string& source_id, std::string_view text, MethodKind method,
                            Granularity granularity = Granularity::Claim) const;

    // Retries once with a corrective message, then throws CountMismatch(expected, got).
    Decomposition decompose_exact_n(const std::string& source_id, std::string_view text, int n) const;

    // Throws MarkerMissing when the reply lacks "### Decontextualized Response:".
    std::string decontextualize(std::string_view question, std::string_view response) const;

    const std::string& model_id() const { return model_id_; }

private:
    std::string ask(std::vector<ChatMessage> messages) const;

    const Gateway& gateway_;
    PromptLibrary prompts_;
    std::string model_id_;
};

std::string_view template_name(MethodKind method);

}  // namespace dtv
