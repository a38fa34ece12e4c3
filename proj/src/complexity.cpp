#include "dtv/complexity.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <utility>

#include "dtv/error.hpp"

namespace dtv {

std::string Combination::id() const {
    if (claim_indices.empty()) return source_id;
    return source_id + "::c" + std::to_string(claim_indices.front()) + "-" + std::to_string(claim_indices.back());
}

Label combo_label(std::span<const Label> labels) {
    if (labels.empty()) throw Error(ErrorKind::Empty, "empty combination");
    for (Label l : labels) {
        if (l == Label::Unsupported) return Label::Unsupported;
    }
    return Label::Supported;
}

std::vector<Combination> build_combinations(const DatasetEntry& entry) {
    if (!entry.claims || entry.claims->empty()) throw Error(ErrorKind::NoClaims, entry.id);
    const auto& claims = *entry.claims;
    const std::size_t m = claims.size();

    std::vector<Combination> out;
    out.reserve(m * (m + 1) / 2);
    for (std::size_t start = 0; start < m; ++start) {
        for (std::size_t len = 1; start + len <= m; ++len) {
            Combination c;
            c.source_id = entry.id;
            std::vector<Label> labels;
            for (std::size_t i = start; i < start + len; ++i) {
                c.claim_indices.push_back(i);
                if (i > start) c.text += ' ';
                c.text += claims[i].text;
                labels.push_back(claims[i].label);
            }
            c.gold = combo_label(labels);
            out.push_back(std::move(c));
        }
    }
    return out;
}

namespace {

// Unbiased integer in [0, bound) by rejection; fixed across standard libraries,
// unlike std::uniform_int_distribution.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = rng();
    while (x >= limit) x = rng();
    return x % bound;
}

}  // namespace

std::vector<Combination> sample_combinations(std::span<const Combination> pool, std::size_t n,
                                             std::size_t max_complexity, std::uint64_t seed) {
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "sample size must be >= 1");
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool[i].complexity() <= max_complexity) eligible.push_back(i);
    }
    if (eligible.size() < n) {
        throw Error(ErrorKind::NotEnoughCombos,
                    "requested " + std::to_string(n) + ", available " + std::to_string(eligible.size()));
    }

    // Partial Fisher-Yates over the eligible positions.
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(bounded(rng, eligible.size() - i));
        std::swap(eligible[i], eligible[j]);
    }
    eligible.resize(n);
    std::sort(eligible.begin(), eligible.end());

    std::vector<Combination> out;
    out.reserve(n);
    for (std::size_t i : eligible) out.push_back(pool[i]);
    return out;
}

DatasetEntry to_entry(const Combination& combo, const std::string& dataset_id) {
    DatasetEntry e;
    e.id = combo.id();
    e.dataset_id = dataset_id;
    e.input_text = combo.text;
    e.gold_label = combo.gold;
    e.meta["complexity"] = std::to_string(combo.complexity());
    e.meta["source_id"] = combo.source_id;
    return e;
}

DatasetEntry build_scaled_up(const DatasetEntry& entry) {
    if (!entry.context || entry.context->empty()) throw Error(ErrorKind::NoContext, entry.id);
    std::string prefix;
    for (const auto& s : *entry.context) {
        const std::string t = trim(s);
        if (t.empty()) continue;
        if (!prefix.empty()) prefix += ' ';
        prefix += t;
    }
    if (prefix.empty()) throw Error(ErrorKind::NoContext, entry.id);

    DatasetEntry out = entry;
    out.id = entry.id + "::long";
    out.input_text = prefix + " " + entry.input_text;
    out.context.reset();
    return out;
}

Heatmap heatmap(std::span<const PredictionRow> rows) {
    Heatmap map;
    std::map<std::pair<int, std::size_t>, std::pair<std::vector<Label>, std::vector<Label>>> groups;
    for (const auto& r : rows) {
        if (r.failed || !r.complexity || !r.n_subclaims || !r.predicted) {
            ++map.excluded;
            continue;
        }
        auto& [preds, golds] = groups[{*r.complexity, *r.n_subclaims}];
        preds.push_back(*r.predicted);
        golds.push_back(r.gold);
    }
    if (groups.empty()) throw Error(ErrorKind::Empty, "no rows tagged with complexity and sub-claim count");
    for (const auto& [cell, labels] : groups) {
        const auto& [preds, golds] = labels;
        map.cells.push_back({cell.first, cell.second, metrics(confusion(preds, golds)).f1, preds.size()});
    }
    return map;
}

void write_heatmap_csv(std::ostream& out, const Heatmap& map) {
    out << "complexity,n_subclaims,f1,n_records\n";
    out << std::setprecision(17);
    for (const auto& c : map.cells) {
        out << c.complexity << ',' << c.n_subclaims << ',' << c.f1 << ',' << c.n_records << '\n';
    }
}

}  // namespace dtv
