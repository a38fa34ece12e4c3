#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dtv/core.hpp"
#include "dtv/evaluation.hpp"

namespace dtv {

struct Combination {
    std::string source_id;
    std::vector<std::size_t> claim_indices;  // contiguous, ascending
    std::string text;
    Label gold = Label::Supported;

    std::size_t complexity() const { return claim_indices.size(); }
    // "<source>::c<start>-<end>" with inclusive 0-based bounds.
    std::string id() const;

    bool operator==(const Combination&) const = default;
};

// Every contiguous span of the annotated claims, ordered by (start, length), texts joined
// with one space. Throws NoClaims.
std::vector<Combination> build_combinations(const DatasetEntry& entry);

// Unsupported iff any member is Unsupported. Throws Empty on an empty span.
Label combo_label(std::span<const Label> labels);

// Uniform draw of n combinations without replacement among those with complexity
// <= max_complexity. The result keeps pool order and depends only on (pool, n, seed).
// Throws InvalidArgument for n == 0, NotEnoughCombos.
std::vector<Combination> sample_combinations(std::span<const Combination> pool, std::size_t n,
                                             std::size_t max_complexity, std::uint64_t seed);

// Dataset entry for a combination; meta.complexity carries the claim count.
DatasetEntry to_entry(const Combination& combo, const std::string& dataset_id);

// Prepends the context sentences; label unchanged, id suffixed "::long". Throws NoContext.
DatasetEntry build_scaled_up(const DatasetEntry& entry);

struct HeatmapCell {
    int complexity = 0;
    std::size_t n_subclaims = 0;
    double f1 = 0.0;
    std::size_t n_records = 0;
};

struct Heatmap {
    std::vector<HeatmapCell> cells;  // ordered by (complexity, n_subclaims)
    std::size_t excluded = 0;        // rows without both tags, or marked failed
};

// Groups rows by (complexity, n_subclaims) and computes F1 per occupied cell.
// Throws Empty when no row carries both tags.
Heatmap heatmap(std::span<const PredictionRow> rows);

// Header complexity,n_subclaims,f1,n_records.
void write_heatmap_csv(std::ostream& out, const Heatmap& map);

}  // namespace dtv
