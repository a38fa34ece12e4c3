#pragma once

#include <span>
#include <string_view>

#include "dtv/core.hpp"

namespace dtv {

enum class AggregationMethod { HarmonicMean, Min };

std::string_view to_string(AggregationMethod method);
AggregationMethod parse_aggregation_method(std::string_view name);

struct AggregatorConfig {
    AggregationMethod method = AggregationMethod::HarmonicMean;
    double threshold = 0.5;
    // Floor applied to every score before aggregation; keeps 1/s finite.
    double epsilon = 1e-6;

    // Throws InvalidConfig unless 0 < threshold < 1 and 0 < epsilon < 0.01.
    void validate() const;
};

// Scores are clamped to [epsilon, 1], then combined: n / sum(1/s) or min.
// Throws EmptyScores, and OutOfRange for values outside [0,1].
double aggregate(std::span<const double> scores, const AggregatorConfig& cfg);

// Supported iff final_score > threshold; a tie is Unsupported.
Label classify(double final_score, const AggregatorConfig& cfg);

}  // namespace dtv
