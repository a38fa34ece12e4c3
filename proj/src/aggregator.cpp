#include "dtv/aggregator.hpp"

#include <algorithm>
#include <cmath>

#include "dtv/error.hpp"

namespace dtv {

std::string_view to_string(AggregationMethod method) {
    return method == AggregationMethod::HarmonicMean ? "harmonic_mean" : "min";
}

AggregationMethod parse_aggregation_method(std::string_view name) {
    const std::string n = to_lower(trim(name));
    if (n == "harmonic_mean" || n == "harmonicmean" || n == "harmonic") return AggregationMethod::HarmonicMean;
    if (n == "min" || n == "minimum") return AggregationMethod::Min;
    throw Error(ErrorKind::InvalidConfig, "unknown aggregation method '" + std::string(name) + "'");
}

void AggregatorConfig::validate() const {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw Error(ErrorKind::InvalidConfig, "aggregator.threshold must be in (0,1)");
    }
    if (!(epsilon > 0.0 && epsilon < 0.01)) {
        throw Error(ErrorKind::InvalidConfig, "aggregator.epsilon must be in (0,0.01)");
    }
}

double aggregate(std::span<const double> scores, const AggregatorConfig& cfg) {
    if (scores.empty()) throw Error(ErrorKind::EmptyScores, "no sub-claim scores to aggregate");
    cfg.validate();

    double reciprocal_sum = 0.0;
    double lowest = 1.0;
    double highest = 0.0;
    for (double s : scores) {
        if (!(s >= 0.0 && s <= 1.0)) throw Error(ErrorKind::OutOfRange, "sub-claim score outside [0,1]");
        const double clamped = std::max(s, cfg.epsilon);
        reciprocal_sum += 1.0 / clamped;
        lowest = std::min(lowest, clamped);
        highest = std::max(highest, clamped);
    }
    if (cfg.method == AggregationMethod::Min) return lowest;
    // Rounding can push n / sum(1/s) one ulp past the extremes; the mean itself cannot.
    return std::clamp(static_cast<double>(scores.size()) / reciprocal_sum, lowest, highest);
}

Label classify(double final_score, const AggregatorConfig& cfg) {
    return final_score > cfg.threshold ? Label::Supported : Label::Unsupported;
}

}  // namespace dtv
