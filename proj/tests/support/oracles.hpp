#pragma once

// Independent reference computations shared by the unit and acceptance suites.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "dtv/core.hpp"

namespace dtv::testing {

struct OracleMetrics {
    double bacc = 0.0;
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

// Counts straight from the label lists, then the textbook ratios with 0/0 = 0.
inline OracleMetrics brute_force_metrics(const std::vector<Label>& preds, const std::vector<Label>& golds) {
    long tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const bool p = preds[i] == Label::Supported;
        const bool g = golds[i] == Label::Supported;
        tp += p && g;
        fp += p && !g;
        tn += !p && !g;
        fn += !p && g;
    }
    auto div = [](double a, double b) { return b == 0.0 ? 0.0 : a / b; };
    OracleMetrics m;
    m.recall = div(static_cast<double>(tp), static_cast<double>(tp + fn));
    m.precision = div(static_cast<double>(tp), static_cast<double>(tp + fp));
    const double tnr = div(static_cast<double>(tn), static_cast<double>(tn + fp));
    m.bacc = (m.recall + tnr) / 2.0;
    m.f1 = div(2.0 * m.precision * m.recall, m.precision + m.recall);
    return m;
}

// Calls fn(preds, golds) for every one of the 4^n joint assignments.
template <class Fn>
void for_each_assignment(std::size_t n, Fn&& fn) {
    std::vector<Label> preds(n), golds(n);
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= 4;
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        for (std::size_t i = 0; i < n; ++i, c /= 4) {
            preds[i] = (c & 1) ? Label::Unsupported : Label::Supported;
            golds[i] = (c & 2) ? Label::Unsupported : Label::Supported;
        }
        fn(preds, golds);
    }
}

// All (start, end) index pairs with start <= end, by brute force over the square.
inline std::vector<std::pair<std::size_t, std::size_t>> contiguous_spans(std::size_t m) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (std::size_t s = 0; s < m; ++s) {
        for (std::size_t e = 0; e < m; ++e) {
            if (s <= e) spans.emplace_back(s, e);
        }
    }
    return spans;
}

struct RawLabelCase {
    std::string dataset;
    std::string raw;
    Label expected;
};

// The documented raw label spaces of the claim-level and political fact-check datasets.
inline std::vector<RawLabelCase> documented_raw_labels() {
    const Label S = Label::Supported;
    const Label U = Label::Unsupported;
    return {
        {"wice", "SUPPORTED", S},          {"wice", "PARTIALLY-SUPPORTED", U}, {"wice", "NOT-SUPPORTED", U},
        {"claimdecomp", "pants-on-fire", U}, {"claimdecomp", "false", U},        {"claimdecomp", "barely-true", U},
        {"claimdecomp", "half-true", U},     {"claimdecomp", "mostly-true", S},  {"claimdecomp", "true", S},
    };
}

inline std::vector<std::pair<std::string, std::string>> unknown_raw_labels() {
    return {{"wice", "maybe"},        {"wice", "SUPPORTS"},          {"wice", ""},
            {"wice", "partially"},    {"claimdecomp", "pants-fire"}, {"claimdecomp", "mostly-false"},
            {"claimdecomp", "SUPPORTED"}, {"claimdecomp", ""}};
}

}  // namespace dtv::testing
