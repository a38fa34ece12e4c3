#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "dtv/aggregator.hpp"
#include "dtv/cli.hpp"
#include "dtv/complexity.hpp"
#include "dtv/core.hpp"
#include "dtv/decomposer.hpp"
#include "dtv/error.hpp"
#include "dtv/error_analysis.hpp"
#include "dtv/evaluation.hpp"
#include "dtv/tradeoff.hpp"

namespace py = pybind11;

namespace {

// Entries cross the boundary as JSON text; the Python wrapper converts to and from dicts.
dtv::DatasetEntry entry_from(const std::string& json_text) {
    return dtv::validate_entry(dtv::Json::parse(json_text));
}

std::vector<dtv::Label> labels_from(const std::vector<std::string>& raw) {
    std::vector<dtv::Label> out;
    out.reserve(raw.size());
    for (const auto& r : raw) out.push_back(dtv::parse_label(r));
    return out;
}

py::dict report_dict(const dtv::ErrorReport& r) {
    py::list errors;
    for (const auto& e : r.errors) errors.append(dtv::to_string(e));
    py::dict d;
    d["judgment"] = std::string(dtv::to_string(r.judgment));
    d["errors"] = errors;
    d["reasoning"] = r.reasoning;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Decompose-then-verify core operations";

    static py::exception<dtv::Error> dtv_error(m, "DtvError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const dtv::Error& e) {
            // Message starts with the error kind, e.g. "OutOfRange: ...".
            dtv_error(e.what());
        }
    });

    m.def("aggregate", [](const std::vector<double>& scores, const std::string& method, double epsilon) {
        dtv::AggregatorConfig cfg;
        cfg.method = dtv::parse_aggregation_method(method);
        cfg.epsilon = epsilon;
        return dtv::aggregate(scores, cfg);
    }, py::arg("scores"), py::arg("method") = "harmonic_mean", py::arg("epsilon") = 1e-6);

    m.def("classify", [](double score, double threshold) {
        dtv::AggregatorConfig cfg;
        cfg.threshold = threshold;
        return std::string(dtv::to_string(dtv::classify(score, cfg)));
    }, py::arg("score"), py::arg("threshold") = 0.5);

    m.def("binarize_label", [](const std::string& dataset_id, const std::string& raw) {
        return std::string(dtv::to_string(dtv::binarize_label(dataset_id, raw)));
    });

    m.def("metrics", [](const std::vector<std::string>& preds, const std::vector<std::string>& golds) {
        const auto cm = dtv::confusion(labels_from(preds), labels_from(golds));
        const auto mm = dtv::metrics(cm);
        py::dict d;
        d["tp"] = cm.tp;
        d["fp"] = cm.fp;
        d["tn"] = cm.tn;
        d["fn"] = cm.fn;
        d["bacc"] = mm.bacc;
        d["f1"] = mm.f1;
        d["precision"] = mm.precision;
        d["recall"] = mm.recall;
        return d;
    }, py::arg("preds"), py::arg("golds"));

    m.def("parse_subclaims", &dtv::parse_subclaims);
    m.def("cache_key", [](const std::string& json_text) {
        return dtv::cache_key(dtv::canonical_payload(dtv::Json::parse(json_text)));
    });

    m.def("parse_detection_response", [](const std::string& raw) {
        return report_dict(dtv::parse_detection_response(raw));
    });

    m.def("build_combinations_json", [](const std::string& entry_json, const std::string& dataset_id) {
        std::vector<std::string> out;
        for (const auto& c : dtv::build_combinations(entry_from(entry_json))) {
            out.push_back(dtv::to_json(dtv::to_entry(c, dataset_id)).dump());
        }
        return out;
    });

    m.def("evaluate_point", [](double k_o, int n, double a0, double lambda, double e_r, double e_d) {
        const dtv::TradeoffParams p{a0, lambda, e_r, e_d};
        p.validate();
        const auto pt = dtv::evaluate_point(p, k_o, n);
        py::dict d;
        d["k_o"] = pt.k_o;
        d["n"] = pt.n;
        d["k_d"] = pt.k_d;
        d["a_baseline"] = pt.a_baseline;
        d["a_decomposed"] = pt.a_decomposed;
        d["delta_err"] = pt.delta_err;
        return d;
    }, py::arg("k_o"), py::arg("n"), py::arg("a0") = 0.95, py::arg("lambda_") = 0.15, py::arg("e_r") = 0.03,
       py::arg("e_d") = 0.02);

    m.def("crossover_n", [](double k_o, int n_max, double a0, double lambda, double e_r, double e_d) {
        const dtv::TradeoffParams p{a0, lambda, e_r, e_d};
        p.validate();
        return dtv::crossover_n(p, k_o, n_max);
    }, py::arg("k_o"), py::arg("n_max"), py::arg("a0") = 0.95, py::arg("lambda_") = 0.15, py::arg("e_r") = 0.03,
       py::arg("e_d") = 0.02);

    m.def("run_cli", [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = dtv::run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
    });
}
