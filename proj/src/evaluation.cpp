#include "dtv/evaluation.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "dtv/error.hpp"

namespace dtv {

Label binarize_label(std::string_view dataset_id, std::string_view raw_label) {
    const std::string ds = to_lower(trim(dataset_id));
    const std::string raw = to_lower(trim(raw_label));
    auto unknown = [&]() {
        return Error(ErrorKind::UnknownRawLabel, ds + ": '" + std::string(raw_label) + "'");
    };

    if (ds == "wice") {
        if (raw == "supported") return Label::Supported;
        if (raw == "partially-supported" || raw == "not-supported") return Label::Unsupported;
        throw unknown();
    }
    if (ds == "claimdecomp") {
        if (raw == "mostly-true" || raw == "true") return Label::Supported;
        if (raw == "pants-on-fire" || raw == "false" || raw == "barely-true" || raw == "half-true") {
            return Label::Unsupported;
        }
        throw unknown();
    }
    if (ds == "felm") {
        if (raw == "true") return Label::Supported;
        if (raw == "false") return Label::Unsupported;
        throw unknown();
    }
    if (ds == "bingchat") {
        if (raw.empty()) throw unknown();
        return raw == "refuted" ? Label::Unsupported : Label::Supported;
    }
    throw Error(ErrorKind::UnknownDataset, std::string(dataset_id));
}

Label binarize_response(std::span<const Label> claim_labels) {
    if (claim_labels.empty()) throw Error(ErrorKind::Empty, "no claim labels");
    for (Label l : claim_labels) {
        if (l == Label::Unsupported) return Label::Unsupported;
    }
    return Label::Supported;
}

ConfusionMatrix confusion(std::span<const Label> preds, std::span<const Label> golds) {
    if (preds.size() != golds.size()) {
        throw Error(ErrorKind::LengthMismatch,
                    std::to_string(preds.size()) + " predictions vs " + std::to_string(golds.size()) + " golds");
    }
    if (preds.empty()) throw Error(ErrorKind::Empty, "no predictions");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const bool p = preds[i] == Label::Supported;
        const bool g = golds[i] == Label::Supported;
        if (p && g) ++cm.tp;
        else if (p) ++cm.fp;
        else if (g) ++cm.fn;
        else ++cm.tn;
    }
    return cm;
}

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace

Metrics metrics(const ConfusionMatrix& cm) {
    const auto tp = static_cast<double>(cm.tp);
    const auto fp = static_cast<double>(cm.fp);
    const auto tn = static_cast<double>(cm.tn);
    const auto fn = static_cast<double>(cm.fn);
    Metrics m;
    m.recall = ratio(tp, tp + fn);
    m.precision = ratio(tp, tp + fp);
    const double tnr = ratio(tn, tn + fp);
    m.bacc = (m.recall + tnr) / 2.0;
    m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
    return m;
}

std::vector<DatasetEntry> parse_dataset(std::string_view jsonl, std::string_view source_name) {
    std::vector<DatasetEntry> entries;
    std::set<std::string> seen;
    std::istringstream in{std::string(jsonl)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::string where = std::string(source_name) + ":" + std::to_string(line_no);
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw Error(ErrorKind::ParseError, where + ": " + e.what());
        }
        DatasetEntry entry;
        try {
            entry = validate_entry(j);
        } catch (const Error& e) {
            throw Error(e.kind(), where + ": " + e.detail());
        }
        if (!seen.insert(entry.id).second) throw Error(ErrorKind::DuplicateId, where + ": '" + entry.id + "'");
        entries.push_back(std::move(entry));
    }
    return entries;
}

std::vector<DatasetEntry> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open dataset " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset(buf.str(), path.string());
}

double avg_subclaims(std::span<const std::size_t> sizes) {
    if (sizes.empty()) throw Error(ErrorKind::Empty, "no records");
    double sum = 0.0;
    for (std::size_t s : sizes) sum += static_cast<double>(s);
    return sum / static_cast<double>(sizes.size());
}

double avg_subclaims(std::span<const PipelineRecord> records) {
    std::vector<std::size_t> sizes;
    sizes.reserve(records.size());
    for (const auto& r : records) sizes.push_back(r.decomposition.size());
    return avg_subclaims(sizes);
}

PredictionRow prediction_from_json(const Json& j) {
    if (!j.is_object()) throw Error(ErrorKind::ParseError, "prediction row is not an object");
    auto str = [&](const char* name) -> std::string {
        auto it = j.find(name);
        return it != j.end() && it->is_string() ? it->get<std::string>() : std::string();
    };

    PredictionRow row;
    row.entry_id = str("entry_id");
    if (row.entry_id.empty()) throw Error(ErrorKind::MissingField, "entry_id");
    const std::string gold = str("gold");
    if (gold.empty()) throw Error(ErrorKind::MissingField, "gold");
    row.gold = parse_label(gold);
    row.failed = str("status") == "failed";
    row.dataset_id = str("dataset_id");
    row.method = str("method");
    row.verifier = str("verifier");

    if (auto it = j.find("complexity"); it != j.end() && !it->is_null()) {
        if (it->is_number_integer()) row.complexity = it->get<int>();
        else if (it->is_string()) row.complexity = std::stoi(it->get<std::string>());
    }
    if (auto it = j.find("n_subclaims"); it != j.end() && it->is_number_unsigned()) {
        row.n_subclaims = it->get<std::size_t>();
    }
    if (auto it = j.find("decomposition"); it != j.end() && it->is_object()) {
        const Decomposition d = decomposition_from_json(*it);
        if (!row.n_subclaims) row.n_subclaims = d.size();
        if (row.method.empty()) row.method = to_string(d.method);
    }
    if (auto it = j.find("subclaim_scores"); it != j.end() && it->is_array() && !it->empty() && row.verifier.empty()) {
        if (auto b = (*it)[0].find("backend_id"); b != (*it)[0].end() && b->is_string()) row.verifier = b->get<std::string>();
    }
    if (row.failed) return row;

    const std::string predicted = str("predicted");
    if (predicted.empty()) throw Error(ErrorKind::MissingField, "predicted");
    row.predicted = parse_label(predicted);
    if (auto it = j.find("final_score"); it != j.end() && it->is_number()) row.final_score = it->get<double>();
    return row;
}

std::vector<PredictionRow> load_predictions(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open predictions " + path.string());
    std::vector<PredictionRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        try {
            rows.push_back(prediction_from_json(Json::parse(line)));
        } catch (const Json::exception& e) {
            throw Error(ErrorKind::ParseError, where + ": " + e.what());
        } catch (const Error& e) {
            throw Error(ErrorKind::ParseError, where + ": " + e.what());
        }
    }
    if (rows.empty()) throw Error(ErrorKind::Empty, "no predictions in " + path.string());
    return rows;
}

namespace {

// Shared value across rows, "mixed" when they disagree, empty when none is set.
std::string common_value(std::span<const PredictionRow> rows, std::string PredictionRow::*field) {
    std::string out;
    for (const auto& r : rows) {
        const std::string& v = r.*field;
        if (v.empty()) continue;
        if (out.empty()) out = v;
        else if (out != v) return "mixed";
    }
    return out;
}

}  // namespace

RunReport build_report(std::span<const PredictionRow> rows) {
    RunReport report;
    report.dataset_id = common_value(rows, &PredictionRow::dataset_id);
    report.method = common_value(rows, &PredictionRow::method);
    report.verifier = common_value(rows, &PredictionRow::verifier);

    std::vector<Label> preds;
    std::vector<Label> golds;
    std::vector<std::size_t> sizes;
    bool all_sized = true;
    for (const auto& r : rows) {
        if (r.failed) {
            ++report.n_failed;
            continue;
        }
        preds.push_back(*r.predicted);
        golds.push_back(r.gold);
        if (r.n_subclaims) sizes.push_back(*r.n_subclaims);
        else all_sized = false;
    }
    if (preds.empty()) throw Error(ErrorKind::Empty, "no evaluable predictions");
    report.n_entries = preds.size();
    report.cm = confusion(preds, golds);
    report.metrics = metrics(report.cm);
    if (all_sized) report.avg_subclaims = avg_subclaims(std::span<const std::size_t>(sizes));
    return report;
}

Json to_json(const RunReport& report) {
    return {
        {"dataset_id", report.dataset_id},
        {"method", report.method},
        {"verifier", report.verifier},
        {"n_entries", report.n_entries},
        {"n_failed", report.n_failed},
        {"avg_subclaims", report.avg_subclaims ? Json(*report.avg_subclaims) : Json(nullptr)},
        {"confusion", {{"tp", report.cm.tp}, {"fp", report.cm.fp}, {"tn", report.cm.tn}, {"fn", report.cm.fn}}},
        {"bacc", report.metrics.bacc},
        {"f1", report.metrics.f1},
        {"precision", report.metrics.precision},
        {"recall", report.metrics.recall},
    };
}

}  // namespace dtv
