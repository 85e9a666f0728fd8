#include "tg/evaluation.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "tg/corpus_io.hpp"
#include "tg/error.hpp"
#include "tg/format.hpp"
#include "tg/weights.hpp"

namespace tg {

using nlohmann::json;

const char* conflation_name(Conflation c) {
    return c == Conflation::non_no_positive ? "non_no_positive" : "abusive_only";
}

Conflation parse_conflation(std::string_view s) {
    if (s == "non_no_positive") return Conflation::non_no_positive;
    if (s == "abusive_only") return Conflation::abusive_only;
    throw Error(ErrorKind::parse, "unknown conflation mode '" + std::string(s) + "'");
}

bool conflate_label(ContainAbuse label, Conflation mode) {
    if (mode == Conflation::abusive_only) return label == ContainAbuse::abusive;
    return label != ContainAbuse::no;
}

PRCurve pr_curve(const ScoreTable& scores, const std::map<std::string, bool>& labels,
                 const WeightAssignment* weights) {
    if (labels.empty()) {
        throw Error(ErrorKind::domain, "precision-recall curve over an empty label set");
    }

    struct Instance {
        double score;
        double weight;
        bool positive;
    };
    std::vector<Instance> instances;
    instances.reserve(labels.size());
    PRCurve curve;
    for (const auto& [guid, positive] : labels) {
        const auto score_it = scores.entries.find(guid);
        if (score_it == scores.entries.end()) {
            throw Error(ErrorKind::domain,
                        "labeled guid '" + guid + "' has no score from classifier '" +
                            scores.classifier_name + "'");
        }
        double w = 1.0;
        if (weights) {
            const auto w_it = weights->entries.find(guid);
            if (w_it == weights->entries.end()) {
                throw Error(ErrorKind::domain, "no weight for guid '" + guid + "'");
            }
            w = w_it->second.weight;
        }
        instances.push_back({score_it->second, w, positive});
        curve.total_weight += w;
        if (positive) curve.total_positive_weight += w;
    }
    if (curve.total_positive_weight <= 0.0) {
        throw Error(ErrorKind::domain, "no positive labels: recall is undefined");
    }

    // Instances enter in guid order, so the stable sort leaves tied scores in
    // a deterministic order and the cumulative sums are bit-stable.
    std::stable_sort(instances.begin(), instances.end(),
                     [](const Instance& a, const Instance& b) { return a.score > b.score; });

    double cum_weight = 0.0;
    double cum_positive = 0.0;
    std::size_t i = 0;
    while (i < instances.size()) {
        const double tau = instances[i].score;
        for (; i < instances.size() && instances[i].score == tau; ++i) {
            cum_weight += instances[i].weight;
            if (instances[i].positive) cum_positive += instances[i].weight;
        }
        if (cum_weight <= 0.0) continue;  // zero retained weight: omit the point
        PRPoint point;
        point.tau = tau;
        point.precision = cum_positive / cum_weight;
        point.recall = cum_positive / curve.total_positive_weight;
        curve.points.push_back(point);
    }
    return curve;
}

F1StarResult f1_star(const PRCurve& curve) {
    if (curve.points.empty()) {
        throw Error(ErrorKind::domain, "F1* over an empty curve");
    }
    bool found = false;
    F1StarResult best;
    for (const auto& point : curve.points) {  // descending tau: first max wins ties
        const double sum = point.precision + point.recall;
        if (sum == 0.0) continue;
        const double f1 = 2.0 * point.precision * point.recall / sum;
        if (!found || f1 > best.f1) {
            found = true;
            best.f1 = f1;
            best.precision = point.precision;
            best.recall = point.recall;
            best.tau = point.tau;
        }
    }
    if (!found) {
        throw Error(ErrorKind::domain, "every curve point has precision + recall = 0");
    }
    return best;
}

double average_precision(const PRCurve& curve) {
    if (curve.points.empty()) {
        throw Error(ErrorKind::domain, "average precision over an empty curve");
    }
    double ap = 0.0;
    double prev_recall = 0.0;
    for (const auto& point : curve.points) {
        ap += (point.recall - prev_recall) * point.precision;
        prev_recall = point.recall;
    }
    return ap;
}

EvalReport evaluate_classifier(const std::string& name, const ScoreTable& scores,
                               const std::map<std::string, ContainAbuse>& reference,
                               Cohort reference_cohort, Conflation conflation,
                               const WeightAssignment* weights) {
    std::map<std::string, bool> labels;
    for (const auto& [guid, label] : reference) {
        if (scores.entries.count(guid)) {
            labels.emplace(guid, conflate_label(label, conflation));
        }
    }
    if (labels.empty()) {
        throw Error(ErrorKind::domain, "classifier '" + name +
                                           "' scored none of the reference-labeled tweets");
    }

    const PRCurve curve = pr_curve(scores, labels, weights);
    const F1StarResult star = f1_star(curve);

    EvalReport report;
    report.classifier_name = name;
    report.reference_cohort = reference_cohort;
    report.conflation = conflation;
    report.precision_at_f1star = star.precision;
    report.recall_at_f1star = star.recall;
    report.f1_star = star.f1;
    report.average_precision = average_precision(curve);
    report.threshold_star = star.tau;
    report.weighted = weights != nullptr;
    report.n_evaluated = labels.size();
    return report;
}

void save_eval_report_json(const std::string& path, const std::vector<EvalReport>& rows,
                           const ArtifactMeta* meta) {
    json table = json::array();
    for (const auto& row : rows) {
        json r;
        r["classifier"] = row.classifier_name;
        r["reference_cohort"] = cohort_name(row.reference_cohort);
        r["conflation"] = conflation_name(row.conflation);
        r["precision_at_f1star"] = row.precision_at_f1star;
        r["recall_at_f1star"] = row.recall_at_f1star;
        r["f1_star"] = row.f1_star;
        r["average_precision"] = row.average_precision;
        r["threshold_star"] = row.threshold_star;
        r["weighted"] = row.weighted;
        r["n_evaluated"] = row.n_evaluated;
        table.push_back(std::move(r));
    }
    json out;
    if (meta) {
        out["command"] = meta->command;
        out["config_hash"] = meta->config_hash;
        if (meta->seed) out["seed"] = *meta->seed;
    }
    out["rows"] = std::move(table);
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
    file << out.dump(2) << "\n";
}

void save_pr_curve_csv(const std::string& path, const PRCurve& curve,
                       const ArtifactMeta* meta) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
    if (meta) out << meta->to_comment() << "\n";
    out << "tau,precision,recall\n";
    for (const auto& point : curve.points) {
        out << format_double(point.tau) << "," << format_double(point.precision) << ","
            << format_double(point.recall) << "\n";
    }
}

PRCurve load_pr_curve_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "' for reading");
    PRCurve curve;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || is_comment_line(line)) continue;
        const auto fields = split_csv_line(line);
        if (!header_seen) {
            if (fields != std::vector<std::string>{"tau", "precision", "recall"}) {
                throw Error(ErrorKind::parse, path + ":" + std::to_string(lineno) +
                                                  ": expected header 'tau,precision,recall'");
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 3) {
            throw Error(ErrorKind::parse,
                        path + ":" + std::to_string(lineno) + ": expected 3 fields");
        }
        PRPoint point;
        try {
            point.tau = parse_double(fields[0], "tau");
            point.precision = parse_double(fields[1], "precision");
            point.recall = parse_double(fields[2], "recall");
        } catch (const Error& e) {
            throw Error(e.kind(), path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        curve.points.push_back(point);
    }
    if (!header_seen) {
        throw Error(ErrorKind::parse, path + ": missing header 'tau,precision,recall'");
    }
    return curve;
}

}  // namespace tg
