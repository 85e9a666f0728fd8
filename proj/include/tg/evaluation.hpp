#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tg/annotation.hpp"
#include "tg/corpus.hpp"

namespace tg {

struct WeightAssignment;

struct PRPoint {
    double tau = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

// One point per distinct score value, descending. Thresholds that retain
// zero weight are omitted rather than given an arbitrary precision.
struct PRCurve {
    std::vector<PRPoint> points;
    double total_positive_weight = 0.0;
    double total_weight = 0.0;
};

struct F1StarResult {
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double tau = 0.0;
};

// Which aggregated classes count as positive when binarizing a reference
// label. The default folds problematic and abusive together.
enum class Conflation { non_no_positive, abusive_only };

const char* conflation_name(Conflation c);
Conflation parse_conflation(std::string_view s);  // throws Error(parse)

bool conflate_label(ContainAbuse label, Conflation mode);

// labels must be a subset of the scored guids; weights of nullptr means
// unit weights. At least one positive label is required.
PRCurve pr_curve(const ScoreTable& scores, const std::map<std::string, bool>& labels,
                 const WeightAssignment* weights = nullptr);

// Maximizes 2PR/(P+R) over the curve; ties resolve toward the higher
// threshold. Points with P + R = 0 are skipped.
F1StarResult f1_star(const PRCurve& curve);

// Step-interpolated: sum of (R_k - R_{k-1}) * P_k with R_0 = 0.
double average_precision(const PRCurve& curve);

struct EvalReport {
    std::string classifier_name;
    Cohort reference_cohort = Cohort::crowd;
    Conflation conflation = Conflation::non_no_positive;
    double precision_at_f1star = 0.0;
    double recall_at_f1star = 0.0;
    double f1_star = 0.0;
    double average_precision = 0.0;
    double threshold_star = 0.0;
    bool weighted = false;
    std::size_t n_evaluated = 0;
};

// Restricts the reference labels to the scored guids (error when empty),
// binarizes them under the conflation mode, and reports the curve summary.
EvalReport evaluate_classifier(const std::string& name, const ScoreTable& scores,
                               const std::map<std::string, ContainAbuse>& reference,
                               Cohort reference_cohort, Conflation conflation,
                               const WeightAssignment* weights = nullptr);

struct ArtifactMeta;

// Table-shaped: one object per (classifier, reference cohort, weighting)
// row under "rows"; provenance fields sit beside it when meta is given.
void save_eval_report_json(const std::string& path, const std::vector<EvalReport>& rows,
                           const ArtifactMeta* meta = nullptr);
void save_pr_curve_csv(const std::string& path, const PRCurve& curve,
                       const ArtifactMeta* meta = nullptr);
PRCurve load_pr_curve_csv(const std::string& path);

}  // namespace tg
