#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tg/annotation.hpp"

namespace tg {

struct WeightAssignment;

// Chance-corrected nominal agreement. per_class holds each class's mean
// contribution; the contributions of one tweet sum to that tweet's kappa.
// degenerate marks the all-one-class case, reported as 1.0 by convention.
struct KappaResult {
    double kappa_overall = 0.0;
    std::vector<double> per_class_chance;  // pooled p_c, sums to 1
    double chance_agreement = 0.0;         // sum of p_c^2
    std::map<std::string, double> per_tweet;
    std::vector<double> per_class;
    std::size_t n_tweets = 0;
    std::uint32_t n_raters = 0;
    bool degenerate = false;
};

// One-way random-effects consistency over ordinal rows. degenerate marks the
// all-entries-identical case; icc is NaN there.
struct IccResult {
    double icc = 0.0;
    double v_w = 0.0;  // mean within-tweet variance
    double v_b = 0.0;  // between-tweet variance of row means, scaled by N
    double grand_mean = 0.0;
    std::vector<double> per_tweet_means;
    std::uint32_t n_raters = 0;
    std::size_t n_tweets = 0;
    bool degenerate = false;
};

struct RaterSelection {
    std::map<std::string, std::vector<Annotation>> selected;  // guid -> exactly N annotations
    std::size_t dropped_tweets = 0;                           // fewer than N raters
};

// Reduces every tweet to exactly n_target annotations: under-annotated tweets
// are dropped, over-annotated ones subsampled. The subsample stream is
// derived from (seed, guid), so adding tweets never perturbs other tweets.
RaterSelection select_raters(const std::vector<Annotation>& annotations,
                             std::uint32_t n_target, std::uint64_t seed);

std::vector<AnnotationCounts> counts_from_selection(const RaterSelection& selection);

// Generic core over count rows (one row per tweet, one column per class).
// All rows must sum to the same N >= 2. Optional per-row weights rescale the
// pooled class frequencies and the final means; they are normalized to mean 1
// so equal weights reproduce the unweighted result bit for bit.
KappaResult fleiss_kappa_rows(const std::vector<std::string>& ids,
                              const std::vector<std::vector<std::uint32_t>>& rows,
                              const std::vector<double>* weights = nullptr);

KappaResult fleiss_kappa(const std::vector<AnnotationCounts>& counts,
                         const std::vector<double>* weights = nullptr);

// Core over real-valued rows; used directly by tests of affine invariance.
IccResult icc_core(const std::vector<std::vector<double>>& rows,
                   const std::vector<double>* weights = nullptr);

// Ordinal entry point: validates every value is 0, 1 or 2.
IccResult icc_1k(const std::vector<std::vector<int>>& rows,
                 const std::vector<double>* weights = nullptr);

// Binary presence/absence kappa for one category over groups of annotations
// that already exclude the class-No raters and are fixed-N selected.
KappaResult per_type_kappa(const std::map<std::string, std::vector<Annotation>>& selected,
                           AbuseType type);

struct PerTypeMacro {
    std::map<AbuseType, KappaResult> per_type;
    double macro_kappa = 0.0;  // plain mean over the seven categories
};

PerTypeMacro per_type_macro(const std::map<std::string, std::vector<Annotation>>& selected);

struct AgreementRow {
    Cohort cohort = Cohort::crowd;
    std::string variable;  // "contain_abuse" or "type_of_abuse"
    bool insufficient = false;
    double kappa = 0.0;
    bool kappa_degenerate = false;
    std::optional<double> icc;  // absent for type_of_abuse and degenerate cases
    bool icc_degenerate = false;
    std::size_t n_tweets = 0;
    std::size_t dropped = 0;
    std::map<std::string, double> per_type;  // type name -> kappa, types row only
};

struct AgreementReport {
    std::vector<AgreementRow> rows;
    std::uint32_t n_target = 3;
    std::uint64_t seed = 0;
    bool weighted = false;
    // The multi-select type variable has no single established kappa; this
    // report macro-averages per-type binary kappas and says so.
    std::string method_note =
        "type_of_abuse kappa is the mean of per-category presence/absence kappas";
};

// weights, when given, trigger the sensitivity-analysis variant; every
// analyzed tweet must then carry a weight.
AgreementReport agreement_report(const std::vector<Annotation>& annotations,
                                 std::uint32_t n_target, std::uint64_t seed,
                                 const WeightAssignment* weights = nullptr);

struct ArtifactMeta;

void save_agreement_report_json(const std::string& path, const AgreementReport& report,
                                const ArtifactMeta* meta = nullptr);
void save_kappa_dump_csv(const std::string& path, const KappaResult& result,
                         const ArtifactMeta* meta = nullptr);

}  // namespace tg
