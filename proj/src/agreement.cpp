#include "tg/agreement.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include <json.hpp>

#include "tg/corpus_io.hpp"
#include "tg/error.hpp"
#include "tg/format.hpp"
#include "tg/parallel.hpp"
#include "tg/rng.hpp"
#include "tg/weights.hpp"

namespace tg {

using nlohmann::json;

RaterSelection select_raters(const std::vector<Annotation>& annotations,
                             std::uint32_t n_target, std::uint64_t seed) {
    if (n_target < 2) {
        throw Error(ErrorKind::domain, "rater selection target must be at least 2");
    }

    std::map<std::string, std::vector<Annotation>> by_tweet;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& ann : annotations) {
        if (!seen.emplace(ann.tweet_guid, ann.rater_id).second) {
            throw Error(ErrorKind::validation, "rater '" + ann.rater_id +
                                                   "' annotated tweet '" + ann.tweet_guid +
                                                   "' more than once");
        }
        by_tweet[ann.tweet_guid].push_back(ann);
    }

    RaterSelection result;
    for (auto& [guid, group] : by_tweet) {
        if (group.size() < n_target) {
            ++result.dropped_tweets;
            continue;
        }
        if (group.size() == n_target) {
            result.selected.emplace(guid, std::move(group));
            continue;
        }
        Rng rng(seed, "select:" + guid);
        const auto picks = sample_without_replacement(group.size(), n_target, rng);
        std::vector<Annotation> kept;
        kept.reserve(n_target);
        for (std::size_t idx : picks) kept.push_back(std::move(group[idx]));
        result.selected.emplace(guid, std::move(kept));
    }
    return result;
}

std::vector<AnnotationCounts> counts_from_selection(const RaterSelection& selection) {
    std::vector<AnnotationCounts> counts;
    counts.reserve(selection.selected.size());
    for (const auto& [guid, group] : selection.selected) {
        std::vector<ContainAbuse> labels;
        labels.reserve(group.size());
        for (const auto& ann : group) labels.push_back(ann.contain_abuse);
        counts.push_back(tally_counts(guid, labels));
    }
    return counts;
}

namespace {

// Normalized to mean 1 so weighted means keep the unweighted divisors and
// equal weights reproduce the unweighted numbers exactly.
std::vector<double> normalized_weights(const std::vector<double>* weights, std::size_t n) {
    std::vector<double> out(n, 1.0);
    if (!weights) return out;
    if (weights->size() != n) {
        throw Error(ErrorKind::domain, "weight vector length " +
                                           std::to_string(weights->size()) +
                                           " does not match row count " + std::to_string(n));
    }
    double total = 0.0;
    for (double w : *weights) {
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw Error(ErrorKind::domain, "row weights must be positive and finite");
        }
        total += w;
    }
    const double scale = static_cast<double>(n) / total;
    for (std::size_t i = 0; i < n; ++i) out[i] = (*weights)[i] * scale;
    return out;
}

}  // namespace

KappaResult fleiss_kappa_rows(const std::vector<std::string>& ids,
                              const std::vector<std::vector<std::uint32_t>>& rows,
                              const std::vector<double>* weights) {
    if (rows.empty()) {
        throw Error(ErrorKind::domain, "kappa over an empty tweet set");
    }
    if (ids.size() != rows.size()) {
        throw Error(ErrorKind::domain, "id list does not match row count");
    }
    const std::size_t n_classes = rows[0].size();
    std::uint64_t n_raters = 0;
    for (std::uint32_t a : rows[0]) n_raters += a;
    if (n_raters < 2) {
        throw Error(ErrorKind::domain, "kappa needs at least 2 raters per tweet");
    }
    for (const auto& row : rows) {
        if (row.size() != n_classes) {
            throw Error(ErrorKind::domain, "count rows have mixed class counts");
        }
        std::uint64_t total = 0;
        for (std::uint32_t a : row) total += a;
        if (total != n_raters) {
            throw Error(ErrorKind::domain, "count rows have mixed rater counts");
        }
    }

    const std::size_t n_tweets = rows.size();
    const auto w = normalized_weights(weights, n_tweets);

    KappaResult result;
    result.n_tweets = n_tweets;
    result.n_raters = static_cast<std::uint32_t>(n_raters);
    result.per_class_chance.assign(n_classes, 0.0);
    for (std::size_t t = 0; t < n_tweets; ++t) {
        for (std::size_t c = 0; c < n_classes; ++c) {
            result.per_class_chance[c] += w[t] * static_cast<double>(rows[t][c]);
        }
    }
    const double pooled_total = static_cast<double>(n_tweets) * static_cast<double>(n_raters);
    for (double& p : result.per_class_chance) p /= pooled_total;
    for (double p : result.per_class_chance) result.chance_agreement += p * p;

    if (1.0 - result.chance_agreement < 1e-12) {
        // Every annotation in one class: agreement is trivially perfect but
        // the chance correction divides by zero. Marker convention: 1.0.
        result.degenerate = true;
        result.kappa_overall = 1.0;
        result.chance_agreement = 1.0;
        result.per_class.assign(n_classes, 0.0);
        for (std::size_t c = 0; c < n_classes; ++c) {
            if (result.per_class_chance[c] > 0.5) result.per_class[c] = 1.0;
        }
        for (const auto& id : ids) result.per_tweet[id] = 1.0;
        return result;
    }

    const double denom = 1.0 - result.chance_agreement;
    const double pair_count = static_cast<double>(n_raters) * static_cast<double>(n_raters - 1);

    std::vector<double> per_tweet(n_tweets, 0.0);
    std::vector<std::vector<double>> per_tweet_class(n_tweets);
    parallel_for(n_tweets, [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            std::vector<double> kc(n_classes, 0.0);
            double r_sum = 0.0;
            for (std::size_t c = 0; c < n_classes; ++c) {
                const auto a = static_cast<double>(rows[t][c]);
                const double r_c = a * (a - 1.0) / pair_count;
                const double p = result.per_class_chance[c];
                kc[c] = (r_c - p * p) / denom;
                r_sum += r_c;
            }
            // Single ratio, so a consensus row scores exactly 1: its raw
            // agreement sum is exactly 1 and numerator equals denominator.
            per_tweet[t] = (r_sum - result.chance_agreement) / denom;
            per_tweet_class[t] = std::move(kc);
        }
    });

    result.per_class.assign(n_classes, 0.0);
    double mean = 0.0;
    for (std::size_t t = 0; t < n_tweets; ++t) {
        mean += w[t] * per_tweet[t];
        for (std::size_t c = 0; c < n_classes; ++c) {
            result.per_class[c] += w[t] * per_tweet_class[t][c];
        }
        result.per_tweet[ids[t]] = per_tweet[t];
    }
    result.kappa_overall = mean / static_cast<double>(n_tweets);
    for (double& v : result.per_class) v /= static_cast<double>(n_tweets);
    return result;
}

KappaResult fleiss_kappa(const std::vector<AnnotationCounts>& counts,
                         const std::vector<double>* weights) {
    std::vector<std::string> ids;
    std::vector<std::vector<std::uint32_t>> rows;
    ids.reserve(counts.size());
    rows.reserve(counts.size());
    for (const auto& c : counts) {
        ids.push_back(c.tweet_guid);
        rows.push_back({c.a[0], c.a[1], c.a[2]});
    }
    return fleiss_kappa_rows(ids, rows, weights);
}

IccResult icc_core(const std::vector<std::vector<double>>& rows,
                   const std::vector<double>* weights) {
    if (rows.size() < 2) {
        throw Error(ErrorKind::domain, "icc needs at least 2 tweets");
    }
    const std::size_t n_raters = rows[0].size();
    if (n_raters < 2) {
        throw Error(ErrorKind::domain, "icc needs at least 2 raters per tweet");
    }
    for (const auto& row : rows) {
        if (row.size() != n_raters) {
            throw Error(ErrorKind::domain, "icc rows are ragged");
        }
        for (double v : row) {
            if (!std::isfinite(v)) {
                throw Error(ErrorKind::domain, "icc values must be finite");
            }
        }
    }

    const std::size_t n_tweets = rows.size();
    const auto w = normalized_weights(weights, n_tweets);

    IccResult result;
    result.n_raters = static_cast<std::uint32_t>(n_raters);
    result.n_tweets = n_tweets;
    result.per_tweet_means.assign(n_tweets, 0.0);

    std::vector<double> within(n_tweets, 0.0);
    parallel_for(n_tweets, [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            double mu = 0.0;
            for (double v : rows[t]) mu += v;
            mu /= static_cast<double>(n_raters);
            double ss = 0.0;
            for (double v : rows[t]) ss += (v - mu) * (v - mu);
            result.per_tweet_means[t] = mu;
            within[t] = ss / static_cast<double>(n_raters - 1);
        }
    });

    for (std::size_t t = 0; t < n_tweets; ++t) {
        result.v_w += w[t] * within[t];
        result.grand_mean += w[t] * result.per_tweet_means[t];
    }
    result.v_w /= static_cast<double>(n_tweets);
    result.grand_mean /= static_cast<double>(n_tweets);

    for (std::size_t t = 0; t < n_tweets; ++t) {
        const double d = result.per_tweet_means[t] - result.grand_mean;
        result.v_b += w[t] * d * d;
    }
    result.v_b *= static_cast<double>(n_raters) / static_cast<double>(n_tweets - 1);

    const double denom = result.v_b + static_cast<double>(n_raters - 1) * result.v_w;
    if (denom == 0.0) {
        result.degenerate = true;
        result.icc = std::numeric_limits<double>::quiet_NaN();
    } else {
        result.icc = (result.v_b - result.v_w) / denom;
    }
    return result;
}

IccResult icc_1k(const std::vector<std::vector<int>>& rows,
                 const std::vector<double>* weights) {
    std::vector<std::vector<double>> real_rows;
    real_rows.reserve(rows.size());
    for (const auto& row : rows) {
        std::vector<double> out;
        out.reserve(row.size());
        for (int v : row) {
            if (v < 0 || v > 2) {
                throw Error(ErrorKind::domain,
                            "ordinal value " + std::to_string(v) + " outside {0,1,2}");
            }
            out.push_back(static_cast<double>(v));
        }
        real_rows.push_back(std::move(out));
    }
    return icc_core(real_rows, weights);
}

KappaResult per_type_kappa(const std::map<std::string, std::vector<Annotation>>& selected,
                           AbuseType type) {
    std::vector<std::string> ids;
    std::vector<std::vector<std::uint32_t>> rows;
    ids.reserve(selected.size());
    rows.reserve(selected.size());
    for (const auto& [guid, group] : selected) {
        std::uint32_t marked = 0;
        for (const auto& ann : group) {
            if (ann.contain_abuse == ContainAbuse::no) {
                throw Error(ErrorKind::domain,
                            "per-type kappa input contains a class-No annotation for tweet '" +
                                guid + "'");
            }
            if (std::find(ann.types.begin(), ann.types.end(), type) != ann.types.end()) {
                ++marked;
            }
        }
        ids.push_back(guid);
        rows.push_back({static_cast<std::uint32_t>(group.size()) - marked, marked});
    }
    return fleiss_kappa_rows(ids, rows);
}

PerTypeMacro per_type_macro(const std::map<std::string, std::vector<Annotation>>& selected) {
    PerTypeMacro macro;
    double total = 0.0;
    for (int i = 0; i < kNumAbuseTypes; ++i) {
        const auto type = static_cast<AbuseType>(i);
        KappaResult r = per_type_kappa(selected, type);
        total += r.kappa_overall;
        macro.per_type.emplace(type, std::move(r));
    }
    macro.macro_kappa = total / static_cast<double>(kNumAbuseTypes);
    return macro;
}

namespace {

std::vector<double> tweet_weights(const std::map<std::string, std::vector<Annotation>>& selected,
                                  const WeightAssignment& assignment) {
    std::vector<double> w;
    w.reserve(selected.size());
    for (const auto& [guid, group] : selected) {
        (void)group;
        const auto it = assignment.entries.find(guid);
        if (it == assignment.entries.end()) {
            throw Error(ErrorKind::domain, "no weight for tweet '" + guid + "'");
        }
        w.push_back(it->second.weight);
    }
    return w;
}

AgreementRow contain_abuse_row(Cohort cohort, const std::vector<Annotation>& annotations,
                               std::uint32_t n_target, std::uint64_t seed,
                               const WeightAssignment* weights) {
    AgreementRow row;
    row.cohort = cohort;
    row.variable = "contain_abuse";

    const auto selection = select_raters(annotations, n_target, seed);
    row.dropped = selection.dropped_tweets;
    if (selection.selected.size() < 2) {
        row.insufficient = true;
        return row;
    }
    row.n_tweets = selection.selected.size();

    std::vector<double> w;
    const std::vector<double>* w_ptr = nullptr;
    if (weights) {
        w = tweet_weights(selection.selected, *weights);
        w_ptr = &w;
    }

    const auto counts = counts_from_selection(selection);
    const KappaResult kappa = fleiss_kappa(counts, w_ptr);
    row.kappa = kappa.kappa_overall;
    row.kappa_degenerate = kappa.degenerate;

    std::vector<std::vector<int>> matrix;
    matrix.reserve(selection.selected.size());
    for (const auto& [guid, group] : selection.selected) {
        (void)guid;
        std::vector<int> values;
        values.reserve(group.size());
        for (const auto& ann : group) values.push_back(static_cast<int>(ann.contain_abuse));
        matrix.push_back(std::move(values));
    }
    const IccResult icc = icc_1k(matrix, w_ptr);
    row.icc_degenerate = icc.degenerate;
    if (!icc.degenerate) row.icc = icc.icc;
    return row;
}

AgreementRow type_row(Cohort cohort, const std::vector<Annotation>& annotations,
                      std::uint32_t n_target, std::uint64_t seed) {
    AgreementRow row;
    row.cohort = cohort;
    row.variable = "type_of_abuse";

    std::vector<Annotation> non_no;
    for (const auto& ann : annotations) {
        if (ann.contain_abuse != ContainAbuse::no) non_no.push_back(ann);
    }
    const auto selection = select_raters(non_no, n_target, seed);
    row.dropped = selection.dropped_tweets;
    if (selection.selected.size() < 2) {
        row.insufficient = true;
        return row;
    }
    row.n_tweets = selection.selected.size();

    const PerTypeMacro macro = per_type_macro(selection.selected);
    row.kappa = macro.macro_kappa;
    for (const auto& [type, result] : macro.per_type) {
        row.per_type[abuse_type_name(type)] = result.kappa_overall;
    }
    return row;
}

}  // namespace

AgreementReport agreement_report(const std::vector<Annotation>& annotations,
                                 std::uint32_t n_target, std::uint64_t seed,
                                 const WeightAssignment* weights) {
    AgreementReport report;
    report.n_target = n_target;
    report.seed = seed;
    report.weighted = weights != nullptr;

    for (Cohort cohort : {Cohort::crowd, Cohort::expert}) {
        std::vector<Annotation> subset;
        for (const auto& ann : annotations) {
            if (ann.cohort == cohort) subset.push_back(ann);
        }
        report.rows.push_back(contain_abuse_row(cohort, subset, n_target, seed, weights));
        report.rows.push_back(type_row(cohort, subset, n_target, seed));
    }
    return report;
}

void save_agreement_report_json(const std::string& path, const AgreementReport& report,
                                const ArtifactMeta* meta) {
    json j;
    if (meta) {
        j["command"] = meta->command;
        j["config_hash"] = meta->config_hash;
    }
    j["method_note"] = report.method_note;
    j["n_target"] = report.n_target;
    j["seed"] = report.seed;
    j["weighted"] = report.weighted;
    json rows = json::array();
    for (const auto& row : report.rows) {
        json r;
        r["cohort"] = cohort_name(row.cohort);
        r["variable"] = row.variable;
        r["insufficient"] = row.insufficient;
        if (row.insufficient) {
            r["kappa"] = nullptr;
            r["icc"] = nullptr;
        } else {
            r["kappa"] = row.kappa;
            r["kappa_degenerate"] = row.kappa_degenerate;
            if (row.variable == "contain_abuse") {
                r["icc"] = row.icc ? json(*row.icc) : json(nullptr);
                r["icc_degenerate"] = row.icc_degenerate;
            } else {
                r["icc"] = nullptr;
                r["per_type"] = row.per_type;
            }
        }
        r["n_tweets"] = row.n_tweets;
        r["dropped"] = row.dropped;
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
}

void save_kappa_dump_csv(const std::string& path, const KappaResult& result,
                         const ArtifactMeta* meta) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
    if (meta) out << meta->to_comment() << "\n";
    out << "guid,kappa_t\n";
    for (const auto& [guid, kappa_t] : result.per_tweet) {
        out << csv_field(guid) << "," << format_double(kappa_t) << "\n";
    }
}

}  // namespace tg
