#pragma once

#include <array>
#include <map>
#include <string>

#include "tg/corpus.hpp"

namespace tg {

// Per-day densities for the wild corpus (volume-weighted) and the study set
// (counted). Conditionals are indexed by the flag value k.
struct WeightTables {
    std::map<Date, double> p_w_d;
    std::map<Date, std::array<double, 2>> p_w_k_given_d;
    std::map<Date, double> p_a_d;
    std::map<Date, std::array<double, 2>> p_a_k_given_d;
    // Which flag-conditional estimator produced p_w_k_given_d. The printed
    // variant normalizes count(k,d) by the k-marginal instead of the day
    // total; it is kept selectable for auditing and its rows do not sum to 1.
    bool flag_conditional_by_flag_marginal = false;
    double covered_mass = 0.0;  // sum of p_w_d over the days the study set reaches
};

struct WeightAssignment {
    struct Entry {
        bool k = false;
        Date day;
        double weight = 0.0;
    };
    std::map<std::string, Entry> entries;  // guid -> unnormalized weight
    double normalizer = 0.0;               // sum of all weights, guid order
};

struct WeightedEstimate {
    double estimate = 0.0;
    double effective_sample_size = 0.0;
    double total_weight = 0.0;
};

// Counts densities on the full corpus and the study set. volumes must cover
// every day of the corpus; the study set must not reach a (k, day) cell that
// is empty in the corpus.
WeightTables estimate_weight_tables(const TweetCollection& corpus,
                                    const TweetCollection& study, const VolumeTable& volumes,
                                    bool flag_conditional_by_flag_marginal = false);

// One weight per study record: target density over sampling density at the
// record's (k, day). Records sharing (k, day) get identical weights.
WeightAssignment importance_weights(const TweetCollection& study, const WeightTables& tables);

// Self-normalized estimate of the mean of `values` under the target
// distribution, normalizing over exactly the evaluated guids. Also reports
// the effective sample size (sum w)^2 / sum w^2 of that subset.
WeightedEstimate weighted_expectation(const std::map<std::string, double>& values,
                                      const WeightAssignment& weights);

struct ArtifactMeta;

void save_weights_csv(const std::string& path, const WeightAssignment& assignment,
                      const ArtifactMeta* meta = nullptr);
WeightAssignment load_weights_csv(const std::string& path);
void save_weight_tables_json(const std::string& path, const WeightTables& tables,
                             const ArtifactMeta* meta = nullptr);

}  // namespace tg
