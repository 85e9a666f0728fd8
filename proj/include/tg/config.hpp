#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tg/annotation.hpp"
#include "tg/corpus.hpp"
#include "tg/date.hpp"
#include "tg/evaluation.hpp"

namespace tg {

struct PathsConfig {
    std::string tweets;
    std::string volumes;
    std::string annotations;
    std::string scores;  // CSV path, or http(s) endpoint to fetch from
    std::string roster;
    std::string out_dir = "out";
};

struct SamplingConfig {
    std::uint64_t target_size_b = 0;
    std::uint64_t target_size_f = 0;
    std::uint64_t expert_pos = 0;
    std::uint64_t expert_neg = 0;
    std::string expert_flag = "k";  // named predicate for the expert split
};

struct ClassifierConfig {
    std::string name = "classifier";
    ScoreKind kind = ScoreKind::probability;
    std::uint64_t batch_size = 500;  // per request when scores is an endpoint
};

struct SimulateConfig {
    std::array<double, 3> p = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    std::uint64_t n_tweets = 1000;
    std::uint32_t n_raters = 3;
};

struct CompatFlags {
    // Printed-form flag conditional: normalizes count(k,d) by the k-marginal
    // instead of the day total. Audit aid, not the supported estimator.
    bool eq19_as_printed = false;
    // Legacy binary majority: three-class plurality first, conflate after.
    bool vote_then_conflate = false;
    // Importance-weight the agreement statistics (sensitivity analysis).
    bool weighted_agreement = false;
};

struct RunConfig {
    PathsConfig paths;
    DateRange window;
    std::optional<std::uint64_t> seed;
    SamplingConfig sampling;
    std::uint32_t n_target = 3;
    Conflation conflation = Conflation::non_no_positive;
    double jitter = 0.02;
    std::vector<std::string> medium_categories;  // defaults when absent
    CompatFlags compat;
    ClassifierConfig classifier;
    SimulateConfig simulate;
    Cohort reference_cohort = Cohort::crowd;  // which PR curve becomes the CSV/SVG
};

// Strict parse: unknown keys anywhere are an error.
RunConfig load_run_config(const std::string& path);

// Canonical JSON of every effective field except the seed; the seed is
// stamped on artifacts separately so reruns under a new seed share a hash.
std::string canonical_config_json(const RunConfig& config);

// 16 hex chars of FNV-1a over canonical_config_json.
std::string config_hash(const RunConfig& config);

}  // namespace tg
