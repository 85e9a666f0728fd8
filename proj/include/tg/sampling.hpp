#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tg/corpus.hpp"

namespace tg {

// Targets and seed for one campaign draw. beta() is derived from the targets;
// the manifest records the realized value, which can differ under shortfalls.
struct SamplingPlan {
    std::uint64_t target_size_b = 0;
    std::uint64_t target_size_f = 0;
    std::uint64_t seed = 0;

    double beta() const;
};

// Largest-remainder apportionment of n over the volume table's days,
// proportional to each day's volume. Ties go to the earliest day.
// Exact: the returned targets always sum to n.
std::map<Date, std::uint64_t> apportion_largest_remainder(const VolumeTable& volumes,
                                                          std::uint64_t n);

struct DayTake {
    std::uint64_t target = 0;
    std::uint64_t available = 0;
    std::uint64_t taken = 0;  // taken < target marks a shortfall
};

struct StratifiedSample {
    TweetCollection records;             // corpus order, tagged B
    std::map<Date, DayTake> allocation;  // one entry per volume-table day
};

// Day-stratified uniform sampling without replacement. Days with fewer
// records than their target contribute everything they have; the deficit is
// reported, never reallocated, so downstream density estimates stay honest.
StratifiedSample stratified_daily_sample(const TweetCollection& corpus,
                                         const VolumeTable& volumes, std::uint64_t n,
                                         std::uint64_t seed);

// Uniform without-replacement draw of flagged records from corpus minus b.
TweetCollection enrich(const TweetCollection& corpus, const TweetCollection& b,
                       std::uint64_t size, std::uint64_t seed);

struct StudySet {
    TweetCollection records;  // b records then f records, all tagged A
    std::string manifest_json;
};

StudySet build_study_set(const StratifiedSample& b, const TweetCollection& f,
                         const SamplingPlan& plan);

struct ExpertSample {
    TweetCollection records;  // pool order, tagged E
    std::string flag_name;
};

// Draws n_pos members where flag holds and n_neg where it does not.
// The flag is an opaque named predicate chosen by configuration.
ExpertSample expert_subsample(const TweetCollection& pool, const std::string& positive_flag,
                              const std::function<bool(const TweetRecord&)>& flag,
                              std::uint64_t n_pos, std::uint64_t n_neg, std::uint64_t seed);

}  // namespace tg
