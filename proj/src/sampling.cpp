#include "tg/sampling.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "tg/error.hpp"
#include "tg/rng.hpp"

namespace tg {

using nlohmann::json;

double SamplingPlan::beta() const {
    const std::uint64_t total = target_size_b + target_size_f;
    if (total == 0) return 0.0;
    return static_cast<double>(target_size_f) / static_cast<double>(total);
}

std::map<Date, std::uint64_t> apportion_largest_remainder(const VolumeTable& volumes,
                                                          std::uint64_t n) {
    std::map<Date, std::uint64_t> targets;
    if (n == 0) {
        for (const auto& [day, count] : volumes.entries) {
            (void)count;
            targets[day] = 0;
        }
        return targets;
    }
    if (volumes.total == 0) {
        throw Error(ErrorKind::domain, "cannot apportion over a volume table that sums to zero");
    }

    // Integer arithmetic throughout: the remainder comparison is exact, so no
    // floating-point rounding can flip an allocation.
    std::uint64_t assigned = 0;
    std::vector<std::pair<unsigned __int128, Date>> remainders;
    for (const auto& [day, count] : volumes.entries) {
        const unsigned __int128 product =
            static_cast<unsigned __int128>(n) * static_cast<unsigned __int128>(count);
        const auto quota = static_cast<std::uint64_t>(product / volumes.total);
        targets[day] = quota;
        assigned += quota;
        remainders.emplace_back(product % volumes.total, day);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::uint64_t i = 0; i < n - assigned; ++i) {
        ++targets[remainders[i].second];
    }
    return targets;
}

StratifiedSample stratified_daily_sample(const TweetCollection& corpus,
                                         const VolumeTable& volumes, std::uint64_t n,
                                         std::uint64_t seed) {
    if (n > corpus.size()) {
        throw Error(ErrorKind::domain, "target size " + std::to_string(n) +
                                           " exceeds corpus size " +
                                           std::to_string(corpus.size()));
    }

    std::map<Date, std::vector<std::size_t>> by_day;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (!volumes.entries.count(corpus[i].day)) {
            throw Error(ErrorKind::domain, "corpus day " + corpus[i].day.to_string() +
                                               " missing from the volume table");
        }
        by_day[corpus[i].day].push_back(i);
    }

    const auto targets = apportion_largest_remainder(volumes, n);

    StratifiedSample result;
    std::vector<std::size_t> chosen;
    for (const auto& [day, target] : targets) {
        DayTake take;
        take.target = target;
        const auto it = by_day.find(day);
        const std::vector<std::size_t>* pool = it == by_day.end() ? nullptr : &it->second;
        take.available = pool ? pool->size() : 0;
        if (take.available <= target) {
            take.taken = take.available;
            if (pool) chosen.insert(chosen.end(), pool->begin(), pool->end());
        } else {
            take.taken = target;
            // One generator stream per day, derived from (seed, day), so the
            // draw is independent of evaluation order.
            Rng rng(seed, "stratified:" + day.to_string());
            for (std::size_t local :
                 sample_without_replacement(take.available, target, rng)) {
                chosen.push_back((*pool)[local]);
            }
        }
        result.allocation[day] = take;
    }

    std::sort(chosen.begin(), chosen.end());
    result.records.reserve(chosen.size());
    for (std::size_t idx : chosen) {
        TweetRecord rec = corpus[idx];
        rec.set_tags.insert(SetTag::B);
        check_record_tags(rec);
        result.records.push_back(std::move(rec));
    }
    return result;
}

TweetCollection enrich(const TweetCollection& corpus, const TweetCollection& b,
                       std::uint64_t size, std::uint64_t seed) {
    std::unordered_set<std::string> in_b;
    for (const auto& rec : b) in_b.insert(rec.guid);

    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (corpus[i].k && !in_b.count(corpus[i].guid)) candidates.push_back(i);
    }
    if (size > candidates.size()) {
        throw Error(ErrorKind::domain,
                    "enrichment needs " + std::to_string(size) + " flagged records but only " +
                        std::to_string(candidates.size()) + " remain outside the base sample");
    }

    Rng rng(seed, "enrich");
    const auto picks = sample_without_replacement(candidates.size(), size, rng);

    TweetCollection f;
    f.reserve(picks.size());
    for (std::size_t local : picks) {
        TweetRecord rec = corpus[candidates[local]];
        rec.set_tags.insert(SetTag::F);
        check_record_tags(rec);
        f.push_back(std::move(rec));
    }
    return f;
}

StudySet build_study_set(const StratifiedSample& b, const TweetCollection& f,
                         const SamplingPlan& plan) {
    std::unordered_set<std::string> in_b;
    for (const auto& rec : b.records) in_b.insert(rec.guid);
    for (const auto& rec : f) {
        if (in_b.count(rec.guid)) {
            throw Error(ErrorKind::domain,
                        "guid '" + rec.guid + "' appears in both the base and enriched samples");
        }
    }

    StudySet study;
    study.records.reserve(b.records.size() + f.size());
    std::map<Date, std::uint64_t> f_per_day;
    for (const auto& rec : b.records) {
        TweetRecord copy = rec;
        copy.set_tags.insert(SetTag::A);
        study.records.push_back(std::move(copy));
    }
    for (const auto& rec : f) {
        TweetRecord copy = rec;
        copy.set_tags.insert(SetTag::A);
        ++f_per_day[copy.day];
        study.records.push_back(std::move(copy));
    }

    const auto size_b = static_cast<std::uint64_t>(b.records.size());
    const auto size_f = static_cast<std::uint64_t>(f.size());
    const std::uint64_t size_a = size_b + size_f;
    const double beta =
        size_a == 0 ? 0.0 : static_cast<double>(size_f) / static_cast<double>(size_a);

    json manifest;
    manifest["sizes"] = {{"a", size_a}, {"b", size_b}, {"f", size_f}};
    manifest["beta"] = beta;
    manifest["seed"] = plan.seed;
    json allocation = json::object();
    json shortfalls = json::array();
    for (const auto& [day, take] : b.allocation) {
        const auto f_it = f_per_day.find(day);
        allocation[day.to_string()] = {
            {"available", take.available},
            {"f", f_it == f_per_day.end() ? 0 : f_it->second},
            {"target", take.target},
            {"taken", take.taken},
        };
        if (take.taken < take.target) {
            shortfalls.push_back({{"available", take.available},
                                  {"day", day.to_string()},
                                  {"requested", take.target}});
        }
    }
    manifest["allocation"] = std::move(allocation);
    manifest["shortfalls"] = std::move(shortfalls);
    study.manifest_json = manifest.dump(2) + "\n";
    return study;
}

ExpertSample expert_subsample(const TweetCollection& pool, const std::string& positive_flag,
                              const std::function<bool(const TweetRecord&)>& flag,
                              std::uint64_t n_pos, std::uint64_t n_neg, std::uint64_t seed) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        (flag(pool[i]) ? pos : neg).push_back(i);
    }
    if (n_pos > pos.size()) {
        throw Error(ErrorKind::domain, "expert subsample needs " + std::to_string(n_pos) +
                                           " '" + positive_flag + "' members but the pool has " +
                                           std::to_string(pos.size()));
    }
    if (n_neg > neg.size()) {
        throw Error(ErrorKind::domain, "expert subsample needs " + std::to_string(n_neg) +
                                           " non-'" + positive_flag +
                                           "' members but the pool has " +
                                           std::to_string(neg.size()));
    }

    Rng pos_rng(seed, "expert:pos");
    Rng neg_rng(seed, "expert:neg");
    std::vector<std::size_t> chosen;
    for (std::size_t local : sample_without_replacement(pos.size(), n_pos, pos_rng)) {
        chosen.push_back(pos[local]);
    }
    for (std::size_t local : sample_without_replacement(neg.size(), n_neg, neg_rng)) {
        chosen.push_back(neg[local]);
    }
    std::sort(chosen.begin(), chosen.end());

    ExpertSample expert;
    expert.flag_name = positive_flag;
    expert.records.reserve(chosen.size());
    for (std::size_t idx : chosen) {
        TweetRecord rec = pool[idx];
        rec.set_tags.insert(SetTag::E);
        check_record_tags(rec);
        expert.records.push_back(std::move(rec));
    }
    return expert;
}

}  // namespace tg
