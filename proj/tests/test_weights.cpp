#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tg/error.hpp"
#include "tg/rng.hpp"
#include "tg/sampling.hpp"
#include "tg/weights.hpp"

using namespace tg;

namespace {

const Date kD1{2017, 3, 1};
const Date kD2{2017, 3, 2};

TweetRecord make_record(std::string guid, Date day, bool k) {
    TweetRecord rec;
    rec.guid = std::move(guid);
    rec.day = day;
    rec.k = k;
    rec.set_tags = {SetTag::C};
    return rec;
}

// Corpus: 10 records per day, 2 flagged on day 1 and 5 on day 2.
// Study set: 4 per day, 2 flagged on day 1 and 3 on day 2.
// Volumes 100/300. Worked by hand, the four cell weights are
// {0.2, 0.8, 1.0, 3.0} and every step is exact in binary floating point.
struct SmallWorld {
    TweetCollection corpus;
    TweetCollection study;
    VolumeTable volumes;

    SmallWorld() {
        int serial = 0;
        auto day_block = [&](Date day, int total, int flagged) {
            for (int i = 0; i < total; ++i) {
                char buf[16];
                std::snprintf(buf, sizeof buf, "c%03d", serial++);
                corpus.push_back(make_record(buf, day, i < flagged));
            }
        };
        day_block(kD1, 10, 2);
        day_block(kD2, 10, 5);
        auto study_block = [&](Date day, int total, int flagged) {
            for (int i = 0; i < total; ++i) {
                char buf[16];
                std::snprintf(buf, sizeof buf, "s%03d", serial++);
                study.push_back(make_record(buf, day, i < flagged));
            }
        };
        study_block(kD1, 4, 2);
        study_block(kD2, 4, 3);
        volumes.entries = {{kD1, 100}, {kD2, 300}};
        volumes.total = 400;
    }
};

}  // namespace

TEST_CASE("density tables count what they claim to count") {
    const SmallWorld w;
    const auto tables = estimate_weight_tables(w.corpus, w.study, w.volumes);

    CHECK(tables.p_w_d.at(kD1) == 0.25);
    CHECK(tables.p_w_d.at(kD2) == 0.75);
    CHECK(tables.p_w_k_given_d.at(kD1)[1] == 0.2);
    CHECK(tables.p_w_k_given_d.at(kD1)[0] == 0.8);
    CHECK(tables.p_w_k_given_d.at(kD2)[1] == 0.5);
    CHECK(tables.p_a_d.at(kD1) == 0.5);
    CHECK(tables.p_a_k_given_d.at(kD1)[1] == 0.5);
    CHECK(tables.p_a_k_given_d.at(kD2)[1] == 0.75);
    CHECK(tables.covered_mass == 1.0);
    CHECK_FALSE(tables.flag_conditional_by_flag_marginal);

    SUBCASE("flag conditionals sum to 1 per day") {
        for (const auto& [day, probs] : tables.p_w_k_given_d) {
            CHECK(probs[0] + probs[1] == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    SUBCASE("covered mass shrinks when the study set misses days") {
        TweetCollection d1_only(w.study.begin(), w.study.begin() + 4);
        const auto partial = estimate_weight_tables(w.corpus, d1_only, w.volumes);
        CHECK(partial.covered_mass == 0.25);
    }
}

TEST_CASE("cell weights match the hand-computed values exactly") {
    const SmallWorld w;
    const auto tables = estimate_weight_tables(w.corpus, w.study, w.volumes);
    const auto weights = importance_weights(w.study, tables);

    REQUIRE(weights.entries.size() == 8);
    for (const auto& [guid, entry] : weights.entries) {
        (void)guid;
        const double expected = entry.day == kD1 ? (entry.k ? 0.2 : 0.8)
                                                 : (entry.k ? 1.0 : 3.0);
        CHECK(entry.weight == expected);  // exact, not approximate
    }

    SUBCASE("records sharing a cell share a weight") {
        std::map<std::pair<bool, std::string>, double> by_cell;
        for (const auto& [guid, entry] : weights.entries) {
            (void)guid;
            const auto key = std::make_pair(entry.k, entry.day.to_string());
            const auto it = by_cell.find(key);
            if (it == by_cell.end()) by_cell.emplace(key, entry.weight);
            else CHECK(it->second == entry.weight);
        }
        CHECK(by_cell.size() == 4);
    }
    SUBCASE("normalizer is the plain sum") {
        CHECK(weights.normalizer ==
              doctest::Approx(2 * 0.2 + 2 * 0.8 + 3 * 1.0 + 1 * 3.0).epsilon(1e-12));
    }
}

TEST_CASE("printed-form flag conditional divides by the flag marginal") {
    const SmallWorld w;
    const auto tables = estimate_weight_tables(w.corpus, w.study, w.volumes, true);
    CHECK(tables.flag_conditional_by_flag_marginal);
    // count(k=1) = 7 and count(k=0) = 13 across the corpus.
    CHECK(tables.p_w_k_given_d.at(kD1)[1] == doctest::Approx(2.0 / 7.0).epsilon(1e-15));
    CHECK(tables.p_w_k_given_d.at(kD1)[0] == doctest::Approx(8.0 / 13.0).epsilon(1e-15));
    CHECK(tables.p_w_k_given_d.at(kD2)[1] == doctest::Approx(5.0 / 7.0).epsilon(1e-15));
    // The rows deliberately do not sum to 1; only the sampling-side tables do.
    CHECK(tables.p_w_k_given_d.at(kD1)[0] + tables.p_w_k_given_d.at(kD1)[1] !=
          doctest::Approx(1.0).epsilon(1e-6));
    // The default estimator is a different distribution, so weights differ.
    const auto printed = importance_weights(w.study, tables);
    const auto standard =
        importance_weights(w.study, estimate_weight_tables(w.corpus, w.study, w.volumes));
    CHECK(printed.entries.begin()->second.weight !=
          standard.entries.begin()->second.weight);
}

TEST_CASE("weight table validation") {
    const SmallWorld w;
    SUBCASE("study cell empty in the corpus") {
        auto study = w.study;
        // No flagged corpus records on a brand new day.
        study.push_back(make_record("x1", Date{2017, 3, 3}, true));
        auto corpus = w.corpus;
        corpus.push_back(make_record("x0", Date{2017, 3, 3}, false));
        auto volumes = w.volumes;
        volumes.entries[Date{2017, 3, 3}] = 50;
        volumes.total += 50;
        CHECK_THROWS_WITH_AS(estimate_weight_tables(corpus, study, volumes),
                             doctest::Contains("empty in the corpus"), Error);
    }
    SUBCASE("study day with no corpus records") {
        auto study = w.study;
        study.push_back(make_record("x1", Date{2017, 3, 4}, false));
        auto volumes = w.volumes;
        volumes.entries[Date{2017, 3, 4}] = 50;
        volumes.total += 50;
        CHECK_THROWS_WITH_AS(estimate_weight_tables(w.corpus, study, volumes),
                             doctest::Contains("no corpus records"), Error);
    }
    SUBCASE("corpus day missing from volumes") {
        auto corpus = w.corpus;
        corpus.push_back(make_record("x0", Date{2017, 3, 5}, false));
        CHECK_THROWS_AS(estimate_weight_tables(corpus, w.study, w.volumes), Error);
    }
    SUBCASE("duplicate study guid") {
        auto study = w.study;
        study.push_back(study.front());
        const auto tables = estimate_weight_tables(w.corpus, w.study, w.volumes);
        CHECK_THROWS_AS(importance_weights(study, tables), Error);
    }
}

TEST_CASE("weighted expectation of a constant is exactly that constant") {
    const SmallWorld w;
    const auto tables = estimate_weight_tables(w.corpus, w.study, w.volumes);
    const auto weights = importance_weights(w.study, tables);

    std::map<std::string, double> ones;
    for (const auto& rec : w.study) ones[rec.guid] = 1.0;
    CHECK(weighted_expectation(ones, weights).estimate == 1.0);  // exact

    // Subsets self-normalize too: constancy survives dropping records.
    ones.erase(ones.begin());
    ones.erase(ones.begin());
    CHECK(weighted_expectation(ones, weights).estimate == 1.0);
}

TEST_CASE("equal power-of-two weights reproduce the unweighted mean") {
    WeightAssignment weights;
    std::map<std::string, double> values;
    const std::vector<double> data = {0.125, 0.5, 0.75, 0.9375};
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::string guid = "g" + std::to_string(i);
        WeightAssignment::Entry entry;
        entry.k = false;
        entry.day = kD1;
        entry.weight = 0.5;
        weights.entries[guid] = entry;
        weights.normalizer += entry.weight;
        values[guid] = data[i];
    }
    const auto est = weighted_expectation(values, weights);
    double mean = 0.0;
    for (double v : data) mean += v;
    mean /= static_cast<double>(data.size());
    CHECK(est.estimate == mean);
    CHECK(est.effective_sample_size == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("effective sample size collapses under concentrated weight") {
    WeightAssignment weights;
    std::map<std::string, double> values;
    for (int i = 0; i < 10; ++i) {
        const std::string guid = "g" + std::to_string(i);
        WeightAssignment::Entry entry;
        entry.day = kD1;
        entry.weight = i == 0 ? 1000.0 : 0.001;
        weights.entries[guid] = entry;
        values[guid] = 1.0;
    }
    const auto est = weighted_expectation(values, weights);
    CHECK(est.effective_sample_size > 1.0);
    CHECK(est.effective_sample_size < 1.01);
}

TEST_CASE("weighted expectation guards its inputs") {
    const SmallWorld w;
    const auto weights =
        importance_weights(w.study, estimate_weight_tables(w.corpus, w.study, w.volumes));
    SUBCASE("value without a weight") {
        std::map<std::string, double> values = {{"nope", 1.0}};
        CHECK_THROWS_WITH_AS(weighted_expectation(values, weights),
                             doctest::Contains("no weight for guid"), Error);
    }
    SUBCASE("empty value set") {
        CHECK_THROWS_AS(weighted_expectation({}, weights), Error);
    }
}

TEST_CASE("weights survive a CSV round trip") {
    const SmallWorld w;
    const auto weights =
        importance_weights(w.study, estimate_weight_tables(w.corpus, w.study, w.volumes));
    const auto dir = std::filesystem::temp_directory_path() / "tg_weight_tests";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "weights.csv").string();
    save_weights_csv(path, weights);
    const auto loaded = load_weights_csv(path);
    REQUIRE(loaded.entries.size() == weights.entries.size());
    for (const auto& [guid, entry] : weights.entries) {
        const auto& other = loaded.entries.at(guid);
        CHECK(other.k == entry.k);
        CHECK(other.day == entry.day);
        CHECK(other.weight == entry.weight);  // shortest-round-trip doubles
    }
    CHECK(loaded.normalizer == weights.normalizer);
}

namespace {

// Synthetic campaign: 20 days of 2500 tweets, 10% carry the latent positive
// label, the prefilter fires on 90% of positives and 5% of negatives. The
// enriched study set is roughly 40% positive, so the unweighted mean is far
// off while the weighted estimator stays consistent.
struct SyntheticCampaign {
    TweetCollection corpus;
    VolumeTable volumes;
    std::map<std::string, double> truth;  // guid -> 0/1 latent label
    double corpus_prevalence = 0.0;

    explicit SyntheticCampaign(std::uint64_t seed) {
        const int days = 20;
        const int per_day = 2500;
        Rng rng(seed, "world");
        int serial = 0;
        int positives = 0;
        for (int d = 0; d < days; ++d) {
            const Date day{2017, 3, 1 + d};
            for (int i = 0; i < per_day; ++i) {
                char buf[16];
                std::snprintf(buf, sizeof buf, "w%06d", serial++);
                const bool y = rng.next_double() < 0.10;
                const bool k = rng.next_double() < (y ? 0.90 : 0.05);
                corpus.push_back(make_record(buf, day, k));
                truth[buf] = y ? 1.0 : 0.0;
                positives += y ? 1 : 0;
            }
            volumes.entries[day] = per_day;
            volumes.total += per_day;
        }
        corpus_prevalence = static_cast<double>(positives) / static_cast<double>(serial);
    }
};

struct RecoveryResult {
    double weighted = 0.0;
    double weighted_se = 0.0;
    double unweighted = 0.0;
};

RecoveryResult run_recovery(const SyntheticCampaign& world, std::uint64_t n_b,
                            std::uint64_t n_f, std::uint64_t seed) {
    const auto b = stratified_daily_sample(world.corpus, world.volumes, n_b, seed);
    const auto f = enrich(world.corpus, b.records, n_f, seed);
    SamplingPlan plan;
    plan.target_size_b = n_b;
    plan.target_size_f = n_f;
    plan.seed = seed;
    const auto study = build_study_set(b, f, plan);

    const auto tables = estimate_weight_tables(world.corpus, study.records, world.volumes);
    const auto weights = importance_weights(study.records, tables);

    std::map<std::string, double> labels;
    double plain_sum = 0.0;
    for (const auto& rec : study.records) {
        labels[rec.guid] = world.truth.at(rec.guid);
        plain_sum += world.truth.at(rec.guid);
    }
    const auto est = weighted_expectation(labels, weights);

    // Self-normalized importance sampling standard error.
    double var_sum = 0.0;
    for (const auto& [guid, value] : labels) {
        const double w = weights.entries.at(guid).weight;
        const double dev = value - est.estimate;
        var_sum += w * w * dev * dev;
    }
    RecoveryResult out;
    out.weighted = est.estimate;
    out.weighted_se = std::sqrt(var_sum) / est.total_weight;
    out.unweighted = plain_sum / static_cast<double>(labels.size());
    return out;
}

}  // namespace

TEST_CASE("enrichment bias is corrected by importance weights") {
    const SyntheticCampaign world(2024);
    CHECK(world.corpus_prevalence == doctest::Approx(0.10).epsilon(0.05));

    const auto r = run_recovery(world, 4700, 5300, 77);

    // The enriched sample is saturated with positives.
    CHECK(r.unweighted > 0.25);
    CHECK(std::fabs(r.unweighted - 0.10) > 0.15);

    // The weighted estimate lands within three standard errors.
    CHECK(std::fabs(r.weighted - world.corpus_prevalence) <= 3.0 * r.weighted_se);
    CHECK(r.weighted_se < 0.02);

    SUBCASE("error bound shrinks with the study set") {
        const auto small = run_recovery(world, 470, 530, 78);
        CHECK(std::fabs(small.weighted - world.corpus_prevalence) <=
              4.0 * small.weighted_se);
        CHECK(small.weighted_se > r.weighted_se);
    }
}
