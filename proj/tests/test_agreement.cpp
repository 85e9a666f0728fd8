#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tg/agreement.hpp"
#include "tg/error.hpp"
#include "tg/rng.hpp"
#include "tg/simplex.hpp"
#include "tg/weights.hpp"

#include "oracles.hpp"

using namespace tg;

namespace {

std::vector<std::string> ids_for(std::size_t n) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("t" + std::to_string(i));
    return ids;
}

Annotation ann(std::string guid, std::string rater, ContainAbuse answer,
               Cohort cohort = Cohort::crowd) {
    Annotation a;
    a.tweet_guid = std::move(guid);
    a.rater_id = std::move(rater);
    a.cohort = cohort;
    a.contain_abuse = answer;
    if (answer != ContainAbuse::no) a.types = {AbuseType::other};
    return a;
}

}  // namespace

TEST_CASE("kappa on the worked four-tweet example") {
    // Counts {(3,0,0), (0,3,0), (1,1,1), (2,1,0)}. Worked by hand with exact
    // rationals: pooled p = (1/2, 5/12, 1/12), chance agreement =
    // (36 + 25 + 1)/144 = 31/72, kappa = (7/12 - 31/72)/(41/72) = 11/41,
    // per-tweet contributions {1, 1, -31/41, -7/41}.
    const std::vector<std::vector<std::uint32_t>> rows = {
        {3, 0, 0}, {0, 3, 0}, {1, 1, 1}, {2, 1, 0}};
    const auto result = fleiss_kappa_rows(ids_for(4), rows);

    CHECK(result.kappa_overall == doctest::Approx(11.0 / 41.0).epsilon(1e-9));
    CHECK(std::fabs(result.kappa_overall - 0.268293) < 1e-6);
    CHECK(result.n_tweets == 4);
    CHECK(result.n_raters == 3);
    CHECK_FALSE(result.degenerate);

    CHECK(result.per_class_chance[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(result.per_class_chance[1] == doctest::Approx(5.0 / 12.0).epsilon(1e-12));
    CHECK(result.per_class_chance[2] == doctest::Approx(1.0 / 12.0).epsilon(1e-12));
    CHECK(result.chance_agreement == doctest::Approx(31.0 / 72.0).epsilon(1e-12));

    CHECK(result.per_tweet.at("t0") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(result.per_tweet.at("t1") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(result.per_tweet.at("t2") == doctest::Approx(-31.0 / 41.0).epsilon(1e-9));
    CHECK(result.per_tweet.at("t3") == doctest::Approx(-7.0 / 41.0).epsilon(1e-9));

    SUBCASE("per-class contributions sum to each tweet's kappa on average") {
        double sum = 0.0;
        for (double v : result.per_class) sum += v;
        CHECK(sum == doctest::Approx(result.kappa_overall).epsilon(1e-9));
    }
    SUBCASE("matches the aggregate-formula reference") {
        CHECK(result.kappa_overall ==
              doctest::Approx(oracle::fleiss_kappa_aggregate(rows)).epsilon(1e-12));
    }
}

TEST_CASE("per-tweet decomposition agrees with the aggregate formula") {
    // The mean-of-per-tweet-kappas route must equal the classic pooled
    // ratio on any fixed-N input. Random instances, both routes.
    Rng rng(515253);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n_tweets = 2 + rng.below(30);
        const std::uint32_t n = 2 + static_cast<std::uint32_t>(rng.below(5));
        std::vector<std::vector<std::uint32_t>> rows;
        for (std::size_t t = 0; t < n_tweets; ++t) {
            std::vector<std::uint32_t> row(3, 0);
            for (std::uint32_t r = 0; r < n; ++r) ++row[rng.below(3)];
            rows.push_back(std::move(row));
        }
        const auto result = fleiss_kappa_rows(ids_for(n_tweets), rows);
        if (result.degenerate) {
            CHECK(result.kappa_overall == 1.0);
            continue;
        }
        CHECK(result.kappa_overall ==
              doctest::Approx(oracle::fleiss_kappa_aggregate(rows)).epsilon(1e-10));
    }
}

TEST_CASE("kappa degenerates to the documented marker") {
    const std::vector<std::vector<std::uint32_t>> rows = {{3, 0, 0}, {3, 0, 0}};
    const auto result = fleiss_kappa_rows(ids_for(2), rows);
    CHECK(result.degenerate);
    CHECK(result.kappa_overall == 1.0);
    for (const auto& [id, k] : result.per_tweet) {
        (void)id;
        CHECK(k == 1.0);
    }
    CHECK(result.per_class[0] == 1.0);
}

TEST_CASE("kappa input validation") {
    CHECK_THROWS_AS(fleiss_kappa_rows({}, {}), Error);
    // Mixed rater counts.
    CHECK_THROWS_AS(fleiss_kappa_rows(ids_for(2), {{3, 0, 0}, {2, 0, 0}}), Error);
    // One rater carries no agreement information.
    CHECK_THROWS_AS(fleiss_kappa_rows(ids_for(2), {{1, 0, 0}, {0, 1, 0}}), Error);
    // Ragged class counts.
    CHECK_THROWS_AS(fleiss_kappa_rows(ids_for(2), {{3, 0, 0}, {0, 3}}), Error);
}

TEST_CASE("kappa is invariant to class relabeling") {
    const std::vector<std::vector<std::uint32_t>> rows = {
        {3, 0, 0}, {0, 3, 0}, {1, 1, 1}, {2, 1, 0}, {0, 2, 1}};
    const auto base = fleiss_kappa_rows(ids_for(5), rows);
    // Swap classes 0 and 2 everywhere.
    std::vector<std::vector<std::uint32_t>> swapped;
    for (const auto& row : rows) swapped.push_back({row[2], row[1], row[0]});
    const auto perm = fleiss_kappa_rows(ids_for(5), swapped);
    CHECK(perm.kappa_overall == doctest::Approx(base.kappa_overall).epsilon(1e-12));
    CHECK(perm.chance_agreement == doctest::Approx(base.chance_agreement).epsilon(1e-12));
}

TEST_CASE("kappa rises monotonically from chance to consensus") {
    // Mix a consensus block with a spread block at increasing consensus
    // fractions; kappa must increase with each step.
    const std::size_t total = 80;
    double previous = -2.0;
    for (const double fraction : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const auto n_consensus = static_cast<std::size_t>(fraction * total);
        std::vector<std::vector<std::uint32_t>> rows;
        for (std::size_t i = 0; i < total; ++i) {
            if (i < n_consensus) rows.push_back({i % 2 == 0 ? 3u : 0u, i % 2 == 0 ? 0u : 3u, 0});
            else rows.push_back({1, 1, 1});
        }
        const auto result = fleiss_kappa_rows(ids_for(total), rows);
        CHECK(result.kappa_overall > previous);
        previous = result.kappa_overall;
    }
    CHECK(previous == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("chance-level annotations score near zero") {
    // 10^4 tweets, 3 raters drawing from p = (0.5, 0.3, 0.2).
    const auto counts = simulate_chance({0.5, 0.3, 0.2}, 10000, 3, 99);
    std::vector<std::vector<int>> ordinal;
    for (const auto& c : counts) {
        std::vector<int> row;
        for (int cls = 0; cls < 3; ++cls) {
            for (std::uint32_t i = 0; i < c.a[static_cast<std::size_t>(cls)]; ++i) {
                row.push_back(cls);
            }
        }
        ordinal.push_back(std::move(row));
    }
    const auto kappa = fleiss_kappa(counts);
    CHECK(std::fabs(kappa.kappa_overall) < 0.03);
    const auto icc = icc_1k(ordinal);
    CHECK(std::fabs(icc.icc) < 0.03);
}

TEST_CASE("perfect agreement scores exactly one") {
    const auto counts = simulate_perfect({0.5, 0.3, 0.2}, 500, 3, 7);
    std::vector<std::vector<int>> ordinal;
    std::set<int> classes_seen;
    for (const auto& c : counts) {
        for (int cls = 0; cls < 3; ++cls) {
            if (c.a[static_cast<std::size_t>(cls)] == 3) {
                ordinal.push_back({cls, cls, cls});
                classes_seen.insert(cls);
            }
        }
    }
    REQUIRE(classes_seen.size() == 3);  // non-degenerate draw
    const auto kappa = fleiss_kappa(counts);
    CHECK(kappa.kappa_overall == 1.0);
    CHECK_FALSE(kappa.degenerate);
    const auto icc = icc_1k(ordinal);
    CHECK(icc.icc == 1.0);
    CHECK_FALSE(icc.degenerate);
}

TEST_CASE("icc on the worked two-tweet examples") {
    SUBCASE("perfect within-tweet disagreement") {
        const auto r = icc_1k({{0, 1, 2}, {0, 1, 2}});
        CHECK(r.icc == -0.5);  // exact
        CHECK(r.v_b == 0.0);
        CHECK_FALSE(r.degenerate);
    }
    SUBCASE("perfect between-tweet separation") {
        const auto r = icc_1k({{0, 0, 0}, {2, 2, 2}});
        CHECK(r.icc == 1.0);  // exact
        CHECK(r.v_w == 0.0);
        CHECK_FALSE(r.degenerate);
    }
    SUBCASE("no variance at all is degenerate") {
        const auto r = icc_1k({{1, 1, 1}, {1, 1, 1}});
        CHECK(r.degenerate);
        CHECK(std::isnan(r.icc));
    }
}

TEST_CASE("icc matches the anova-identity reference on random input") {
    Rng rng(606162);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n_tweets = 2 + rng.below(40);
        const std::size_t n = 2 + rng.below(4);
        std::vector<std::vector<int>> rows;
        std::vector<std::vector<double>> real_rows;
        for (std::size_t t = 0; t < n_tweets; ++t) {
            std::vector<int> row;
            std::vector<double> real_row;
            for (std::size_t r = 0; r < n; ++r) {
                const int v = static_cast<int>(rng.below(3));
                row.push_back(v);
                real_row.push_back(v);
            }
            rows.push_back(std::move(row));
            real_rows.push_back(std::move(real_row));
        }
        const auto mine = icc_1k(rows);
        const auto ref = oracle::icc_1k_anova(real_rows);
        REQUIRE(mine.degenerate == ref.degenerate);
        if (!ref.degenerate) {
            CHECK(mine.icc == doctest::Approx(ref.icc).epsilon(1e-10));
        }
    }
}

TEST_CASE("icc core is invariant to affine transformations") {
    const std::vector<std::vector<double>> rows = {
        {0, 1, 2}, {2, 2, 1}, {0, 0, 1}, {1, 2, 2}, {0, 1, 1}};
    const auto base = icc_core(rows);
    std::vector<std::vector<double>> scaled;
    for (const auto& row : rows) {
        std::vector<double> s;
        for (double v : row) s.push_back(4.0 * v - 7.0);
        scaled.push_back(std::move(s));
    }
    const auto moved = icc_core(scaled);
    CHECK(moved.icc == doctest::Approx(base.icc).epsilon(1e-12));

    SUBCASE("ordinal wrapper rejects out-of-range values") {
        CHECK_THROWS_AS(icc_1k({{0, 1, 3}, {0, 1, 2}}), Error);
        CHECK_THROWS_AS(icc_1k({{0, 1, -1}, {0, 1, 2}}), Error);
    }
}

TEST_CASE("rater selection drops, subsamples, and stays per-tweet stable") {
    std::vector<Annotation> annotations;
    // t1: 5 raters, t2: 3 raters, t3: 2 raters (dropped at N=3).
    for (int r = 0; r < 5; ++r)
        annotations.push_back(ann("t1", "r" + std::to_string(r), ContainAbuse::no));
    for (int r = 0; r < 3; ++r)
        annotations.push_back(ann("t2", "r" + std::to_string(r), ContainAbuse::abusive));
    for (int r = 0; r < 2; ++r)
        annotations.push_back(ann("t3", "r" + std::to_string(r), ContainAbuse::no));

    const auto selection = select_raters(annotations, 3, 42);
    CHECK(selection.dropped_tweets == 1);
    REQUIRE(selection.selected.size() == 2);
    CHECK(selection.selected.at("t1").size() == 3);
    CHECK(selection.selected.at("t2").size() == 3);

    SUBCASE("selection is deterministic in the seed") {
        const auto again = select_raters(annotations, 3, 42);
        std::vector<std::string> first, second;
        for (const auto& a : selection.selected.at("t1")) first.push_back(a.rater_id);
        for (const auto& a : again.selected.at("t1")) second.push_back(a.rater_id);
        CHECK(first == second);
    }
    SUBCASE("adding an unrelated tweet never perturbs existing picks") {
        auto extended = annotations;
        for (int r = 0; r < 4; ++r)
            extended.push_back(ann("t9", "r" + std::to_string(r), ContainAbuse::no));
        const auto wider = select_raters(extended, 3, 42);
        std::vector<std::string> first, second;
        for (const auto& a : selection.selected.at("t1")) first.push_back(a.rater_id);
        for (const auto& a : wider.selected.at("t1")) second.push_back(a.rater_id);
        CHECK(first == second);
    }
    SUBCASE("duplicate rater on one tweet is rejected") {
        auto bad = annotations;
        bad.push_back(ann("t2", "r0", ContainAbuse::no));
        CHECK_THROWS_AS(select_raters(bad, 3, 42), Error);
    }
    SUBCASE("counts follow the selection") {
        const auto counts = counts_from_selection(selection);
        REQUIRE(counts.size() == 2);
        for (const auto& c : counts) CHECK(c.n_raters() == 3);
    }
}

TEST_CASE("per-type kappa on a hand-worked instance") {
    // Two tweets, two raters each, all answering non-No. For the tested
    // category: tweet 1 splits (one marks it, one does not), tweet 2 agrees
    // (nobody marks it). Binary rows {(1,1), (2,0)}: pooled p = (3/4, 1/4),
    // chance = 5/8, per-tweet kappas {(0 - 5/8)/(3/8), (1 - 5/8)/(3/8)} =
    // {-5/3, 1}, mean -1/3. For a category nobody marks anywhere the run is
    // degenerate and scores 1 by convention.
    std::map<std::string, std::vector<Annotation>> selected;
    auto a11 = ann("t1", "r1", ContainAbuse::abusive);
    a11.types = {AbuseType::racism};
    auto a12 = ann("t1", "r2", ContainAbuse::abusive);
    a12.types = {AbuseType::other};
    auto a21 = ann("t2", "r1", ContainAbuse::problematic);
    a21.types = {AbuseType::other};
    auto a22 = ann("t2", "r2", ContainAbuse::problematic);
    a22.types = {AbuseType::other};
    selected["t1"] = {a11, a12};
    selected["t2"] = {a21, a22};

    const auto racism = per_type_kappa(selected, AbuseType::racism);
    CHECK(racism.kappa_overall == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
    CHECK(racism.per_tweet.at("t1") == doctest::Approx(-5.0 / 3.0).epsilon(1e-12));
    CHECK(racism.per_tweet.at("t2") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(racism.kappa_overall ==
          doctest::Approx(oracle::fleiss_kappa_aggregate({{1, 1}, {2, 0}}))
              .epsilon(1e-12));

    const auto sexism = per_type_kappa(selected, AbuseType::sexism_or_misogyny);
    CHECK(sexism.degenerate);
    CHECK(sexism.kappa_overall == 1.0);

    SUBCASE("macro average spans all seven categories") {
        const auto macro = per_type_macro(selected);
        REQUIRE(macro.per_type.size() == 7);
        // racism -1/3; other has rows {(1,1),(0,2)}, the mirror image of
        // racism, so also -1/3; the five untouched categories are
        // degenerate 1 each: mean = (5 - 2/3)/7 = 13/21.
        CHECK(macro.per_type.at(AbuseType::other).kappa_overall ==
              doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
        CHECK(macro.macro_kappa == doctest::Approx(13.0 / 21.0).epsilon(1e-12));
    }
    SUBCASE("class-No annotations are refused") {
        selected["t3"] = {ann("t3", "r1", ContainAbuse::no),
                          ann("t3", "r2", ContainAbuse::no)};
        CHECK_THROWS_AS(per_type_kappa(selected, AbuseType::racism), Error);
    }
}

TEST_CASE("weighted agreement with equal weights reproduces unweighted results") {
    const std::vector<std::vector<std::uint32_t>> rows = {
        {3, 0, 0}, {0, 3, 0}, {1, 1, 1}, {2, 1, 0}, {0, 2, 1}};
    const std::vector<double> equal(5, 2.5);
    const auto base = fleiss_kappa_rows(ids_for(5), rows);
    const auto weighted = fleiss_kappa_rows(ids_for(5), rows, &equal);
    CHECK(weighted.kappa_overall == base.kappa_overall);  // bit for bit
    CHECK(weighted.chance_agreement == base.chance_agreement);

    const std::vector<std::vector<int>> ordinal = {
        {0, 1, 2}, {2, 2, 1}, {0, 0, 1}, {1, 2, 2}, {0, 1, 1}};
    const auto icc_base = icc_1k(ordinal);
    const auto icc_weighted = icc_1k(ordinal, &equal);
    CHECK(icc_weighted.icc == icc_base.icc);

    SUBCASE("unequal weights shift the estimate") {
        const std::vector<double> skewed = {10.0, 0.1, 0.1, 0.1, 0.1};
        const auto shifted = fleiss_kappa_rows(ids_for(5), rows, &skewed);
        // Weight mass concentrates on a consensus tweet.
        CHECK(shifted.kappa_overall > base.kappa_overall);
    }
    SUBCASE("weight count must match the row count") {
        const std::vector<double> wrong(4, 1.0);
        CHECK_THROWS_AS(fleiss_kappa_rows(ids_for(5), rows, &wrong), Error);
    }
}

TEST_CASE("agreement report has the documented shape") {
    std::vector<Annotation> annotations;
    // 6 crowd tweets with 3 raters each, mixed answers.
    const ContainAbuse patterns[6][3] = {
        {ContainAbuse::no, ContainAbuse::no, ContainAbuse::no},
        {ContainAbuse::abusive, ContainAbuse::abusive, ContainAbuse::problematic},
        {ContainAbuse::no, ContainAbuse::problematic, ContainAbuse::no},
        {ContainAbuse::problematic, ContainAbuse::problematic, ContainAbuse::problematic},
        {ContainAbuse::abusive, ContainAbuse::no, ContainAbuse::abusive},
        {ContainAbuse::no, ContainAbuse::no, ContainAbuse::abusive},
    };
    for (int t = 0; t < 6; ++t) {
        for (int r = 0; r < 3; ++r) {
            annotations.push_back(ann("t" + std::to_string(t), "r" + std::to_string(r),
                                      patterns[t][r]));
        }
    }
    // Two expert raters only: the expert rows land below the N floor.
    for (int t = 0; t < 6; ++t) {
        for (int r = 0; r < 2; ++r) {
            annotations.push_back(ann("t" + std::to_string(t), "e" + std::to_string(r),
                                      patterns[t][r], Cohort::expert));
        }
    }

    const auto report = agreement_report(annotations, 3, 17);
    REQUIRE(report.rows.size() == 4);
    CHECK(report.rows[0].cohort == Cohort::crowd);
    CHECK(report.rows[0].variable == "contain_abuse");
    CHECK(report.rows[1].variable == "type_of_abuse");
    CHECK(report.rows[2].cohort == Cohort::expert);
    CHECK_FALSE(report.weighted);

    // Crowd severity row: kappa and icc both present.
    CHECK_FALSE(report.rows[0].insufficient);
    CHECK(report.rows[0].icc.has_value());
    CHECK(report.rows[0].n_tweets == 6);

    // Types row: macro kappa, no icc (ordinal consistency is undefined for
    // a multi-select variable).
    CHECK_FALSE(report.rows[1].icc.has_value());
    CHECK(report.rows[1].per_type.size() == 7);

    // Expert rows: everything dropped at N=3.
    CHECK(report.rows[2].insufficient);
    CHECK(report.rows[3].insufficient);
}
