#include <doctest.h>

#include <map>
#include <set>

#include "tg/rng.hpp"

using namespace tg;

// Reference values from a standalone implementation of the same generator
// (splitmix64-seeded xoshiro256**), kept outside this codebase.
TEST_CASE("generator matches the frozen reference stream") {
    Rng rng(42);
    CHECK(rng.next_u64() == 0x15780b2e0c2ec716ull);
    CHECK(rng.next_u64() == 0x6104d9866d113a7eull);
    CHECK(rng.next_u64() == 0xae17533239e499a1ull);

    Rng zero(0);
    CHECK(zero.next_u64() == 0x99ec5f36cb75f2b4ull);
}

TEST_CASE("labeled substreams match the frozen derivations") {
    CHECK(Rng::derive_seed(7, "enrich") == 0x89a3c1a67969458eull);
    CHECK(Rng::derive_seed(7, "stratified:2017-03-01") == 0x2392f5ee592c8424ull);
}

TEST_CASE("same seed gives the same stream, labels split it") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng labeled(123, "enrich");
    Rng derived(Rng::derive_seed(123, "enrich"));
    for (int i = 0; i < 10; ++i) CHECK(labeled.next_u64() == derived.next_u64());

    Rng other(123, "select:t1");
    Rng enrich(123, "enrich");
    CHECK(other.next_u64() != enrich.next_u64());
}

TEST_CASE("next_double stays in [0,1) and matches the reference") {
    Rng rng(42);
    CHECK(rng.next_double() == doctest::Approx(0.08386297105988216).epsilon(1e-15));
    for (int i = 0; i < 1000; ++i) {
        const double v = rng.next_double();
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("below is bounded and roughly uniform") {
    Rng rng(7);
    std::map<std::uint64_t, int> counts;
    const int n = 60000;
    for (int i = 0; i < n; ++i) {
        const std::uint64_t v = rng.below(6);
        REQUIRE(v < 6);
        ++counts[v];
    }
    for (const auto& [value, count] : counts) {
        (void)value;
        CHECK(count > n / 6 - 800);
        CHECK(count < n / 6 + 800);
    }
    CHECK_THROWS(rng.below(0));
}

TEST_CASE("sample_without_replacement yields sorted distinct indices") {
    Rng rng(9);
    const auto picks = sample_without_replacement(10, 4, rng);
    REQUIRE(picks.size() == 4);
    std::set<std::size_t> unique(picks.begin(), picks.end());
    CHECK(unique.size() == 4);
    CHECK(std::is_sorted(picks.begin(), picks.end()));
    for (std::size_t p : picks) CHECK(p < 10);

    Rng rng2(9);
    const auto all = sample_without_replacement(5, 5, rng2);
    CHECK(all == std::vector<std::size_t>{0, 1, 2, 3, 4});

    const auto none = sample_without_replacement(5, 0, rng2);
    CHECK(none.empty());

    CHECK_THROWS(sample_without_replacement(3, 4, rng2));
}

TEST_CASE("subset draws are uniform over positions") {
    // Each of 6 positions should appear in a 3-of-6 draw with frequency 1/2.
    const int runs = 20000;
    std::array<int, 6> hits{};
    for (int seed = 0; seed < runs; ++seed) {
        Rng rng(static_cast<std::uint64_t>(seed), "uniformity");
        for (std::size_t p : sample_without_replacement(6, 3, rng)) ++hits[p];
    }
    for (int h : hits) {
        CHECK(h > runs / 2 - 600);
        CHECK(h < runs / 2 + 600);
    }
}
