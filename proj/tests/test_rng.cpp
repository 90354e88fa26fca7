#include "doctest.h"

#include <map>
#include <set>

#include "tabsa/rng.hpp"

using namespace tabsa;

TEST_CASE("split is a pure function") {
    CHECK(split(42, "a") == split(42, "a"));
    CHECK(split(0, "map") == split(0, "map"));
    CHECK(split(42, "tasks", 3) == split(42, "tasks", 3));
}

TEST_CASE("split regression constants") {
    // Evaluated once with the chosen mixing function and frozen; a change
    // here silently breaks every recorded seed.
    CHECK(split(42, "a") == 1976498609966166241ull);
    CHECK(split(42, "b") == 4491167170157778569ull);
    CHECK(split(42, "a") != split(42, "b"));
}

TEST_CASE("split rejects an empty label") {
    CHECK_THROWS_AS(split(0, ""), std::invalid_argument);
}

TEST_CASE("distinct labels and seeds give distinct children") {
    std::set<std::uint64_t> seen;
    const char* labels[] = {"map", "tasks", "pedestrians", "agent", "a", "b", "ab", "ba"};
    for (std::uint64_t seed : {0ull, 1ull, 42ull, 0xFFFFFFFFFFFFFFFFull}) {
        for (const char* label : labels) {
            CHECK(seen.insert(split(seed, label)).second);
        }
    }
}

TEST_CASE("stream sequence regression") {
    RandomStream s(12345);
    CHECK(s.next_u64() == 2454886589211414944ull);
    CHECK(s.next_u64() == 3778200017661327597ull);
    CHECK(s.next_u64() == 2205171434679333405ull);
}

TEST_CASE("uniform01 stays in [0,1)") {
    RandomStream s(7);
    for (int i = 0; i < 10000; ++i) {
        double u = s.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("uniform_int covers the inclusive range") {
    RandomStream s(99);
    std::map<int, int> counts;
    for (int i = 0; i < 6000; ++i) counts[s.uniform_int(-2, 3)]++;
    CHECK(counts.size() == 6);
    for (const auto& [v, n] : counts) {
        CHECK(v >= -2);
        CHECK(v <= 3);
        CHECK(n > 600); // roughly uniform
    }
}

TEST_CASE("streams with the same seed are identical, copies fork") {
    RandomStream a(5), b(5);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    RandomStream c = a;
    CHECK(c.next_u64() == b.next_u64()); // copy continues the sequence
}

TEST_CASE("gaussian draws are sane") {
    RandomStream s(2024);
    double sum = 0.0, sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        double g = s.gaussian();
        sum += g;
        sq += g * g;
    }
    double mean = sum / n;
    double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.03);
    CHECK(std::abs(var - 1.0) < 0.05);
}
