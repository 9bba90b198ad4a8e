#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <set>

#include "lineage/rng.hpp"

using namespace lineage;

TEST_CASE("identical (seed, stream) pairs replay identical sequences") {
    RngStream a(42, stream_id(StreamPurpose::PolicySampling, 1, 2));
    RngStream b(42, stream_id(StreamPurpose::PolicySampling, 1, 2));
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct stream ids decorrelate under one seed") {
    RngStream a(7, stream_id(StreamPurpose::PolicySampling, 0, 0));
    RngStream b(7, stream_id(StreamPurpose::PolicySampling, 0, 1));
    int equal = 0;
    for (int i = 0; i < 1000; ++i)
        if (a.next_u64() == b.next_u64()) ++equal;
    REQUIRE(equal == 0);
}

TEST_CASE("uniform stays in [0,1) and covers the range") {
    RngStream rng(3, 0);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    REQUIRE(lo < 0.01);
    REQUIRE(hi > 0.99);
}

TEST_CASE("uniform_int is roughly uniform and in range") {
    RngStream rng(11, 5);
    std::array<int, 5> counts{};
    for (int i = 0; i < 50000; ++i) {
        const int v = rng.uniform_int(5);
        REQUIRE(v >= 0);
        REQUIRE(v < 5);
        ++counts[static_cast<std::size_t>(v)];
    }
    for (int c : counts) REQUIRE(std::abs(c - 10000) < 500);
}

TEST_CASE("normal draws have near-standard moments") {
    RngStream rng(19, 1);
    double sum = 0.0, sumsq = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sumsq += x * x;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    REQUIRE(std::abs(mean) < 0.02);
    REQUIRE(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("permutation is a bijection") {
    RngStream rng(23, 9);
    const auto p = rng.permutation(64);
    std::set<int> seen(p.begin(), p.end());
    REQUIRE(seen.size() == 64);
    REQUIRE(*seen.begin() == 0);
    REQUIRE(*seen.rbegin() == 63);
}
