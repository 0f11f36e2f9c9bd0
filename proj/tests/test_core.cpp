#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ihomer/core.hpp"

using namespace ihomer;

TEST_CASE("indicator conversion reads off active positions") {
    const std::vector<std::uint8_t> none = {0, 0, 0};
    CHECK(LabelSet::from_indicator(none) == LabelSet{});

    const std::vector<std::uint8_t> some = {1, 0, 1};
    CHECK(LabelSet::from_indicator(some) == LabelSet{0, 2});

    const std::vector<std::uint8_t> all = {1, 1, 1, 1};
    CHECK(LabelSet::from_indicator(all) == LabelSet{0, 1, 2, 3});

    const std::vector<std::uint8_t> bad = {0, 2};
    CHECK_THROWS_AS(LabelSet::from_indicator(bad), std::invalid_argument);
}

TEST_CASE("indicator round trip is a bijection, exhaustively for small L") {
    for (std::size_t L = 1; L <= 10; ++L) {
        for (std::uint64_t mask = 0; mask < (1ull << L); ++mask) {
            std::vector<std::uint8_t> bits(L);
            for (std::size_t i = 0; i < L; ++i) bits[i] = (mask >> i) & 1;
            const LabelSet s = LabelSet::from_indicator(bits);
            CHECK(s.to_indicator(L) == bits);
        }
    }
}

TEST_CASE("restrict maps into cluster-local coordinates") {
    const ClusterView cluster({2, 5, 7});
    CHECK(cluster.restrict(LabelSet{0, 2, 5}) == LabelSet{0, 1});
    CHECK(cluster.expand(LabelSet{0, 1}) == LabelSet{2, 5});

    CHECK(cluster.restrict(LabelSet{}) == LabelSet{});
    const ClusterView other({0, 2});
    CHECK(other.restrict(LabelSet{1}) == LabelSet{});
}

TEST_CASE("restrict then expand reproduces the intersection") {
    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<std::uint32_t> label(0, 49);
    std::uniform_int_distribution<std::size_t> set_size(0, 12);
    std::uniform_int_distribution<std::size_t> cluster_size(1, 12);
    for (int trial = 0; trial < 10000; ++trial) {
        std::vector<std::uint32_t> s_idx(set_size(rng));
        for (auto& v : s_idx) v = label(rng);
        std::vector<std::uint32_t> c_idx(cluster_size(rng));
        for (auto& v : c_idx) v = label(rng);
        const LabelSet s(std::move(s_idx));
        const ClusterView cluster(std::move(c_idx));
        const LabelSet cluster_set(std::vector<std::uint32_t>(cluster.labels));
        CHECK(cluster.expand(cluster.restrict(s)) == s.intersect(cluster_set));
    }
}

TEST_CASE("set size helpers") {
    const LabelSet a{0, 2, 4};
    const LabelSet b{2, 3};
    CHECK(LabelSet::intersection_size(a, b) == 1);
    CHECK(LabelSet::union_size(a, b) == 4);
    CHECK(LabelSet::symmetric_difference_size(a, b) == 3);
    CHECK(LabelSet::symmetric_difference_size(a, a) == 0);
    CHECK(a.contains(4));
    CHECK_FALSE(a.contains(3));
}
