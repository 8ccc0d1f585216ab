#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "rgap/lattice.hpp"

using namespace rgap;

TEST(GeneratorDecompose, Examples) {
    EXPECT_EQ(generator_decompose({4, 6}), (Decomposition{2, {2, 3}}));
    EXPECT_EQ(generator_decompose({0, 7}), (Decomposition{7, {0, 1}}));
    EXPECT_EQ(generator_decompose({-3, 5}), (Decomposition{1, {-3, 5}}));
    EXPECT_EQ(generator_decompose({-6, 0}), (Decomposition{6, {-1, 0}}));
    EXPECT_THROW(generator_decompose({0, 0}), std::invalid_argument);
}

TEST(GeneratorDecompose, RecomposesOverBox) {
    for (std::int64_t a = -30; a <= 30; ++a)
        for (std::int64_t b = -30; b <= 30; ++b) {
            if (a == 0 && b == 0) continue;
            const auto [ell, v] = generator_decompose({a, b});
            EXPECT_GE(ell, 1);
            EXPECT_TRUE(is_coprime(v));
            EXPECT_EQ(ell * v, (LatticeVector{a, b}));
        }
}

TEST(EnumerateGenerators, UnitRadius) {
    const auto g = enumerate_generators(1.0);
    ASSERT_EQ(g.size(), 4u);
    EXPECT_EQ(g[0].v, (LatticeVector{-1, 0}));
    EXPECT_EQ(g[1].v, (LatticeVector{0, -1}));
    EXPECT_EQ(g[2].v, (LatticeVector{0, 1}));
    EXPECT_EQ(g[3].v, (LatticeVector{1, 0}));
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(g[i].index_m, static_cast<std::int64_t>(i) + 1);
}

TEST(EnumerateGenerators, SqrtTwoAddsDiagonals) {
    const auto g = enumerate_generators(std::sqrt(2.0));
    ASSERT_EQ(g.size(), 8u);
    EXPECT_EQ(g[4].v, (LatticeVector{-1, -1}));
    EXPECT_EQ(g[7].v, (LatticeVector{1, 1}));
}

TEST(EnumerateGenerators, OrderAndPrefixProperty) {
    const auto small = enumerate_generators(7.3);
    const auto big = enumerate_generators(15.0);
    ASSERT_LT(small.size(), big.size());
    for (std::size_t i = 0; i < small.size(); ++i) EXPECT_EQ(small[i].v, big[i].v);
    for (std::size_t i = 1; i < big.size(); ++i) {
        EXPECT_LE(big[i - 1].v.norm2(), big[i].v.norm2());
        if (big[i - 1].v.norm2() == big[i].v.norm2()) EXPECT_LT(big[i - 1].v, big[i].v);
    }
    EXPECT_THROW(enumerate_generators(0.5), std::invalid_argument);
}

TEST(GeneratorIndex, AgreesWithEnumeration) {
    const auto g = enumerate_generators(12.0);
    const GeneratorIndex idx(6.0);
    for (const auto& gen : g) {
        EXPECT_EQ(generator_index(gen.v), gen.index_m);
        EXPECT_EQ(idx(gen.v), gen.index_m);
    }
    EXPECT_THROW(generator_index({2, 4}), std::invalid_argument);
}

TEST(GapPoints, RankOneAndTwo) {
    const auto b = prime_slope_gap(2, 1);
    const auto pts = gap_points(b);
    ASSERT_EQ(pts.size(), 4u);
    EXPECT_EQ(pts.front(), (LatticeVector{2, 1}));
    EXPECT_EQ(pts.back(), (LatticeVector{8, 4}));

    const auto g = GapSpec::gap({1, 0}, {1, 1}, 3, 2, 0, {5, 5});
    const auto q = gap_points(g);
    ASSERT_EQ(q.size(), 6u);
    EXPECT_EQ(std::set<LatticeVector>(q.begin(), q.end()).size(), 6u);
    EXPECT_EQ(q[0], (LatticeVector{5, 5}));
    EXPECT_EQ(q[5], (LatticeVector{8, 6}));
}

TEST(GapSpecValidation, Rejects) {
    EXPECT_THROW(validate(GapSpec::gap({1, 2}, {2, 4}, 2, 2)), std::invalid_argument);
    EXPECT_THROW(validate(GapSpec::ap({0, 0}, 3)), std::invalid_argument);
    EXPECT_THROW(validate(GapSpec::ap({1, 0}, 0)), std::invalid_argument);
    GapSpec bad = GapSpec::ap({1, 0}, 3);
    bad.d2 = 2;
    EXPECT_THROW(validate(bad), std::invalid_argument);
    bad = GapSpec::ap({1, 0}, 3, 2);
    EXPECT_THROW(validate(bad), std::invalid_argument);
    EXPECT_THROW(prime_slope_gap(5, 5), std::invalid_argument);
}

TEST(PrimeSlopeBlocks, DisjointForPrimes) {
    std::vector<GapSpec> blocks;
    for (auto p : primes_up_to(13))
        for (std::int64_t k = 1; k < p; ++k) blocks.push_back(prime_slope_gap(p, k));
    EXPECT_TRUE(check_pairwise_disjoint(blocks).disjoint);
}

TEST(PrimeSlopeBlocks, CompositeCollides) {
    // (4, 2) = 2 (2, 1), so B(4, 2) meets B(2, 1) at (4, 2)
    const auto r = check_pairwise_disjoint({prime_slope_gap(2, 1), prime_slope_gap(4, 2)});
    EXPECT_FALSE(r.disjoint);
    ASSERT_TRUE(r.witness);
    EXPECT_EQ(*r.witness, (LatticeVector{4, 2}));
}

TEST(Primes, Sieve) {
    EXPECT_EQ(primes_up_to(20), (std::vector<std::int64_t>{2, 3, 5, 7, 11, 13, 17, 19}));
    EXPECT_TRUE(is_prime(97));
    EXPECT_FALSE(is_prime(91));
}

TEST(CoprimeDensity, NearSixOverPiSquared) {
    EXPECT_NEAR(coprime_density(200.0), 6.0 / (M_PI * M_PI), 0.01);
}
