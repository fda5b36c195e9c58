#include <qfocklab/qcomb.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

using namespace qfocklab;

namespace {

// Independent oracle: perfect matchings as fixed-point-free involutions of
// {0..n-1}, found by scanning every permutation.
std::vector<PairPartition> matchings_by_involutions(int n) {
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    std::vector<PairPartition> out;
    do {
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) ok = p[i] != i && p[p[i]] == i;
        if (!ok) continue;
        std::vector<PairPartition::Arc> arcs;
        for (int i = 0; i < n; ++i)
            if (i < p[i]) arcs.emplace_back(i, p[i]);
        out.emplace_back(arcs);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

std::uint64_t catalan(int k) {
    std::uint64_t c = 1;
    for (int i = 0; i < k; ++i) c = c * 2 * (2 * i + 1) / (i + 2);
    return c;
}

std::uint64_t factorial(int n) {
    std::uint64_t f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

} // namespace

TEST(Inversions, Examples) {
    EXPECT_EQ(inversions(Permutation::identity(3)), 0);
    EXPECT_EQ(inversions(Permutation({2, 1, 0})), 3);
    EXPECT_EQ(inversions(Permutation({1, 0, 2})), 1);
}

TEST(Inversions, RejectsNonBijection) {
    EXPECT_THROW(Permutation({0, 0, 1}), DomainError);
    EXPECT_THROW(Permutation({0, 3}), DomainError);
}

TEST(Inversions, MaximumIsReversal) {
    for (int n = 1; n <= 7; ++n) {
        std::vector<int> rev(n);
        for (int i = 0; i < n; ++i) rev[i] = n - 1 - i;
        EXPECT_EQ(inversions(Permutation(rev)), n * (n - 1) / 2);
    }
}

TEST(PairPartitions, Counts) {
    auto count = [](int n) {
        PairPartitionStream s(n);
        int c = 0;
        while (s.next()) ++c;
        return c;
    };
    EXPECT_EQ(count(0), 1);
    EXPECT_EQ(count(2), 1);
    EXPECT_EQ(count(4), 3);
    EXPECT_EQ(count(6), 15);
    EXPECT_EQ(count(8), 105);
}

TEST(PairPartitions, SmallestCaseIsSingleArc) {
    PairPartitionStream s(2);
    auto v = s.next();
    ASSERT_TRUE(v);
    EXPECT_EQ(v->arcs(), (std::vector<PairPartition::Arc>{{0, 1}}));
    EXPECT_FALSE(s.next());
}

TEST(PairPartitions, MatchesInvolutionOracleWithoutDuplicates) {
    for (int n : {2, 4, 6, 8}) {
        std::set<std::vector<PairPartition::Arc>> streamed;
        PairPartitionStream s(n);
        while (auto v = s.next()) {
            auto [it, fresh] = streamed.insert(v->arcs());
            EXPECT_TRUE(fresh);
            for (auto [a, b] : v->arcs()) EXPECT_LT(a, b);
        }
        std::set<std::vector<PairPartition::Arc>> oracle;
        for (const auto& v : matchings_by_involutions(n)) oracle.insert(v.arcs());
        EXPECT_EQ(streamed, oracle) << "n=" << n;
        EXPECT_EQ(streamed.size(), pairing_count(n));
    }
}

TEST(PairPartitions, Guards) {
    EXPECT_THROW(PairPartitionStream(3), DomainError);
    EXPECT_THROW(PairPartitionStream(18), SizeError);
    EXPECT_NO_THROW(PairPartitionStream(16));
}

TEST(PairPartitions, RejectsInvalid) {
    EXPECT_THROW(PairPartition({{0, 1}, {1, 2}}), DomainError);
    EXPECT_THROW(PairPartition({{0, 3}}), DomainError);
}

TEST(Crossings, Examples) {
    EXPECT_EQ(crossings(PairPartition({{0, 1}, {2, 3}})), 0);
    EXPECT_EQ(crossings(PairPartition({{0, 2}, {1, 3}})), 1);
    EXPECT_EQ(crossings(PairPartition({{0, 3}, {1, 4}, {2, 5}})), 3);
    EXPECT_EQ(crossings(PairPartition({{0, 3}, {1, 2}})), 0);
}

TEST(Crossings, InvariantUnderCanonicalizationRoundTrip) {
    std::mt19937_64 rng(7);
    PairPartitionStream s(10);
    while (auto v = s.next()) {
        auto arcs = v->arcs();
        std::shuffle(arcs.begin(), arcs.end(), rng);
        for (auto& arc : arcs)
            if (rng() & 1) std::swap(arc.first, arc.second);
        PairPartition relabeled(arcs);
        EXPECT_EQ(relabeled, *v);
        EXPECT_EQ(crossings(relabeled), crossings(*v));
    }
}

TEST(QPoly, CanonicalFormAndArithmetic) {
    QPoly a{1, 2, 0, 0};
    EXPECT_EQ(a.degree(), 1);
    EXPECT_EQ(a.coeffs().size(), 2u);
    QPoly zero = a - a;
    EXPECT_TRUE(zero.is_zero());
    EXPECT_EQ(zero.degree(), -1);
    EXPECT_EQ(QPoly({1, 1}) * QPoly({1, 1}), QPoly({1, 2, 1}));
    EXPECT_EQ(QPoly({1, 2}) * Rational(1, 2), QPoly(std::vector<Rational>{Rational(1, 2), 1}));
    EXPECT_EQ(QPoly({2, 0, -1}).to_string(), "2 - q^2");
}

TEST(QPoly, ExactRationalEvaluation) {
    QPoly p{5, 6, 3, 1};
    EXPECT_EQ(p.evaluate(Rational(1, 2)), Rational(5) + 3 + Rational(3, 4) + Rational(1, 8));
    EXPECT_DOUBLE_EQ(p.evaluate(0.5), 8.875);
}

TEST(QFactorial, Examples) {
    EXPECT_EQ(q_factorial(0), QPoly{1});
    EXPECT_EQ(q_factorial(2), QPoly({1, 1}));
    EXPECT_EQ(q_factorial(3), QPoly({1, 2, 2, 1}));
    EXPECT_TRUE(q_integer(0).is_zero());
}

TEST(QFactorial, AtOneIsFactorial) {
    for (int n = 0; n <= 12; ++n)
        EXPECT_EQ(q_factorial(n).evaluate(Rational(1)), Rational(factorial(n))) << n;
}

TEST(MomentPolynomial, Examples) {
    EXPECT_EQ(moment_polynomial(2), QPoly{1});
    EXPECT_EQ(moment_polynomial(4), QPoly({2, 1}));
    EXPECT_EQ(moment_polynomial(6), QPoly({5, 6, 3, 1}));
    EXPECT_THROW(moment_polynomial(5), DomainError);
    EXPECT_EQ(moment_value(5, 0.3), 0.0);
}

TEST(MomentPolynomial, MatchesInvolutionOracle) {
    for (int n : {2, 4, 6, 8}) {
        QPoly oracle;
        for (const auto& v : matchings_by_involutions(n)) oracle += QPoly::monomial(crossings(v));
        EXPECT_EQ(moment_polynomial(n), oracle) << n;
    }
}

TEST(MomentPolynomial, BosonicAndFreeLimits) {
    for (int n : {2, 4, 6, 8}) {
        const QPoly m = moment_polynomial(n);
        EXPECT_EQ(m.evaluate(Rational(1)), Rational(pairing_count(n)));
        EXPECT_EQ(m.evaluate(Rational(0)), Rational(catalan(n / 2)));
    }
}

TEST(MomentPolynomial, GuardedEnumerationAtSixteen) {
    const QPoly m = moment_polynomial(16);
    EXPECT_EQ(m.evaluate(Rational(1)), Rational(2027025));
    EXPECT_EQ(m.evaluate(Rational(0)), Rational(catalan(8)));
}

TEST(QHermite, Examples) {
    EXPECT_EQ(q_hermite(0), (QHermitePoly{QPoly{1}}));
    EXPECT_EQ(q_hermite(1), (QHermitePoly{QPoly{}, QPoly{1}}));
    EXPECT_EQ(q_hermite(2), (QHermitePoly{QPoly{-1}, QPoly{}, QPoly{1}}));
    EXPECT_EQ(q_hermite(3), (QHermitePoly{QPoly{}, QPoly({-2, -1}), QPoly{}, QPoly{1}}));
}

TEST(QHermite, RecursionHoldsExactly) {
    const auto h = q_hermite_family(11);
    for (int n = 1; n <= 10; ++n) {
        // x H_n - [n]_q H_{n-1} - H_{n+1} == 0
        QHermitePoly residual(h[n + 1].size());
        for (std::size_t k = 0; k < h[n].size(); ++k) residual[k + 1] += h[n][k];
        for (std::size_t k = 0; k < h[n - 1].size(); ++k) residual[k] -= q_integer(n) * h[n - 1][k];
        for (std::size_t k = 0; k < h[n + 1].size(); ++k) residual[k] -= h[n + 1][k];
        for (const auto& c : residual) EXPECT_TRUE(c.is_zero()) << n;
        EXPECT_EQ(h[n].size(), static_cast<std::size_t>(n + 1));
        EXPECT_EQ(h[n].back(), QPoly{1});
    }
}
