#include <qfocklab/repn.hpp>

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace qfocklab;

namespace {

const Complex I(0.0, 1.0);

HVector random_real(const Representation& rep, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::vector<double> r(rep.dim());
    for (auto& x : r) x = g(rng);
    return rep.from_real(r);
}

HVector random_complex(const Representation& rep, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::VectorXcd c(rep.dim());
    for (int i = 0; i < rep.dim(); ++i) c[i] = Complex(g(rng), g(rng));
    return rep.from_eigen(c);
}

} // namespace

TEST(Build, IdentityRepresentation) {
    const auto rep = build({1, {}});
    EXPECT_EQ(rep.dim(), 1);
    EXPECT_EQ(rep.generator()(0, 0), Complex(1.0));
    EXPECT_EQ(rep.real_to_eigen()(0, 0), Complex(1.0));
}

TEST(Build, Rejections) {
    EXPECT_THROW(build({0, {1.0}}), DomainError);
    EXPECT_THROW(build({0, {0.5}}), DomainError);
    EXPECT_THROW(build({0, {}}), DomainError);
    EXPECT_THROW(build({-1, {2.0}}), DomainError);
}

TEST(Build, BlockGeneratorAtLambdaFour) {
    const auto rep = build({0, {4.0}});
    const auto a = rep.generator_eigenvalues();
    EXPECT_DOUBLE_EQ(a[0], 0.25);
    EXPECT_DOUBLE_EQ(a[1], 4.0);

    Eigen::MatrixXcd expected(2, 2);
    expected << 0.5 * 4.25, 0.5 * 3.75 * I, -0.5 * 3.75 * I, 0.5 * 4.25;
    EXPECT_LT((rep.generator_real() - expected).norm(), 1e-14);
    // Same matrix reached through the eigenbasis change of coordinates.
    const Eigen::MatrixXcd via_eigen = rep.eigen_to_real() * rep.generator() * rep.real_to_eigen();
    EXPECT_LT((via_eigen - expected).norm(), 1e-13);
}

TEST(Build, XiZeroHasUnitDeformedNorm) {
    const auto rep = build({0, {4.0}});
    const auto xi0 = rep.block_xi(0);
    const Complex n2 = hc_functional(rep, [](double a) { return 2.0 * a / (1.0 + a); }, xi0, xi0);
    EXPECT_NEAR(n2.real(), 1.0, 1e-13);
    EXPECT_NEAR(n2.imag(), 0.0, 1e-13);
    EXPECT_NEAR(deformed_norm(rep, xi0), 1.0, 1e-14);
}

TEST(Build, EigenvectorsMatchZetaDefinitions) {
    // A ζ_{2k-1} = ζ_{2k-1}/λ and A ζ_{2k} = λ ζ_{2k}, checked in real coordinates.
    const auto rep = build({1, {2.0, 7.5}});
    const Eigen::MatrixXcd a_real = rep.generator_real();
    for (int i = 0; i < rep.dim(); ++i) {
        const Eigen::VectorXcd z = rep.eigen_to_real().col(i);
        EXPECT_LT((a_real * z - rep.letter(i).a * z).norm(), 1e-13) << i;
    }
}

TEST(UnitaryAt, IdentityAndPeriod) {
    const auto rep = build({1, {4.0}});
    EXPECT_LT((unitary_at(rep, 0.0) - Eigen::MatrixXcd::Identity(3, 3)).norm(), 1e-15);
    const double period = 2.0 * std::numbers::pi / std::log(4.0);
    EXPECT_LT((unitary_at(rep, period) - Eigen::MatrixXcd::Identity(3, 3)).norm(), 1e-13);
}

TEST(UnitaryAt, RealBlockIsRotation) {
    const auto rep = build({0, {4.0}});
    for (double t : {-1.3, 0.2, 0.77, 3.0}) {
        const double th = t * std::log(4.0);
        Eigen::MatrixXcd rot(2, 2);
        rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
        EXPECT_LT((unitary_at_real(rep, t) - rot).norm(), 1e-12) << t;
    }
}

TEST(UnitaryAt, CommutesWithGenerator) {
    const auto rep = build({2, {1.5, 4.0, 9.0}});
    for (double t : {-2.0, -0.5, 0.0, 0.3, 1.0, 4.0}) {
        const auto u = unitary_at_real(rep, t);
        EXPECT_LT((u * rep.generator_real() * u.adjoint() - rep.generator_real()).norm(), 1e-12);
    }
}

TEST(UnitaryAt, PreservesDeformedInnerProduct) {
    const auto rep = build({1, {2.0, 4.0}});
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto x = random_complex(rep, rng), y = random_complex(rep, rng);
        for (double t : {-1.0, 0.25, 2.5}) {
            const Complex before = deformed_inner(rep, x, y);
            const Complex after = deformed_inner(rep, evolve(rep, x, t), evolve(rep, y, t));
            EXPECT_LT(std::abs(before - after), 1e-12);
        }
    }
}

TEST(DeformedInner, EigenbasisIsOrthonormal) {
    const auto rep = build({1, {3.0}});
    for (int i = 0; i < rep.dim(); ++i)
        for (int j = 0; j < rep.dim(); ++j) {
            const Complex g = deformed_inner(rep, rep.basis_vector(i), rep.basis_vector(j));
            EXPECT_NEAR(std::abs(g - Complex(i == j ? 1.0 : 0.0)), 0.0, 1e-15);
        }
    // And orthonormality holds for the defining form ⟨2/(1+A^{-1}) ·,·⟩_{H_C} as well.
    for (int i = 0; i < rep.dim(); ++i)
        for (int j = 0; j < rep.dim(); ++j) {
            const Complex g = hc_functional(rep, [](double a) { return 2.0 * a / (1.0 + a); },
                                            rep.basis_vector(i), rep.basis_vector(j));
            EXPECT_NEAR(std::abs(g - Complex(i == j ? 1.0 : 0.0)), 0.0, 1e-13);
        }
}

TEST(DeformedInner, XiZeroAgainstXiZeroPrime) {
    const auto rep = build({0, {4.0}});
    const auto xi0 = rep.block_xi(0), xi0p = rep.block_xi_prime(0);
    // Hand evaluation: f = 2a/(1+a) is 0.4 on e_0 and 1.6 on e_0'; with
    // ξ_0 = (e_0+e_0')/√2, ξ_0' = i(e_0'-e_0)/√2 the pairing is i(1.6-0.4)/2 = 0.6i.
    const Complex via_real = hc_functional(rep, [](double a) { return 2.0 * a / (1.0 + a); }, xi0, xi0p);
    EXPECT_NEAR(via_real.real(), 0.0, 1e-14);
    EXPECT_NEAR(via_real.imag(), 0.6, 1e-14);
    EXPECT_LT(std::abs(deformed_inner(rep, xi0, xi0p) - via_real), 1e-14);

    const Complex b = hc_functional(rep, [](double a) { return 2.0 * std::sqrt(a) / (1.0 + a); }, xi0, xi0p);
    EXPECT_LT(std::abs(b), 1e-14);
}

TEST(DeformedInner, DimensionMismatch) {
    const auto r1 = build({1, {}});
    const auto r3 = build({1, {2.0}});
    EXPECT_THROW(deformed_inner(r3, r1.fixed_vector(0), r3.fixed_vector(0)), DomainError);
    EXPECT_THROW(r3.from_real({1.0, 2.0}), DomainError);
}

TEST(FixedProjection, Examples) {
    const auto rep = build({1, {4.0}});
    const auto s1 = rep.fixed_vector(0);
    const auto xi0 = rep.block_xi(0);
    EXPECT_LT(fixed_projection(rep, xi0).coords.norm(), 1e-15);
    EXPECT_LT((fixed_projection(rep, s1).coords - s1.coords).norm(), 1e-15);
    const auto mixed = (1.0 / std::sqrt(2.0)) * (s1 + xi0);
    EXPECT_LT((fixed_projection(rep, mixed).coords - (1.0 / std::sqrt(2.0)) * s1.coords).norm(), 1e-15);
}

TEST(FixedProjection, IdempotentAndContractive) {
    const auto rep = build({2, {2.0, 5.0}});
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto x = random_complex(rep, rng);
        const auto p = fixed_projection(rep, x);
        EXPECT_LT((fixed_projection(rep, p).coords - p.coords).norm(), 1e-15);
        EXPECT_LE(deformed_norm(rep, p), deformed_norm(rep, x) + 1e-15);
    }
}

TEST(Coordinates, RoundTrip) {
    const auto rep = build({2, {1.1, 4.0, 30.0}});
    const Eigen::MatrixXcd id = rep.eigen_to_real() * rep.real_to_eigen();
    EXPECT_LT((id - Eigen::MatrixXcd::Identity(rep.dim(), rep.dim())).norm(), 1e-13);
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const auto x = random_complex(rep, rng);
        EXPECT_LT((rep.from_real_coordinates(rep.to_real_coordinates(x)).coords - x.coords).norm(), 1e-13);
    }
}

TEST(Coordinates, RealVectorsEmbedIsometrically) {
    const auto rep = build({1, {2.0, 4.0, 10.0}});
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        const auto x = random_real(rep, rng);
        EXPECT_TRUE(x.real);
        EXPECT_TRUE(rep.is_real(x));
        EXPECT_NEAR(std::sqrt(hc_inner(rep, x, x).real()), deformed_norm(rep, x), 1e-12);
        // Real inner products agree with Re⟨·,·⟩_U.
        const auto y = random_real(rep, rng);
        EXPECT_NEAR(hc_inner(rep, x, y).real(), deformed_inner(rep, x, y).real(), 1e-12);
    }
    EXPECT_FALSE(rep.is_real(rep.basis_vector(1)));
}

TEST(Coordinates, RepeatedLambdasAllowed) {
    const auto rep = build({0, {3.0, 3.0}});
    EXPECT_EQ(rep.dim(), 4);
    EXPECT_EQ(rep.block_count(), 2);
}
