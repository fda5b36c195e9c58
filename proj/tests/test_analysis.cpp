#include <qfocklab/analysis.hpp>

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace qfocklab;

namespace {

struct Lab {
    Lab(RepresentationSpec spec, double q, int cutoff)
        : rep(build(std::move(spec))), fock(build_fock(rep, q, cutoff)), md(fock) {}
    Representation rep;
    TruncatedFock fock;
    ModularData md;
};

HVector random_unit_real(const Representation& rep, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::vector<double> r(rep.dim());
    double n2 = 0.0;
    for (auto& x : r) {
        x = g(rng);
        n2 += x * x;
    }
    for (auto& x : r) x /= std::sqrt(n2);
    return rep.from_real(r);
}

} // namespace

TEST(Model, BasisIsOrthonormalAndHermiteGenerated) {
    for (double q : {-0.6, 0.2, 0.7}) {
        Lab lab({1, {3.0}}, q, 6);
        std::mt19937_64 rng(1);
        const GeneratorSubalgebraModel model(lab.fock, lab.md, random_unit_real(lab.rep, rng));
        const auto& basis = model.basis();
        ASSERT_EQ(basis.size(), 7u);
        for (std::size_t i = 0; i < basis.size(); ++i)
            for (std::size_t j = 0; j < basis.size(); ++j)
                EXPECT_LT(std::abs(inner_q(lab.fock, basis[i], basis[j]) - Complex(i == j ? 1.0 : 0.0)), 1e-10);
        const auto s = field(lab.fock, model.xi());
        const auto family = q_hermite_family(6);
        for (int m = 0; m <= 6; ++m) {
            auto v = apply_polynomial(evaluate_coefficients(family[m], q), s, FockVector::vacuum(lab.fock));
            v *= 1.0 / std::sqrt(oracle::q_factorial(m, q));
            EXPECT_LT((v - basis[m]).max_abs(), 1e-10);
        }
    }
}

TEST(Model, Rejections) {
    Lab lab({1, {3.0}}, 0.0, 2);
    EXPECT_THROW(GeneratorSubalgebraModel(lab.fock, lab.md, 2.0 * lab.rep.fixed_vector(0)), DomainError);
    EXPECT_THROW(GeneratorSubalgebraModel(lab.fock, lab.md, lab.rep.basis_vector(1)), DomainError);
}

TEST(EmbeddingCoefficients, Examples) {
    Lab lab({0, {4.0}}, 0.3, 4);
    const GeneratorSubalgebraModel model(lab.fock, lab.md, lab.rep.block_xi(0));
    const auto c = embedding_coefficients(model);
    EXPECT_NEAR(c[0], 1.0, 1e-15);
    EXPECT_NEAR(c[1], std::sqrt(0.8), 1e-14);
    EXPECT_NEAR(c[3], std::pow(0.8, 1.5), 1e-13);
    EXPECT_NEAR(c[3], 0.71554, 1e-5);
    // Cross-check against a dense Δ^{1/4} assembled from A^{-1/4} letter by letter.
    const Eigen::MatrixXcd a_quarter = lab.rep.generator().cwiseSqrt().cwiseSqrt().inverse();
    const HVector moved{a_quarter * lab.rep.block_xi(0).coords, false};
    const auto v = tensor_power(lab.fock, moved, 3);
    EXPECT_NEAR(norm_q(lab.fock, v) / std::sqrt(oracle::q_factorial(3, 0.3)), c[3], 1e-13);
}

TEST(EmbeddingCoefficients, GeometricForEveryUnitVector) {
    Lab lab({1, {2.0, 6.0}}, -0.4, 4);
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 5; ++trial) {
        const GeneratorSubalgebraModel model(lab.fock, lab.md, random_unit_real(lab.rep, rng));
        const auto c = embedding_coefficients(model);
        for (int m = 0; m <= 4; ++m) EXPECT_NEAR(c[m], std::pow(model.mu(), 0.5 * m), 1e-12);
    }
}

TEST(HsCertificate, LambdaFourCutoffTen) {
    Lab lab({0, {4.0}}, 0.5, 10);
    const GeneratorSubalgebraModel model(lab.fock, lab.md, lab.rep.block_xi(0));
    const auto hs = hs_norm_certificate(model);
    EXPECT_NEAR(model.mu(), 0.8, 1e-14);
    EXPECT_NEAR(hs.closed, 5.0, 1e-12);
    EXPECT_NEAR(hs.partial, 4.5705, 5e-5);
    EXPECT_NEAR(hs.tail, 0.4295, 5e-5);
    double geometric = 0.0;
    for (int m = 0; m <= 10; ++m) geometric += std::pow(0.8, m);
    EXPECT_NEAR(hs.partial, geometric, 1e-12);
    EXPECT_LT(hs.identity_residual, 1e-12);
    EXPECT_NEAR(hs.partial_from_coefficients, hs.partial, 1e-10);
    EXPECT_NEAR(hs.max_coefficient, 1.0, 1e-15);
    EXPECT_LE(hs.partial, hs.closed);
}

TEST(HsCertificate, FixedVectorHasNone) {
    Lab lab({1, {4.0}}, 0.5, 3);
    const GeneratorSubalgebraModel model(lab.fock, lab.md, lab.rep.fixed_vector(0));
    EXPECT_NEAR(model.mu(), 1.0, 1e-15);
    EXPECT_THROW(hs_norm_certificate(model), CertificateUnavailable);
    EXPECT_THROW(nuclear_certificate(model), CertificateUnavailable);
    try {
        hs_norm_certificate(model);
    } catch (const CertificateUnavailable& e) {
        EXPECT_STREQ(e.what(), "certificate unavailable");
    }
}

TEST(NuclearCertificate, LambdaFourCutoffTen) {
    Lab lab({0, {4.0}}, -0.3, 10);
    const GeneratorSubalgebraModel model(lab.fock, lab.md, lab.rep.block_xi(0));
    const auto nc = nuclear_certificate(model, 100, 7);
    EXPECT_NEAR(nc.closed, 9.47214, 1e-5);
    EXPECT_NEAR(nc.closed, 1.0 / (1.0 - std::sqrt(0.8)), 1e-12);
    double geometric = 0.0;
    for (int m = 0; m <= 10; ++m) geometric += std::pow(0.8, 0.5 * m);
    EXPECT_NEAR(nc.partial, geometric, 1e-12);
    EXPECT_NEAR(nc.partial, 6.696, 1e-3);
    EXPECT_LT(nc.identity_residual, 1e-12);
    EXPECT_EQ(nc.samples, 100);
    EXPECT_LE(nc.max_functional_ratio, 1.0 + 1e-12);
    EXPECT_GT(nc.max_functional_ratio, 0.0);
}

TEST(NuclearCertificate, ZeroMuLimit) {
    // μ → 0 leaves only the m = 0 term.
    EXPECT_NEAR(1.0 / (1.0 - std::sqrt(0.0)), 1.0, 0.0);
    Lab lab({0, {1e12}}, 0.0, 2);
    const GeneratorSubalgebraModel model(lab.fock, lab.md, lab.rep.block_xi(0));
    EXPECT_LT(model.mu(), 1e-5);
    EXPECT_NEAR(nuclear_certificate(model, 5).closed, 1.0, 1e-2);
}

TEST(SplitVerdict, Examples) {
    Lab lab({1, {4.0}}, 0.4, 4);
    const auto fixed = split_verdict(GeneratorSubalgebraModel(lab.fock, lab.md, lab.rep.fixed_vector(0)));
    EXPECT_EQ(fixed.verdict, Verdict::Fixed);
    EXPECT_NEAR(fixed.mu, 1.0, 1e-14);
    EXPECT_FALSE(fixed.hs.has_value());
    EXPECT_TRUE(fixed.dichotomy_consistent);

    const auto xi0 = split_verdict(GeneratorSubalgebraModel(lab.fock, lab.md, lab.rep.block_xi(0)));
    EXPECT_EQ(xi0.verdict, Verdict::NonFixed);
    EXPECT_NEAR(xi0.mu, 0.8, 1e-14);
    ASSERT_TRUE(xi0.hs && xi0.nuclear);
    EXPECT_NEAR(xi0.tail_bound, std::pow(0.8, 5) / 0.2, 1e-12);
    EXPECT_STREQ(verdict_label(xi0.verdict), "non-fixed: quasi-split-certificate");

    const auto mixed_vec = (1.0 / std::sqrt(2.0)) * (lab.rep.fixed_vector(0) + lab.rep.block_xi(0));
    const auto mixed = split_verdict(GeneratorSubalgebraModel(lab.fock, lab.md, mixed_vec));
    EXPECT_EQ(mixed.verdict, Verdict::NonFixed);
    EXPECT_NEAR(mixed.mu, 0.9, 1e-14);
    EXPECT_NEAR(mixed.mu_mixed, 0.9, 1e-14);
    EXPECT_NEAR(mixed.mu_closed, 0.9, 1e-14);
}

TEST(SplitVerdict, IndeterminateBand) {
    Lab lab({1, {4.0}}, 0.0, 2);
    // non-fixed weight w gives μ = 1 − 0.2 w²; w = 1e-5 puts μ inside the ε band.
    const double w = 1e-5;
    const auto v = std::sqrt(1.0 - w * w) * lab.rep.fixed_vector(0) + w * lab.rep.block_xi(0);
    const auto r = split_verdict(GeneratorSubalgebraModel(lab.fock, lab.md, v));
    EXPECT_EQ(r.verdict, Verdict::Indeterminate);
    EXPECT_TRUE(r.dichotomy_consistent);
}

TEST(Dichotomy, RandomSweep) {
    Lab lab({1, {2.0, 4.0}}, 0.3, 2);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 100; ++trial) {
        HVector xi;
        if (trial % 10 == 0) {
            xi = lab.rep.fixed_vector(0);
            if (trial % 20 == 0) xi = -1.0 * xi;
        } else {
            xi = random_unit_real(lab.rep, rng);
        }
        const auto r = split_verdict(GeneratorSubalgebraModel(lab.fock, lab.md, xi), 3, trial);
        EXPECT_TRUE(r.dichotomy_consistent);
        EXPECT_NEAR(r.mu, r.mu_mixed, 1e-12);
        EXPECT_NEAR(r.mu, r.mu_closed, 1e-12);
        if (r.non_fixed_norm > 0.0) {
            EXPECT_LT(r.mu, 1.0);
            EXPECT_EQ(r.verdict, Verdict::NonFixed);
            if (r.non_fixed_norm >= 0.1) {
                EXPECT_LT(r.mu, 1.0 - 1e-6);
            }
        } else {
            EXPECT_NEAR(r.mu, 1.0, 1e-12);
            EXPECT_EQ(r.verdict, Verdict::Fixed);
        }
    }
}

TEST(Identities, BlockCrossTermVanishes) {
    const auto rep = build({2, {1.1, 2.0, 4.0, 50.0}});
    for (int k = 0; k < rep.block_count(); ++k) EXPECT_LT(std::abs(block_cross_term(rep, k)), 1e-13);
}

TEST(Identities, MuDecreasesInLambda) {
    double previous = 1.0;
    for (double lambda = 1.0 + 1e-3; lambda < 1e6; lambda *= 1.3) {
        const double mu = mu_of_lambda(lambda);
        EXPECT_LT(mu, previous);
        EXPECT_GT(mu, 0.0);
        previous = mu;
    }
}

TEST(Identities, SingleBlockScaling) {
    for (double lambda : {1.5, 4.0, 9.0}) {
        Lab lab({1, {lambda, 3.0}}, 0.2, 1);
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> u(-0.7, 0.7);
        for (int trial = 0; trial < 10; ++trial) {
            const auto xi = u(rng) * lab.rep.block_xi(0) + u(rng) * lab.rep.block_xi_prime(0);
            const double norm_u = deformed_norm(lab.rep, xi);
            ASSERT_LE(norm_u, 1.0);
            const auto r = delta_quarter_norm(lab.md, xi);
            EXPECT_NEAR(r.numeric * r.numeric, mu_of_lambda(lambda) * norm_u * norm_u, 1e-12);
        }
    }
}

TEST(MomentReport, Rows) {
    Lab lab({1, {4.0}}, 0.5, 6);
    const auto rows = moment_report(lab.fock, lab.rep.block_xi(0), 6);
    ASSERT_EQ(rows.size(), 6u);
    EXPECT_NEAR(rows[1].matrix, 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(rows[1].oracle, 1.0);
    EXPECT_DOUBLE_EQ(rows[3].oracle, 2.5);
    EXPECT_NEAR(rows[3].matrix, 2.5, 1e-9);
    EXPECT_LT(std::abs(rows[2].matrix), 1e-12);
    for (const auto& r : rows) EXPECT_TRUE(r.pass) << r.n;
    EXPECT_THROW(moment_report(lab.fock, lab.rep.block_xi(0), 7), SizeError);
}

TEST(MomentReport, SemicircleCatalanAtQZero) {
    Lab lab({0, {2.0}}, 0.0, 8);
    const auto rows = moment_report(lab.fock, lab.rep.block_xi(0), 8);
    const auto cat = oracle::catalan(5);
    for (int k = 1; k <= 4; ++k) EXPECT_NEAR(rows[2 * k - 1].matrix, cat[k], 1e-9);
}

TEST(CommutantProbe, ScalarsOnly) {
    Lab lab({0, {4.0}}, 0.3, 3);
    const auto r = commutant_probe(lab.fock, lab.rep.block_xi(0), 0);
    EXPECT_EQ(r.dimension, 1);
    EXPECT_EQ(r.residual, 0.0);
    EXPECT_EQ(r.span, 1u);
}

TEST(CommutantProbe, FixedVectorCommutesWithItsPolynomials) {
    Lab lab({1, {4.0}}, 0.3, 5);
    for (int degree = 0; degree <= 2; ++degree) {
        const auto r = commutant_probe(lab.fock, lab.rep.fixed_vector(0), degree);
        EXPECT_GE(r.dimension, degree + 1);
        EXPECT_LT(r.residual, 1e-10);
        EXPECT_TRUE(std::is_sorted(r.singular_values.begin(), r.singular_values.end()));
    }
}

TEST(CommutantProbe, BlockVectorRunsAndKeepsScalars) {
    Lab lab({0, {4.0}}, 0.3, 6);
    const auto r = commutant_probe(lab.fock, lab.rep.block_xi(0), 3);
    EXPECT_EQ(r.span, 15u);
    EXPECT_GE(r.dimension, 1);
    EXPECT_EQ(r.singular_values.size(), 15u);
    EXPECT_THROW(commutant_probe(lab.fock, lab.rep.block_xi(0), 6), SizeError);
    EXPECT_THROW(commutant_probe(lab.fock, lab.rep.block_xi(0), 3, ProbeBudget{10, 1000000}), SizeError);
}
