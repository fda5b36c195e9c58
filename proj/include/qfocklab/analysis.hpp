#pragma once

/**
 * @file analysis.hpp
 * @brief Generator subalgebras M_ξ = vN(s_q(ξ)): the embedding
 *        b ↦ Δ^{1/4} bΩ restricted to M_ξ, its Hilbert–Schmidt and nuclear
 *        certificates, and the fixed / non-fixed dichotomy.
 *
 * With μ = ‖Δ^{1/4}ξ‖_q², the normalized powers ξ_m = ξ^{⊗m}/√([m]_q!) form
 * an orthonormal basis of the cyclic subspace, and Δ^{1/4}ξ_m has norm
 * μ^{m/2}. Everything else is geometric series in μ.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "fock.hpp"
#include "modular.hpp"
#include "qcomb.hpp"
#include "repn.hpp"

namespace qfocklab {

/// 2√λ/(1+λ)
inline double mu_of_lambda(double lambda) { return 2.0 * std::sqrt(lambda) / (1.0 + lambda); }

/// Σ_j ‖P_j^1 ξ‖² + Σ_k μ(λ_k) ‖P_k^2 ξ‖², read off real coordinates.
inline double mu_mixed_formula(const Representation& rep, const HVector& xi) {
    const Eigen::VectorXcd r = rep.to_real_coordinates(xi);
    double mu = 0.0;
    for (int j = 0; j < rep.spec().n_fixed; ++j) mu += std::norm(r[j]);
    for (int k = 0; k < rep.block_count(); ++k) {
        const int lo = rep.block_offset(k);
        mu += mu_of_lambda(rep.spec().lambdas[k]) * (std::norm(r[lo]) + std::norm(r[lo + 1]));
    }
    return mu;
}

/// ⟨(2A^{1/2}/(1+A)) ξ_0, ξ_0′⟩_{H_C} for block k.
inline Complex block_cross_term(const Representation& rep, int k) {
    return hc_functional(
        rep, [](double a) { return 2.0 * std::sqrt(a) / (1.0 + a); }, rep.block_xi(k), rep.block_xi_prime(k));
}

class GeneratorSubalgebraModel {
public:
    /// Keeps references to `fock` and `md`, which must outlive the model.
    GeneratorSubalgebraModel(const TruncatedFock& fock, const ModularData& md, HVector xi)
        : fock_(&fock), md_(&md), xi_(std::move(xi)) {
        const auto& rep = fock.rep();
        if (!xi_.real) throw DomainError("ξ must be a real vector");
        if (std::abs(deformed_norm(rep, xi_) - 1.0) > 1e-10) throw DomainError("ξ must be a unit vector");
        if (&md.fock() != &fock) throw DomainError("modular data belongs to a different Fock space");
        if (fock.cutoff() < 1) throw DomainError("cutoff must be at least 1");
        const double q = fock.q();
        for (int m = 0; m <= fock.cutoff(); ++m) {
            FockVector v = tensor_power(fock, xi_, m);
            v *= 1.0 / std::sqrt(q_factorial(m).evaluate(q));
            basis_.push_back(std::move(v));
        }
        const auto quarter = delta_power(md, 0.25);
        for (const auto& b : basis_) coefficients_.push_back(norm_q(fock, quarter.apply(b)));
        mu_ = coefficients_[1] * coefficients_[1];
    }

    const TruncatedFock& fock() const noexcept { return *fock_; }
    const ModularData& modular() const noexcept { return *md_; }
    const HVector& xi() const noexcept { return xi_; }
    int cutoff() const noexcept { return fock_->cutoff(); }

    /// ξ^{⊗m}/√([m]_q!) for m = 0..N.
    const std::vector<FockVector>& basis() const noexcept { return basis_; }

    /// μ = ‖Δ^{1/4}ξ‖_q², from the level-1 numeric norm.
    double mu() const noexcept { return mu_; }

    /// ‖Δ^{1/4}ξ_m‖_q for m = 0..N.
    const std::vector<double>& coefficients() const noexcept { return coefficients_; }

private:
    const TruncatedFock* fock_;
    const ModularData* md_;
    HVector xi_;
    std::vector<FockVector> basis_;
    std::vector<double> coefficients_;
    double mu_ = 0.0;
};

inline std::vector<double> embedding_coefficients(const GeneratorSubalgebraModel& model) {
    return model.coefficients();
}

inline constexpr double kFixedMuGuard = 1e-12;

struct HsCertificate {
    double partial = 0.0;                    ///< Σ_{m≤N} μ^m
    double partial_from_coefficients = 0.0;  ///< Σ_{m≤N} ‖Δ^{1/4}ξ_m‖_q²
    double closed = 0.0;                     ///< 1/(1−μ)
    double tail = 0.0;                       ///< μ^{N+1}/(1−μ)
    double identity_residual = 0.0;          ///< |closed − partial − tail|
    double max_coefficient = 0.0;            ///< operator norm of the restricted embedding
};

inline HsCertificate hs_norm_certificate(const GeneratorSubalgebraModel& model) {
    const double mu = model.mu();
    if (mu >= 1.0 - kFixedMuGuard) throw CertificateUnavailable();
    const int n = model.cutoff();
    HsCertificate c;
    double p = 1.0;
    for (int m = 0; m <= n; ++m, p *= mu) c.partial += p;
    for (double x : model.coefficients()) {
        c.partial_from_coefficients += x * x;
        c.max_coefficient = std::max(c.max_coefficient, x);
    }
    c.closed = 1.0 / (1.0 - mu);
    c.tail = std::pow(mu, n + 1) / (1.0 - mu);
    c.identity_residual = std::abs(c.closed - c.partial - c.tail);
    return c;
}

struct NuclearCertificate {
    double partial = 0.0;             ///< Σ_{m≤N} μ^{m/2}
    double closed = 0.0;              ///< 1/(1−√μ)
    double tail = 0.0;                ///< μ^{(N+1)/2}/(1−√μ)
    double identity_residual = 0.0;   ///< |closed − partial − tail|
    double max_functional_ratio = 0.0; ///< max over samples and m of |ψ_m(b)| / ‖b‖
    int samples = 0;
};

namespace detail {

/// Lower bound for ‖p(s_q(ξ))‖: the spectrum of s_q(ξ) is the interval
/// [−2/√(1−q), 2/√(1−q)] and contains the eigenvalues of the truncated
/// Jacobi matrix, so both suprema below are attained values of |p|.
inline double polynomial_norm_lower_bound(std::span<const double> coeffs, double q, int jacobi_size) {
    auto eval = [&](double x) {
        double acc = 0.0;
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
        return std::abs(acc);
    };
    const double edge = 2.0 / std::sqrt(1.0 - q);
    double best = 0.0;
    constexpr int grid = 4096;
    for (int i = 0; i <= grid; ++i) best = std::max(best, eval(-edge + 2.0 * edge * i / grid));
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(jacobi_size, jacobi_size);
    for (int m = 1; m < jacobi_size; ++m) jac(m - 1, m) = jac(m, m - 1) = std::sqrt(q_integer(m).evaluate(q));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac, Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) best = std::max(best, eval(es.eigenvalues()[i]));
    return best;
}

} // namespace detail

/// Series bound for the nuclear norm, plus a sampled check of ‖ψ_m‖ ≤ 1 with
/// ψ_m(b) = ⟨ξ_m, bΩ⟩_q on random polynomials b = p(s_q(ξ)) of degree ≤ N.
inline NuclearCertificate nuclear_certificate(const GeneratorSubalgebraModel& model, int samples = 100,
                                              std::uint64_t seed = 0) {
    const double mu = model.mu();
    if (mu >= 1.0 - kFixedMuGuard) throw CertificateUnavailable();
    const int n = model.cutoff();
    const double root = std::sqrt(mu);
    NuclearCertificate c;
    double p = 1.0;
    for (int m = 0; m <= n; ++m, p *= root) c.partial += p;
    c.closed = 1.0 / (1.0 - root);
    c.tail = std::pow(root, n + 1) / (1.0 - root);
    c.identity_residual = std::abs(c.closed - c.partial - c.tail);

    const auto& fock = model.fock();
    const auto s = field(fock, model.xi());
    // ψ_m(p(s)) = Σ_k p_k ⟨ξ_m, s^k Ω⟩_q
    const auto& basis = model.basis();
    Eigen::MatrixXd moments(n + 1, n + 1);
    FockVector v = FockVector::vacuum(fock);
    for (int k = 0; k <= n; ++k) {
        if (k) v = s.apply(v);
        for (int m = 0; m <= n; ++m) moments(m, k) = inner_q(fock, basis[m], v).real();
    }

    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x6e75636cu};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> g;
    std::uniform_int_distribution<int> degree(0, n);
    for (int t = 0; t < samples; ++t) {
        Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(n + 1);
        const int deg = degree(rng);
        for (int k = 0; k <= deg; ++k) coeffs[k] = g(rng);
        const double norm_b = detail::polynomial_norm_lower_bound(
            std::span<const double>(coeffs.data(), static_cast<std::size_t>(deg) + 1), fock.q(), n + 1);
        if (norm_b == 0.0) continue;
        c.max_functional_ratio = std::max(c.max_functional_ratio, (moments * coeffs).cwiseAbs().maxCoeff() / norm_b);
        ++c.samples;
    }
    return c;
}

enum class Verdict { Fixed, NonFixed, Indeterminate };

inline const char* verdict_label(Verdict v) {
    switch (v) {
    case Verdict::Fixed:
        return "fixed: expectation-exists";
    case Verdict::NonFixed:
        return "non-fixed: quasi-split-certificate";
    case Verdict::Indeterminate:
        return "indeterminate";
    }
    return "indeterminate";
}

inline constexpr double kVerdictEpsilon = 1e-9;
inline constexpr double kFixedTolerance = 1e-10;

struct AnalysisReport {
    double mu = 0.0;                 ///< ‖Δ^{1/4}ξ‖_q² from the Fock space
    double mu_closed = 0.0;          ///< ⟨(2A^{1/2}/(1+A))ξ, ξ⟩_{H_C}
    double mu_mixed = 0.0;           ///< Σ‖P_j^1ξ‖² + Σ μ_k‖P_k^2ξ‖²
    double non_fixed_norm = 0.0;     ///< ‖ξ − P_fix ξ‖_U
    double mu_deficit = 0.0;         ///< Σ_k (1 − μ_k)‖P_k^2 ξ‖², equal to 1 − μ for unit ξ
    Verdict verdict = Verdict::Indeterminate;
    bool dichotomy_consistent = true;
    std::vector<double> coefficients;
    std::optional<HsCertificate> hs;
    std::optional<NuclearCertificate> nuclear;
    double tail_bound = 0.0;
    std::string conclusion;
};

inline AnalysisReport split_verdict(const GeneratorSubalgebraModel& model, int nuclear_samples = 100,
                                    std::uint64_t seed = 0) {
    const auto& rep = model.fock().rep();
    const auto& xi = model.xi();
    AnalysisReport r;
    r.mu = model.mu();
    r.mu_closed = hc_functional(
                      rep, [](double a) { return 2.0 * std::sqrt(a) / (1.0 + a); }, xi, xi)
                      .real();
    r.mu_mixed = mu_mixed_formula(rep, xi);
    r.non_fixed_norm = deformed_norm(rep, xi - fixed_projection(rep, xi));
    const Eigen::VectorXcd real = rep.to_real_coordinates(xi);
    for (int k = 0; k < rep.block_count(); ++k) {
        const int lo = rep.block_offset(k);
        r.mu_deficit +=
            (1.0 - mu_of_lambda(rep.spec().lambdas[k])) * (std::norm(real[lo]) + std::norm(real[lo + 1]));
    }
    r.coefficients = model.coefficients();

    const bool below = r.mu < 1.0 - kVerdictEpsilon;
    const bool fixed = r.non_fixed_norm <= kFixedTolerance;
    if (below && !fixed) r.verdict = Verdict::NonFixed;
    else if (fixed && !below) r.verdict = Verdict::Fixed;
    else r.verdict = Verdict::Indeterminate;
    // 1 − μ = Σ_k (1 − μ_k)‖P_k^2 ξ‖², positive exactly when ξ has a block component.
    r.dichotomy_consistent = !(below && fixed) && ((r.mu_deficit > 0.0) == (r.non_fixed_norm > 0.0)) &&
                             std::abs((1.0 - r.mu) - r.mu_deficit) < 1e-12;

    switch (r.verdict) {
    case Verdict::NonFixed:
        r.hs = hs_norm_certificate(model);
        r.nuclear = nuclear_certificate(model, nuclear_samples, seed);
        r.tail_bound = r.hs->tail;
        r.conclusion =
            "Phi_2 restricted to M_xi is Hilbert-Schmidt and nuclear (series bounds verified up to the cutoff), "
            "so M_xi in M_q is quasi-split. If M_q is a factor of type III, the inclusion is moreover split; "
            "the type of M_q is not decided here.";
        break;
    case Verdict::Fixed:
        r.conclusion = "xi is fixed by U_t: M_xi lies in the centralizer and admits a state-preserving "
                       "conditional expectation; no split certificate applies.";
        break;
    case Verdict::Indeterminate:
        r.conclusion = "mu is within 1e-9 of 1 while xi is not numerically fixed; no verdict.";
        break;
    }
    return r;
}

struct MomentRow {
    int n = 0;
    double matrix = 0.0;      ///< Re ⟨Ω, s_q(ξ)^n Ω⟩_q
    double imag = 0.0;
    double oracle = 0.0;      ///< Σ_V q^{cr(V)}, 0 for odd n
    double difference = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Vacuum moments of s_q(ξ) against the pair-partition crossing count.
inline std::vector<MomentRow> moment_report(const TruncatedFock& fock, const HVector& xi, int n_max) {
    if (n_max < 0) throw DomainError("n_max must be nonnegative");
    if (n_max > fock.cutoff())
        throw SizeError("n_max = " + std::to_string(n_max) + " exceeds the cutoff N = " + std::to_string(fock.cutoff()));
    if (n_max > kPairingGuard)
        throw SizeError("n_max = " + std::to_string(n_max) + " exceeds the pairing guard " +
                        std::to_string(kPairingGuard));
    const auto s = field(fock, xi);
    FockVector v = FockVector::vacuum(fock);
    std::vector<MomentRow> rows;
    for (int n = 1; n <= n_max; ++n) {
        v = s.apply(v);
        MomentRow row;
        row.n = n;
        row.matrix = v.levels[0][0].real();
        row.imag = v.levels[0][0].imag();
        row.oracle = n % 2 ? 0.0 : moment_polynomial(n).evaluate(fock.q());
        if (n % 2) {
            row.difference = std::abs(v.levels[0][0]);
            row.tolerance = 1e-12;
        } else {
            row.difference = std::abs(v.levels[0][0] - Complex(row.oracle));
            row.tolerance = 1e-9;
        }
        row.pass = row.difference < row.tolerance;
        rows.push_back(row);
    }
    return rows;
}

struct ProbeBudget {
    std::size_t max_span = 1024;
    std::size_t max_matrix_entries = 20000000;
};

struct ProbeResult {
    int degree = 0;
    std::size_t span = 0;
    int dimension = 0;
    double residual = 0.0;
    std::vector<double> singular_values;  ///< ascending
};

inline constexpr double kProbeNullThreshold = 1e-8;

/// Numerical null space of X ↦ [X, s_q(ξ)] over Wick words of degree ≤ D in
/// the real basis letters. Commutators are compared on source levels
/// ≤ N − D − 1, where neither term reaches the cutoff; coefficients are taken
/// in a basis orthonormal for X ↦ ‖XΩ‖_q.
inline ProbeResult commutant_probe(const TruncatedFock& fock, const HVector& xi, int degree,
                                   ProbeBudget budget = {}) {
    if (degree < 0) throw DomainError("probe degree must be nonnegative");
    const int top = fock.cutoff() - degree - 1;
    if (top < 0) throw SizeError("probe degree " + std::to_string(degree) + " needs cutoff ≥ " +
                                 std::to_string(degree + 1));
    const auto& rep = fock.rep();
    const int d = rep.dim();

    std::vector<std::vector<int>> words{{}};
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (static_cast<int>(words[i].size()) == degree) continue;
        for (int a = 0; a < d; ++a) {
            auto w = words[i];
            w.push_back(a);
            words.push_back(std::move(w));
            if (words.size() > budget.max_span)
                throw SizeError("commutant probe span exceeds " + std::to_string(budget.max_span));
        }
    }

    // Row layout: whitened blocks (source ≤ top, target in source ± (D+1)).
    std::vector<std::pair<int, int>> layout;
    std::size_t rows = 0;
    for (int src = 0; src <= top; ++src)
        for (int tgt = std::max(0, src - degree - 1); tgt <= src + degree + 1; ++tgt) {
            layout.emplace_back(src, tgt);
            rows += fock.level_size(src) * fock.level_size(tgt);
        }
    if (rows * words.size() > budget.max_matrix_entries)
        throw SizeError("commutant probe matrix exceeds " + std::to_string(budget.max_matrix_entries) + " entries");

    const auto s = field(fock, xi);
    const auto omega = FockVector::vacuum(fock);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(words.size()));
    std::vector<FockVector> images;
    for (std::size_t c = 0; c < words.size(); ++c) {
        std::vector<HVector> letters;
        for (int a : words[c]) letters.push_back(rep.unit_real(a));
        const auto w = wick_word(fock, letters);
        images.push_back(w.apply(omega));
        const auto comm = w * s - s * w;
        Eigen::Index row = 0;
        for (const auto& [src, tgt] : layout) {
            const auto rs = static_cast<Eigen::Index>(fock.level_size(src));
            const auto rt = static_cast<Eigen::Index>(fock.level_size(tgt));
            if (const SparseBlock* b = comm.block(src, tgt)) {
                const Eigen::MatrixXcd white = fock.unwhiten_right(src, fock.whiten(tgt, Eigen::MatrixXcd(*b)));
                m.col(static_cast<Eigen::Index>(c)).segment(row, rs * rt) =
                    Eigen::Map<const Eigen::VectorXcd>(white.data(), rs * rt);
            }
            row += rs * rt;
        }
    }

    const auto span = static_cast<Eigen::Index>(words.size());
    Eigen::MatrixXcd k(span, span);
    for (Eigen::Index i = 0; i < span; ++i)
        for (Eigen::Index j = i; j < span; ++j) {
            k(i, j) = inner_q(fock, images[i], images[j]);
            k(j, i) = std::conj(k(i, j));
        }
    Eigen::LLT<Eigen::MatrixXcd> llt(k);
    if (llt.info() != Eigen::Success) throw NumericalError("Wick words are numerically dependent");
    // columns in the orthonormal basis: M L^{-H}
    const Eigen::MatrixXcd mo = llt.matrixU().solve<Eigen::OnTheRight>(m);

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(mo);
    ProbeResult out;
    out.degree = degree;
    out.span = words.size();
    const auto& sv = svd.singularValues();
    out.singular_values.assign(sv.data(), sv.data() + sv.size());
    // A wide matrix has extra null directions with no singular value.
    for (Eigen::Index i = sv.size(); i < span; ++i) out.singular_values.push_back(0.0);
    std::sort(out.singular_values.begin(), out.singular_values.end());
    out.dimension = static_cast<int>(std::count_if(out.singular_values.begin(), out.singular_values.end(),
                                                   [](double x) { return x < kProbeNullThreshold; }));
    out.residual = out.singular_values.empty() ? 0.0 : out.singular_values.front();
    return out;
}

} // namespace qfocklab
