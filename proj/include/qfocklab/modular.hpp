#pragma once

/**
 * @file modular.hpp
 * @brief Tomita–Takesaki data of the vacuum state on the truncated Fock space.
 *
 * The eigen-basis words diagonalize Δ and F(U_t): a word's Δ-eigenvalue is
 * the product of the A^{-1}-eigenvalues of its letters, and its U_t-phase is
 * the product of the letter phases.
 *
 * J maps a word to the reversed word with every block letter replaced by its
 * partner, then conjugates coordinates. On a real letter ξ with eigen
 * coordinates (c, √λ c̄) the map A^{-1/2} gives (√λ c, c̄), which is exactly
 * "swap the pair and conjugate" with unit scale. The scale table is kept
 * anyway so the factored form stays explicit.
 */

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "errors.hpp"
#include "fock.hpp"
#include "repn.hpp"

namespace qfocklab {

class ModularData {
public:
    /// Keeps a reference to `fock`, which must outlive this object.
    explicit ModularData(const TruncatedFock& fock) : fock_(&fock) {
        const auto& rep = fock.rep();
        const int d = rep.dim();
        std::vector<double> letter_log(d);
        std::vector<int> letter_swap(d);
        for (int i = 0; i < d; ++i) {
            letter_log[i] = -std::log(rep.letter(i).a);
            letter_swap[i] = rep.letter(i).partner;
        }
        for (int n = 0; n <= fock.cutoff(); ++n) {
            const std::size_t size = fock.level_size(n);
            Eigen::VectorXd logs(static_cast<Eigen::Index>(size));
            std::vector<std::size_t> perm(size);
            std::vector<int> word(n), image(n);
            for (std::size_t w = 0; w < size; ++w) {
                double acc = 0.0;
                for (int p = 0; p < n; ++p) {
                    word[p] = fock.letter(n, w, p);
                    acc += letter_log[word[p]];
                }
                for (int p = 0; p < n; ++p) image[p] = letter_swap[word[n - 1 - p]];
                logs[static_cast<Eigen::Index>(w)] = acc;
                perm[w] = fock.word_index(image);
            }
            log_delta_.push_back(std::move(logs));
            j_perm_.push_back(std::move(perm));
            j_scale_.push_back(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(size)));
        }
    }

    const TruncatedFock& fock() const noexcept { return *fock_; }

    /// log of the Δ-eigenvalue of every word at level n.
    const Eigen::VectorXd& log_delta(int n) const { return log_delta_.at(n); }

    /// Index of J's image word for each word at level n.
    const std::vector<std::size_t>& j_permutation(int n) const { return j_perm_.at(n); }
    const Eigen::VectorXd& j_scale(int n) const { return j_scale_.at(n); }

    /// Largest |log Δ-eigenvalue| over all levels, for overflow checks.
    double max_abs_log_delta() const {
        double m = 0.0;
        for (const auto& l : log_delta_)
            if (l.size()) m = std::max(m, l.cwiseAbs().maxCoeff());
        return m;
    }

private:
    const TruncatedFock* fock_;
    std::vector<Eigen::VectorXd> log_delta_;
    std::vector<std::vector<std::size_t>> j_perm_;
    std::vector<Eigen::VectorXd> j_scale_;
};

inline ModularData build_modular(const TruncatedFock& fock) { return ModularData(fock); }

namespace detail {

inline GradedOperator diagonal_operator(const TruncatedFock& fock, const std::vector<Eigen::VectorXcd>& diag) {
    GradedOperator op(fock.cutoff());
    for (int n = 0; n <= fock.cutoff(); ++n) {
        const auto size = static_cast<Eigen::Index>(fock.level_size(n));
        SparseBlock b(size, size);
        b.reserve(Eigen::VectorXi::Constant(size, 1));
        for (Eigen::Index i = 0; i < size; ++i) b.insert(i, i) = diag[n][i];
        b.makeCompressed();
        op.add_block(n, n, b);
    }
    return op;
}

} // namespace detail

/// Δ^z, diagonal with entries exp(z · log Δ-eigenvalue).
inline GradedOperator delta_power(const ModularData& md, Complex z) {
    const auto& fock = md.fock();
    if (std::abs(z.real()) * md.max_abs_log_delta() > 700.0)
        throw NumericalError("Δ^z overflows: |Re z| · max|log Δ| exceeds 700");
    std::vector<Eigen::VectorXcd> diag;
    for (int n = 0; n <= fock.cutoff(); ++n)
        diag.push_back((z * md.log_delta(n).cast<Complex>().array()).exp().matrix());
    return detail::diagonal_operator(fock, diag);
}

/// J_φ as a conjugate-linear operator.
inline GradedOperator modular_conjugation(const ModularData& md) {
    const auto& fock = md.fock();
    GradedOperator op(fock.cutoff(), true);
    for (int n = 0; n <= fock.cutoff(); ++n) {
        const auto size = static_cast<Eigen::Index>(fock.level_size(n));
        const auto& perm = md.j_permutation(n);
        const auto& scale = md.j_scale(n);
        SparseBlock b(size, size);
        b.reserve(Eigen::VectorXi::Constant(size, 1));
        for (Eigen::Index w = 0; w < size; ++w) b.insert(static_cast<Eigen::Index>(perm[w]), w) = scale[w];
        b.makeCompressed();
        op.add_block(n, n, b);
    }
    return op;
}

/// S_φ = J_φ Δ^{1/2}.
inline GradedOperator tomita_operator(const ModularData& md) {
    return modular_conjugation(md) * delta_power(md, 0.5);
}

/// F(U_t) = id ⊕ ⊕_n U_t^{⊗n}.
inline GradedOperator flow_unitary(const ModularData& md, double t) {
    const auto& fock = md.fock();
    const auto& rep = fock.rep();
    std::vector<Complex> phase(rep.dim());
    for (int i = 0; i < rep.dim(); ++i) phase[i] = letter_phase(rep.letter(i), t);
    std::vector<Eigen::VectorXcd> diag;
    for (int n = 0; n <= fock.cutoff(); ++n) {
        Eigen::VectorXcd v(static_cast<Eigen::Index>(fock.level_size(n)));
        for (std::size_t w = 0; w < fock.level_size(n); ++w) {
            Complex acc = 1.0;
            for (int p = 0; p < n; ++p) acc *= phase[fock.letter(n, w, p)];
            v[static_cast<Eigen::Index>(w)] = acc;
        }
        diag.push_back(std::move(v));
    }
    return detail::diagonal_operator(fock, diag);
}

struct NormComparison {
    double numeric = 0.0;
    double closed_form = 0.0;
};

/// ‖Δ^{1/4}ξ‖_q against sqrt⟨(2A^{1/2}/(1+A))ξ, ξ⟩_{H_C}.
inline NormComparison delta_quarter_norm(const ModularData& md, const HVector& xi) {
    const auto& fock = md.fock();
    if (!xi.real) throw DomainError("Δ^{1/4} norm formula needs a real vector");
    if (fock.cutoff() < 1) throw DomainError("cutoff must be at least 1");
    const FockVector v = tensor_word(fock, std::span<const HVector>(&xi, 1));
    const double numeric = norm_q(fock, delta_power(md, 0.25).apply(v));
    const Complex closed = hc_functional(
        fock.rep(), [](double a) { return 2.0 * std::sqrt(a) / (1.0 + a); }, xi, xi);
    return {numeric, std::sqrt(closed.real())};
}

struct DeltaAlphaNorm {
    double numeric = 0.0;      ///< ‖Δ^α ξ_0‖_q
    double closed_form = 0.0;  ///< √((λ^{2α} + λ^{1−2α})/(1+λ))
    double beta_spread = 0.0;  ///< max over β of |‖Δ^{α+iβ}ξ_0‖_q − ‖Δ^α ξ_0‖_q|
};

/// ‖Δ^{α+iβ} ξ_0‖_q for the ξ_0 of block k, checked for independence of β.
inline DeltaAlphaNorm delta_alpha_norm_xi0(const ModularData& md, double alpha, int block,
                                           std::span<const double> betas = std::vector<double>{0.0, 1.0, 5.0}) {
    const auto& fock = md.fock();
    const auto& rep = fock.rep();
    if (block < 0 || block >= rep.block_count()) throw DomainError("block index out of range");
    if (fock.cutoff() < 1) throw DomainError("cutoff must be at least 1");
    const double lambda = rep.spec().lambdas[block];
    const double log_l = std::log(lambda);
    if (std::abs(2.0 * alpha) * log_l > 700.0 || std::abs(1.0 - 2.0 * alpha) * log_l > 700.0)
        throw NumericalError("λ^{2α} overflows");

    const HVector xi0 = rep.block_xi(block);
    const FockVector v = tensor_word(fock, std::span<const HVector>(&xi0, 1));
    DeltaAlphaNorm out;
    out.numeric = norm_q(fock, delta_power(md, alpha).apply(v));
    out.closed_form =
        std::sqrt((std::pow(lambda, 2.0 * alpha) + std::pow(lambda, 1.0 - 2.0 * alpha)) / (1.0 + lambda));
    for (double beta : betas) {
        const double nb = norm_q(fock, delta_power(md, Complex(alpha, beta)).apply(v));
        out.beta_spread = std::max(out.beta_spread, std::abs(nb - out.numeric));
    }
    return out;
}

struct CpWitness {
    /// Σ_{l,m} ⟨a_l* a_m Ω, J x_m* x_l Ω⟩_q
    Complex pairing;
    /// ‖Σ_l J x_l J a_l Ω‖_q²
    double norm_squared = 0.0;
};

/// Both sides of the positivity computation for the map built from J x* x Ω.
/// Operators must be polynomial enough that every product stays below the
/// cutoff, otherwise truncation breaks the commutation used in between.
inline CpWitness cp_pairing_witness(const ModularData& md, std::span<const GradedOperator> a,
                                    std::span<const GradedOperator> x) {
    if (a.size() != x.size()) throw DomainError("a and x must have the same length");
    const auto& fock = md.fock();
    const auto j = modular_conjugation(md);
    const auto omega = FockVector::vacuum(fock);

    // ⟨a_l* a_m Ω, y⟩ = ⟨a_m Ω, a_l y⟩
    CpWitness out;
    for (std::size_t l = 0; l < a.size(); ++l) {
        const FockVector xl = x[l].apply(omega);
        for (std::size_t m = 0; m < a.size(); ++m) {
            const FockVector y = j.apply(apply_adjoint(fock, x[m], xl));
            out.pairing += inner_q(fock, a[m].apply(omega), a[l].apply(y));
        }
    }
    FockVector sum = FockVector::zero(fock);
    for (std::size_t l = 0; l < a.size(); ++l) sum += j.apply(x[l].apply(j.apply(a[l].apply(omega))));
    out.norm_squared = std::pow(norm_q(fock, sum), 2);
    return out;
}

} // namespace qfocklab
