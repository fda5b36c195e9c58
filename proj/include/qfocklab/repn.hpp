#pragma once

/**
 * @file repn.hpp
 * @brief Finite-dimensional orthogonal representations of R: fixed
 *        directions plus 2x2 rotation blocks with parameters λ_k > 1.
 *
 * Two coordinate systems are in play:
 *  - real coordinates: coefficients of ς_1..ς_{N1}, ξ_1, ξ_2, ..., ξ_{2N2-1}, ξ_{2N2}
 *    in the complexification H_C;
 *  - eigen coordinates: coefficients in the ⟨·,·⟩_U-orthonormal basis of
 *    A-eigenvectors ς_j, ζ_{2k-1}, ζ_{2k}.
 *
 * Both use the same index layout: the fixed directions first, then two slots
 * per block. Eigen coordinates are the storage basis everywhere downstream,
 * since A, U_t and Δ are diagonal there.
 */

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace qfocklab {

using Complex = std::complex<double>;

struct RepresentationSpec {
    int n_fixed = 0;
    std::vector<double> lambdas;

    int dim() const noexcept { return n_fixed + 2 * static_cast<int>(lambdas.size()); }

    void validate() const {
        if (n_fixed < 0) throw DomainError("n_fixed must be nonnegative");
        for (double l : lambdas)
            if (!(l > 1.0) || !std::isfinite(l)) throw DomainError("λ must exceed 1");
        if (dim() < 1) throw DomainError("representation must have dimension >= 1");
    }
};

/// Role of one eigen-basis letter.
enum class LetterKind {
    Fixed,       ///< ς_j, A = 1
    Contracting, ///< ζ_{2k-1}, A = 1/λ_k
    Expanding,   ///< ζ_{2k},   A = λ_k
};

struct Letter {
    LetterKind kind;
    int block;      ///< block index k (0-based), -1 for fixed letters
    double lambda;  ///< λ_k, 1 for fixed letters
    double a;       ///< eigenvalue of A on this letter
    int partner;    ///< index of the other letter of the block (self for fixed)
};

/// Vector of H in eigen coordinates. `real` marks membership in H_R.
struct HVector {
    Eigen::VectorXcd coords;
    bool real = false;

    Eigen::Index size() const noexcept { return coords.size(); }
};

class Representation {
public:
    static Representation build(RepresentationSpec spec) {
        spec.validate();
        Representation rep;
        rep.spec_ = std::move(spec);
        const int d = rep.spec_.dim();
        const int n1 = rep.spec_.n_fixed;
        rep.letters_.reserve(d);
        for (int j = 0; j < n1; ++j) rep.letters_.push_back({LetterKind::Fixed, -1, 1.0, 1.0, j});
        for (int k = 0; k < static_cast<int>(rep.spec_.lambdas.size()); ++k) {
            const double l = rep.spec_.lambdas[k];
            const int lo = n1 + 2 * k;
            rep.letters_.push_back({LetterKind::Contracting, k, l, 1.0 / l, lo + 1});
            rep.letters_.push_back({LetterKind::Expanding, k, l, l, lo});
        }

        // real -> eigen: columns are the eigen coordinates of ς_j, ξ_{2k-1}, ξ_{2k}:
        //   ξ_{2k-1} = (ζ_{2k-1} + √λ ζ_{2k}) / √(1+λ)
        //   ξ_{2k}   = -i (ζ_{2k-1} - √λ ζ_{2k}) / √(1+λ)
        // eigen -> real: ζ_{2k-1} = (√(λ+1)/2)(ξ_{2k-1} + iξ_{2k}),
        //                ζ_{2k}   = (√(1/λ+1)/2)(ξ_{2k-1} - iξ_{2k}).
        const Complex I(0.0, 1.0);
        rep.to_eigen_ = Eigen::MatrixXcd::Zero(d, d);
        rep.to_real_ = Eigen::MatrixXcd::Zero(d, d);
        for (int j = 0; j < n1; ++j) {
            rep.to_eigen_(j, j) = 1.0;
            rep.to_real_(j, j) = 1.0;
        }
        for (int k = 0; k < static_cast<int>(rep.spec_.lambdas.size()); ++k) {
            const double l = rep.spec_.lambdas[k];
            const int lo = n1 + 2 * k, hi = lo + 1;
            const double s = 1.0 / std::sqrt(1.0 + l);
            rep.to_eigen_(lo, lo) = s;
            rep.to_eigen_(hi, lo) = std::sqrt(l) * s;
            rep.to_eigen_(lo, hi) = -I * s;
            rep.to_eigen_(hi, hi) = I * std::sqrt(l) * s;

            const double c1 = std::sqrt(l + 1.0) / 2.0;
            const double c2 = std::sqrt(1.0 / l + 1.0) / 2.0;
            rep.to_real_(lo, lo) = c1;
            rep.to_real_(hi, lo) = I * c1;
            rep.to_real_(lo, hi) = c2;
            rep.to_real_(hi, hi) = -I * c2;
        }
        return rep;
    }

    const RepresentationSpec& spec() const noexcept { return spec_; }
    int dim() const noexcept { return static_cast<int>(letters_.size()); }
    const std::vector<Letter>& letters() const noexcept { return letters_; }
    const Letter& letter(int i) const { return letters_.at(i); }
    int block_count() const noexcept { return static_cast<int>(spec_.lambdas.size()); }

    /// Eigen-coordinate index of ζ_{2k-1} (A = 1/λ_k); ζ_{2k} is the next one.
    int block_offset(int k) const {
        if (k < 0 || k >= block_count()) throw DomainError("no rotation block " + std::to_string(k));
        return spec_.n_fixed + 2 * k;
    }

    Eigen::VectorXd generator_eigenvalues() const {
        Eigen::VectorXd a(dim());
        for (int i = 0; i < dim(); ++i) a[i] = letters_[i].a;
        return a;
    }

    /// A in eigen coordinates (diagonal).
    Eigen::MatrixXcd generator() const { return generator_eigenvalues().cast<Complex>().asDiagonal(); }

    /// Maps real coordinates to eigen coordinates.
    const Eigen::MatrixXcd& real_to_eigen() const noexcept { return to_eigen_; }
    const Eigen::MatrixXcd& eigen_to_real() const noexcept { return to_real_; }

    /// A in real coordinates, assembled directly from the block formula
    /// A(k) = ½[[λ+1/λ, i(λ-1/λ)], [-i(λ-1/λ), λ+1/λ]] (not via the eigenbasis).
    Eigen::MatrixXcd generator_real() const {
        const int d = dim();
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(d, d);
        const Complex I(0.0, 1.0);
        for (int k = 0; k < block_count(); ++k) {
            const double l = spec_.lambdas[k];
            const int lo = block_offset(k);
            a(lo, lo) = 0.5 * (l + 1.0 / l);
            a(lo, lo + 1) = 0.5 * I * (l - 1.0 / l);
            a(lo + 1, lo) = -0.5 * I * (l - 1.0 / l);
            a(lo + 1, lo + 1) = 0.5 * (l + 1.0 / l);
        }
        return a;
    }

    /// Builds a vector of H_R from real coefficients of ς_j, ξ_{2k-1}, ξ_{2k}.
    HVector from_real(std::span<const double> coords) const {
        if (static_cast<int>(coords.size()) != dim())
            throw DomainError("real coordinate vector has length " + std::to_string(coords.size()) +
                              ", representation dimension is " + std::to_string(dim()));
        Eigen::VectorXcd r(dim());
        for (int i = 0; i < dim(); ++i) r[i] = coords[i];
        return {to_eigen_ * r, true};
    }

    HVector from_real(std::initializer_list<double> coords) const {
        return from_real(std::span<const double>(coords.begin(), coords.size()));
    }

    /// Arbitrary vector of H_C given in real coordinates (complex coefficients allowed).
    HVector from_real_coordinates(const Eigen::VectorXcd& r) const {
        check_dim(r.size());
        return {to_eigen_ * r, r.imag().cwiseAbs().maxCoeff() == 0.0};
    }

    /// Vector given directly in eigen coordinates; tagged real when it passes the H_R test.
    HVector from_eigen(const Eigen::VectorXcd& c) const {
        check_dim(c.size());
        HVector v{c, false};
        v.real = is_real(v);
        return v;
    }

    Eigen::VectorXcd to_real_coordinates(const HVector& x) const {
        check_dim(x.size());
        return to_real_ * x.coords;
    }

    /// Membership in H_R: real coordinates have vanishing imaginary parts.
    bool is_real(const HVector& x, double tol = 1e-12) const {
        if (x.size() == 0) return true;
        return to_real_coordinates(x).imag().cwiseAbs().maxCoeff() <= tol;
    }

    HVector fixed_vector(int j) const {
        if (j < 0 || j >= spec_.n_fixed) throw DomainError("no fixed direction " + std::to_string(j));
        return unit_real(j);
    }

    /// ξ_{2k-1} of block k (ξ_0 when the block is singled out).
    HVector block_xi(int k) const { return unit_real(block_offset(k)); }
    /// ξ_{2k} of block k (ξ_0').
    HVector block_xi_prime(int k) const { return unit_real(block_offset(k) + 1); }

    /// Eigen-basis letter i (ζ or ς).
    HVector basis_vector(int i) const {
        check_index(i);
        Eigen::VectorXcd c = Eigen::VectorXcd::Zero(dim());
        c[i] = 1.0;
        return from_eigen(c);
    }

    /// Real basis vector i (ς_j or ξ_m) as an element of H_R.
    HVector unit_real(int i) const {
        check_index(i);
        return {to_eigen_.col(i), true};
    }

    void check_dim(Eigen::Index n) const {
        if (n != dim())
            throw DomainError("vector dimension " + std::to_string(n) + " does not match representation dimension " +
                              std::to_string(dim()));
    }

private:
    void check_index(int i) const {
        if (i < 0 || i >= dim()) throw DomainError("basis index out of range");
    }

    RepresentationSpec spec_;
    std::vector<Letter> letters_;
    Eigen::MatrixXcd to_eigen_;
    Eigen::MatrixXcd to_real_;
};

inline Representation build(RepresentationSpec spec) { return Representation::build(std::move(spec)); }

/// Diagonal phase of U_t on eigen letter i: λ^{-it} on ζ_{2k-1}, λ^{it} on ζ_{2k}, 1 on ς_j.
inline Complex letter_phase(const Letter& l, double t) {
    switch (l.kind) {
    case LetterKind::Fixed:
        return 1.0;
    case LetterKind::Contracting:
        return std::polar(1.0, -t * std::log(l.lambda));
    case LetterKind::Expanding:
        return std::polar(1.0, t * std::log(l.lambda));
    }
    return 1.0;
}

/// U_t in eigen coordinates.
inline Eigen::MatrixXcd unitary_at(const Representation& rep, double t) {
    Eigen::VectorXcd phases(rep.dim());
    for (int i = 0; i < rep.dim(); ++i) phases[i] = letter_phase(rep.letter(i), t);
    return phases.asDiagonal();
}

/// U_t in real coordinates.
inline Eigen::MatrixXcd unitary_at_real(const Representation& rep, double t) {
    return rep.eigen_to_real() * unitary_at(rep, t) * rep.real_to_eigen();
}

inline HVector evolve(const Representation& rep, const HVector& x, double t) {
    rep.check_dim(x.size());
    return {unitary_at(rep, t) * x.coords, x.real};
}

/// ⟨x, y⟩_U, conjugate-linear in x. The eigenbasis is ⟨·,·⟩_U-orthonormal.
inline Complex deformed_inner(const Representation& rep, const HVector& x, const HVector& y) {
    rep.check_dim(x.size());
    rep.check_dim(y.size());
    return x.coords.dot(y.coords);
}

inline double deformed_norm(const Representation& rep, const HVector& x) {
    return std::sqrt(std::real(deformed_inner(rep, x, x)));
}

/// ⟨x, y⟩_{H_C}, computed in real coordinates.
inline Complex hc_inner(const Representation& rep, const HVector& x, const HVector& y) {
    return rep.to_real_coordinates(x).dot(rep.to_real_coordinates(y));
}

/// ⟨f(A) x, y⟩_{H_C} with f applied to the real-coordinate generator by its
/// own Hermitian eigendecomposition, independently of the stored eigenbasis.
template <class Fn>
Complex hc_functional(const Representation& rep, Fn&& f, const HVector& x, const HVector& y) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rep.generator_real());
    Eigen::VectorXcd fv(rep.dim());
    for (int i = 0; i < rep.dim(); ++i) fv[i] = f(es.eigenvalues()[i]);
    const Eigen::MatrixXcd fa = es.eigenvectors() * fv.asDiagonal() * es.eigenvectors().adjoint();
    return (fa * rep.to_real_coordinates(x)).dot(rep.to_real_coordinates(y));
}

/// Component of x in the eigenvalue-1 subspace of A.
inline HVector fixed_projection(const Representation& rep, const HVector& x) {
    rep.check_dim(x.size());
    HVector out = x;
    for (int i = 0; i < rep.dim(); ++i)
        if (rep.letter(i).kind != LetterKind::Fixed) out.coords[i] = 0.0;
    return out;
}

/// Component of x in rotation block k.
inline HVector block_projection(const Representation& rep, const HVector& x, int k) {
    rep.check_dim(x.size());
    const int lo = rep.block_offset(k);
    HVector out{Eigen::VectorXcd::Zero(rep.dim()), x.real};
    out.coords[lo] = x.coords[lo];
    out.coords[lo + 1] = x.coords[lo + 1];
    return out;
}

inline HVector operator+(const HVector& a, const HVector& b) { return {a.coords + b.coords, a.real && b.real}; }
inline HVector operator-(const HVector& a, const HVector& b) { return {a.coords - b.coords, a.real && b.real}; }
inline HVector operator*(double s, const HVector& a) { return {s * a.coords, a.real}; }
inline HVector operator*(Complex s, const HVector& a) { return {s * a.coords, a.real && s.imag() == 0.0}; }

} // namespace qfocklab
