#pragma once

/**
 * @file fock.hpp
 * @brief Truncated q-Fock space over a Representation.
 *
 * Level n carries the d^n words over the eigen-basis letters. Word indices
 * are base-d numbers with the leftmost letter most significant, so that
 * prepending letter a to a level-n word w gives a * d^n + w.
 *
 * Words with different letter multisets are ⟨·,·⟩_q-orthogonal, so each
 * level's Gram matrix is block diagonal over multisets. Inside a block the
 * entries follow from the first-letter expansion of the permutation sum
 *
 *     ⟨a⊗w, v⟩_q = Σ_{p : v_p = a} q^p ⟨w, v with position p removed⟩_q,
 *
 * i.e. the inversion-counting backtracking over word-matching permutations
 * with the level-(n-1) Gram matrix as its memo table.
 */

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "errors.hpp"
#include "repn.hpp"

namespace qfocklab {

using SparseBlock = Eigen::SparseMatrix<Complex>;

struct FockBudget {
    std::size_t max_basis_words = 200000;
    /// Total stored Gram entries across all multiset blocks.
    std::size_t max_gram_entries = 40000000;
};

/// Square-root factorization G = R R^T of one Gram block. Cholesky first;
/// a symmetric eigendecomposition takes over when Cholesky breaks down.
class GramFactor {
public:
    GramFactor() = default;

    explicit GramFactor(Eigen::MatrixXd gram) : gram_(std::move(gram)) {
        llt_.compute(gram_);
        if (llt_.info() == Eigen::Success) {
            cholesky_ = true;
            return;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_);
        if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
            throw NumericalError("Gram block is not positive definite");
        eigvecs_ = es.eigenvectors();
        sqrt_eigs_ = es.eigenvalues().cwiseSqrt();
    }

    const Eigen::MatrixXd& gram() const noexcept { return gram_; }
    bool cholesky() const noexcept { return cholesky_; }
    Eigen::Index size() const noexcept { return gram_.rows(); }

    /// G^{-1} X
    Eigen::MatrixXcd solve(const Eigen::MatrixXcd& x) const {
        if (cholesky_) return split([&](const Eigen::MatrixXd& r) -> Eigen::MatrixXd { return llt_.solve(r); }, x);
        const Eigen::VectorXd inv = sqrt_eigs_.array().square().inverse();
        return eigvecs_ * (inv.asDiagonal() * (eigvecs_.transpose() * x));
    }

    /// R^T X, so that ‖v‖_q = ‖R^T v‖_2.
    Eigen::MatrixXcd whiten(const Eigen::MatrixXcd& x) const {
        if (cholesky_)
            return split([&](const Eigen::MatrixXd& r) -> Eigen::MatrixXd { return llt_.matrixU() * r; }, x);
        return sqrt_eigs_.asDiagonal() * (eigvecs_.transpose() * x);
    }

    /// X R^{-T}
    Eigen::MatrixXcd unwhiten_right(const Eigen::MatrixXcd& x) const {
        if (cholesky_) {
            // X L^{-T} = (L^{-1} X^T)^T
            const Eigen::MatrixXcd xt = x.transpose();
            return split([&](const Eigen::MatrixXd& r) -> Eigen::MatrixXd { return llt_.matrixL().solve(r); }, xt)
                .transpose();
        }
        return (x * eigvecs_) * sqrt_eigs_.cwiseInverse().asDiagonal();
    }

private:
    // Eigen's triangular kernels do not mix real factors with complex operands.
    template <class F>
    static Eigen::MatrixXcd split(F&& f, const Eigen::MatrixXcd& x) {
        const Eigen::MatrixXd re = f(x.real().eval());
        const Eigen::MatrixXd im = f(x.imag().eval());
        Eigen::MatrixXcd out(re.rows(), re.cols());
        out.real() = re;
        out.imag() = im;
        return out;
    }

    Eigen::MatrixXd gram_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    bool cholesky_ = false;
    Eigen::MatrixXd eigvecs_;
    Eigen::VectorXd sqrt_eigs_;
};

struct GramBlock {
    std::vector<int> letter_counts;
    std::vector<int> words;   ///< word indices, ascending
    GramFactor factor;
};

struct FockLevel {
    int n = 0;
    std::size_t size = 0;
    std::vector<int> block_of;
    std::vector<int> pos_in_block;
    std::vector<GramBlock> blocks;
};

struct GramDiagnostics {
    int level = 0;
    std::size_t size = 0;
    std::size_t blocks = 0;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
    double condition = 0.0;
    bool cholesky = true;
};

class TruncatedFock {
public:
    TruncatedFock(Representation rep, double q, int cutoff, FockBudget budget = {})
        : rep_(std::move(rep)), q_(q), cutoff_(cutoff) {
        if (!(q > -1.0 && q < 1.0)) throw DomainError("q must lie in (−1,1)");
        if (cutoff < 0) throw DomainError("cutoff must be nonnegative");
        const std::size_t d = static_cast<std::size_t>(rep_.dim());
        std::size_t total = 0, width = 1;
        for (int n = 0; n <= cutoff; ++n) {
            total += width;
            if (total > budget.max_basis_words)
                throw SizeError("truncated Fock space needs more than " + std::to_string(budget.max_basis_words) +
                                " basis words (d=" + std::to_string(d) + ", N=" + std::to_string(cutoff) + ")");
            powers_.push_back(width);
            width *= d;
        }
        powers_.push_back(width);
        q_powers_.assign(static_cast<std::size_t>(cutoff) + 1, 1.0);
        for (int p = 1; p <= cutoff; ++p) q_powers_[p] = q_powers_[p - 1] * q;

        std::size_t entries = 0;
        levels_.reserve(static_cast<std::size_t>(cutoff) + 1);
        for (int n = 0; n <= cutoff; ++n) {
            levels_.push_back(partition_level(n));
            for (const auto& b : levels_.back().blocks) entries += b.words.size() * b.words.size();
            if (entries > budget.max_gram_entries)
                throw SizeError("Gram storage exceeds " + std::to_string(budget.max_gram_entries) + " entries");
        }
        for (int n = 0; n <= cutoff; ++n) assemble_gram(n);
    }

    const Representation& rep() const noexcept { return rep_; }
    double q() const noexcept { return q_; }
    int cutoff() const noexcept { return cutoff_; }
    int letters() const noexcept { return rep_.dim(); }
    std::size_t level_size(int n) const { return levels_.at(n).size; }
    std::size_t total_size() const {
        std::size_t s = 0;
        for (const auto& l : levels_) s += l.size;
        return s;
    }
    const FockLevel& level(int n) const { return levels_.at(n); }
    double q_power(int p) const { return q_powers_.at(p); }

    /// d^k
    std::size_t power(int k) const { return powers_.at(k); }

    /// Letter at position p (0 = leftmost) of word w at level n.
    int letter(int n, std::size_t w, int p) const {
        return static_cast<int>((w / powers_[n - 1 - p]) % powers_[1]);
    }

    std::vector<int> word_letters(int n, std::size_t w) const {
        std::vector<int> out(n);
        for (int p = 0; p < n; ++p) out[p] = letter(n, w, p);
        return out;
    }

    std::size_t word_index(std::span<const int> letters) const {
        std::size_t w = 0;
        for (int a : letters) w = w * powers_[1] + static_cast<std::size_t>(a);
        return w;
    }

    /// Word w at level n with the letter at position p removed.
    std::size_t remove_letter(int n, std::size_t w, int p) const {
        const std::size_t below = powers_[n - 1 - p];
        return (w / (below * powers_[1])) * below + w % below;
    }

    /// ⟨u, v⟩_q for basis words u, v at level n.
    double gram_entry(int n, std::size_t u, std::size_t v) const {
        const auto& lv = levels_.at(n);
        const int b = lv.block_of[u];
        if (b != lv.block_of[v]) return 0.0;
        return lv.blocks[b].factor.gram()(lv.pos_in_block[u], lv.pos_in_block[v]);
    }

    /// Dense level Gram matrix (small levels only).
    Eigen::MatrixXd gram_matrix(int n) const {
        const auto& lv = levels_.at(n);
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(lv.size, lv.size);
        for (const auto& b : lv.blocks)
            for (std::size_t i = 0; i < b.words.size(); ++i)
                for (std::size_t j = 0; j < b.words.size(); ++j) g(b.words[i], b.words[j]) = b.factor.gram()(i, j);
        return g;
    }

    /// G_n X for X with rows indexed by level-n words.
    Eigen::MatrixXcd apply_gram(int n, const Eigen::MatrixXcd& x) const {
        return per_block(n, x, [](const GramFactor& f, const Eigen::MatrixXcd& xb) {
            Eigen::MatrixXcd out(xb.rows(), xb.cols());
            out.real() = f.gram() * xb.real();
            out.imag() = f.gram() * xb.imag();
            return out;
        });
    }

    Eigen::MatrixXcd solve_gram(int n, const Eigen::MatrixXcd& x) const {
        return per_block(n, x, [](const GramFactor& f, const Eigen::MatrixXcd& xb) { return f.solve(xb); });
    }

    /// R_n^T X
    Eigen::MatrixXcd whiten(int n, const Eigen::MatrixXcd& x) const {
        return per_block(n, x, [](const GramFactor& f, const Eigen::MatrixXcd& xb) { return f.whiten(xb); });
    }

    /// X R_n^{-T} for X with columns indexed by level-n words.
    Eigen::MatrixXcd unwhiten_right(int n, const Eigen::MatrixXcd& x) const {
        const auto& lv = levels_.at(n);
        Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(x.rows(), x.cols());
        for (const auto& b : lv.blocks) {
            Eigen::MatrixXcd xb(x.rows(), b.words.size());
            for (std::size_t j = 0; j < b.words.size(); ++j) xb.col(j) = x.col(b.words[j]);
            const Eigen::MatrixXcd yb = b.factor.unwhiten_right(xb);
            for (std::size_t j = 0; j < b.words.size(); ++j) out.col(b.words[j]) = yb.col(j);
        }
        return out;
    }

    /// Spectrum summary of G_n (computes eigenvalues per block on demand).
    GramDiagnostics diagnostics(int n) const {
        const auto& lv = levels_.at(n);
        GramDiagnostics d;
        d.level = n;
        d.size = lv.size;
        d.blocks = lv.blocks.size();
        d.min_eigenvalue = std::numeric_limits<double>::infinity();
        d.max_eigenvalue = 0.0;
        for (const auto& b : lv.blocks) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.factor.gram(), Eigen::EigenvaluesOnly);
            d.min_eigenvalue = std::min(d.min_eigenvalue, es.eigenvalues().minCoeff());
            d.max_eigenvalue = std::max(d.max_eigenvalue, es.eigenvalues().maxCoeff());
            d.cholesky = d.cholesky && b.factor.cholesky();
        }
        d.condition = d.max_eigenvalue / d.min_eigenvalue;
        return d;
    }

private:
    template <class Fn>
    Eigen::MatrixXcd per_block(int n, const Eigen::MatrixXcd& x, Fn&& fn) const {
        const auto& lv = levels_.at(n);
        if (static_cast<std::size_t>(x.rows()) != lv.size) throw DomainError("level size mismatch");
        Eigen::MatrixXcd out(x.rows(), x.cols());
        for (const auto& b : lv.blocks) {
            Eigen::MatrixXcd xb(b.words.size(), x.cols());
            for (std::size_t i = 0; i < b.words.size(); ++i) xb.row(i) = x.row(b.words[i]);
            const Eigen::MatrixXcd yb = fn(b.factor, xb);
            for (std::size_t i = 0; i < b.words.size(); ++i) out.row(b.words[i]) = yb.row(i);
        }
        return out;
    }

    FockLevel partition_level(int n) const {
        FockLevel lv;
        lv.n = n;
        lv.size = powers_[n];
        lv.block_of.resize(lv.size);
        lv.pos_in_block.resize(lv.size);
        std::map<std::vector<int>, int> index;
        std::vector<int> counts(rep_.dim());
        for (std::size_t w = 0; w < lv.size; ++w) {
            std::fill(counts.begin(), counts.end(), 0);
            for (int p = 0; p < n; ++p) ++counts[letter(n, w, p)];
            auto [it, fresh] = index.try_emplace(counts, static_cast<int>(lv.blocks.size()));
            if (fresh) lv.blocks.push_back({counts, {}, {}});
            auto& block = lv.blocks[it->second];
            lv.block_of[w] = it->second;
            lv.pos_in_block[w] = static_cast<int>(block.words.size());
            block.words.push_back(static_cast<int>(w));
        }
        return lv;
    }

    void assemble_gram(int n) {
        auto& lv = levels_[n];
        for (auto& block : lv.blocks) {
            const std::size_t m = block.words.size();
            Eigen::MatrixXd g(m, m);
            if (n == 0) {
                g(0, 0) = 1.0;
            } else {
                const auto& prev = levels_[n - 1];
                const std::size_t tail = powers_[n - 1];
                for (std::size_t i = 0; i < m; ++i) {
                    const std::size_t u = block.words[i];
                    const int a = static_cast<int>(u / tail);
                    const std::size_t w = u % tail;
                    const auto& pb = prev.blocks[prev.block_of[w]];
                    const int wi = prev.pos_in_block[w];
                    for (std::size_t j = 0; j <= i; ++j) {
                        const std::size_t v = block.words[j];
                        double acc = 0.0;
                        for (int p = 0; p < n; ++p) {
                            if (letter(n, v, p) != a) continue;
                            const std::size_t r = remove_letter(n, v, p);
                            acc += q_powers_[p] * pb.factor.gram()(wi, prev.pos_in_block[r]);
                        }
                        g(i, j) = acc;
                        g(j, i) = acc;
                    }
                }
            }
            block.factor = GramFactor(std::move(g));
        }
    }

    Representation rep_;
    double q_;
    int cutoff_;
    std::vector<std::size_t> powers_;
    std::vector<double> q_powers_;
    std::vector<FockLevel> levels_;
};

inline TruncatedFock build_fock(const Representation& rep, double q, int cutoff, FockBudget budget = {}) {
    return TruncatedFock(rep, q, cutoff, budget);
}

/// Element of the truncated Fock space: one coefficient array per level.
struct FockVector {
    std::vector<Eigen::VectorXcd> levels;

    static FockVector zero(const TruncatedFock& fock) {
        FockVector v;
        for (int n = 0; n <= fock.cutoff(); ++n) v.levels.push_back(Eigen::VectorXcd::Zero(fock.level_size(n)));
        return v;
    }

    static FockVector vacuum(const TruncatedFock& fock) {
        FockVector v = zero(fock);
        v.levels[0][0] = 1.0;
        return v;
    }

    FockVector& operator+=(const FockVector& o) {
        for (std::size_t n = 0; n < levels.size(); ++n) levels[n] += o.levels[n];
        return *this;
    }
    FockVector& operator-=(const FockVector& o) {
        for (std::size_t n = 0; n < levels.size(); ++n) levels[n] -= o.levels[n];
        return *this;
    }
    FockVector& operator*=(Complex s) {
        for (auto& l : levels) l *= s;
        return *this;
    }
    friend FockVector operator+(FockVector a, const FockVector& b) { return a += b; }
    friend FockVector operator-(FockVector a, const FockVector& b) { return a -= b; }
    friend FockVector operator*(Complex s, FockVector a) { return a *= s; }

    /// Largest coefficient magnitude.
    double max_abs() const {
        double m = 0.0;
        for (const auto& l : levels)
            if (l.size() > 0) m = std::max(m, l.cwiseAbs().maxCoeff());
        return m;
    }
};

/// ⟨u, v⟩_q, conjugate-linear in u.
inline Complex inner_q(const TruncatedFock& fock, const FockVector& u, const FockVector& v) {
    Complex acc = 0.0;
    for (int n = 0; n <= fock.cutoff(); ++n) {
        // levels are orthogonal, so an empty level contributes nothing
        if (u.levels[n].isZero(0.0) || v.levels[n].isZero(0.0)) continue;
        acc += u.levels[n].dot(fock.apply_gram(n, v.levels[n]).col(0));
    }
    return acc;
}

inline double norm_q(const TruncatedFock& fock, const FockVector& v) {
    return std::sqrt(std::max(0.0, inner_q(fock, v, v).real()));
}

/// ξ_1 ⊗ ... ⊗ ξ_n as a FockVector.
inline FockVector tensor_word(const TruncatedFock& fock, std::span<const HVector> letters) {
    const int n = static_cast<int>(letters.size());
    if (n > fock.cutoff()) throw SizeError("tensor word longer than the cutoff");
    const int d = fock.letters();
    Eigen::VectorXcd acc = Eigen::VectorXcd::Ones(1);
    for (const auto& x : letters) {
        fock.rep().check_dim(x.size());
        Eigen::VectorXcd next(acc.size() * d);
        for (Eigen::Index w = 0; w < acc.size(); ++w)
            for (int a = 0; a < d; ++a) next[w * d + a] = acc[w] * x.coords[a];
        acc = std::move(next);
    }
    FockVector v = FockVector::zero(fock);
    v.levels[n] = acc;
    return v;
}

inline FockVector tensor_power(const TruncatedFock& fock, const HVector& xi, int m) {
    std::vector<HVector> letters(static_cast<std::size_t>(m), xi);
    return tensor_word(fock, letters);
}

/// Linear or conjugate-linear map on the truncated Fock space, stored as
/// sparse level-to-level blocks keyed by (source level, target level).
/// A conjugate-linear operator acts as v ↦ B conj(v) blockwise.
class GradedOperator {
public:
    using Key = std::pair<int, int>;

    GradedOperator() = default;
    explicit GradedOperator(int cutoff, bool conjugate_linear = false)
        : cutoff_(cutoff), conjugate_linear_(conjugate_linear) {}

    static GradedOperator identity(const TruncatedFock& fock) {
        GradedOperator id(fock.cutoff());
        for (int n = 0; n <= fock.cutoff(); ++n) {
            SparseBlock b(fock.level_size(n), fock.level_size(n));
            b.setIdentity();
            id.add_block(n, n, b);
        }
        return id;
    }

    int cutoff() const noexcept { return cutoff_; }
    bool conjugate_linear() const noexcept { return conjugate_linear_; }
    const std::map<Key, SparseBlock>& blocks() const noexcept { return blocks_; }

    const SparseBlock* block(int source, int target) const {
        auto it = blocks_.find({source, target});
        return it == blocks_.end() ? nullptr : &it->second;
    }

    void add_block(int source, int target, const SparseBlock& b) {
        if (source < 0 || target < 0 || source > cutoff_ || target > cutoff_)
            throw DomainError("operator block outside levels 0..N");
        auto [it, fresh] = blocks_.try_emplace({source, target}, b);
        if (!fresh) it->second += b;
    }

    FockVector apply(const FockVector& v) const {
        FockVector out;
        out.levels.reserve(v.levels.size());
        for (const auto& l : v.levels) out.levels.push_back(Eigen::VectorXcd::Zero(l.size()));
        for (const auto& [key, b] : blocks_) {
            const auto& src = v.levels[key.first];
            if (conjugate_linear_) out.levels[key.second] += b * src.conjugate();
            else out.levels[key.second] += b * src;
        }
        return out;
    }

    /// Composition (*this) ∘ rhs.
    friend GradedOperator operator*(const GradedOperator& lhs, const GradedOperator& rhs) {
        GradedOperator out(lhs.cutoff_, lhs.conjugate_linear_ != rhs.conjugate_linear_);
        for (const auto& [rk, rb] : rhs.blocks_) {
            for (auto it = lhs.blocks_.lower_bound({rk.second, 0});
                 it != lhs.blocks_.end() && it->first.first == rk.second; ++it) {
                SparseBlock prod = lhs.conjugate_linear_ ? SparseBlock(it->second * SparseBlock(rb.conjugate()))
                                                         : SparseBlock(it->second * rb);
                out.add_block(rk.first, it->first.second, prod);
            }
        }
        return out;
    }

    GradedOperator& operator+=(const GradedOperator& o) {
        if (o.conjugate_linear_ != conjugate_linear_)
            throw DomainError("cannot add linear and conjugate-linear operators");
        for (const auto& [k, b] : o.blocks_) add_block(k.first, k.second, b);
        return *this;
    }

    GradedOperator& operator*=(Complex s) {
        for (auto& [k, b] : blocks_) b *= s;
        return *this;
    }

    friend GradedOperator operator+(GradedOperator a, const GradedOperator& b) { return a += b; }
    friend GradedOperator operator-(GradedOperator a, const GradedOperator& b) {
        GradedOperator nb = b;
        nb *= -1.0;
        return a += nb;
    }
    friend GradedOperator operator*(Complex s, GradedOperator a) { return a *= s; }

    /// Keeps only blocks whose source level is at most max_source.
    GradedOperator restricted(int max_source) const {
        GradedOperator out(cutoff_, conjugate_linear_);
        for (const auto& [k, b] : blocks_)
            if (k.first <= max_source) out.blocks_.emplace(k, b);
        return out;
    }

private:
    int cutoff_ = 0;
    bool conjugate_linear_ = false;
    std::map<Key, SparseBlock> blocks_;
};

/// c_q(ξ): level n → n+1 by prepending ξ; level N maps to zero.
inline GradedOperator creation(const TruncatedFock& fock, const HVector& xi) {
    fock.rep().check_dim(xi.size());
    const int d = fock.letters();
    GradedOperator op(fock.cutoff());
    for (int n = 0; n < fock.cutoff(); ++n) {
        const std::size_t size = fock.level_size(n);
        std::vector<Eigen::Triplet<Complex>> t;
        t.reserve(size * d);
        for (int a = 0; a < d; ++a) {
            if (xi.coords[a] == Complex(0.0)) continue;
            for (std::size_t w = 0; w < size; ++w)
                t.emplace_back(static_cast<int>(a * size + w), static_cast<int>(w), xi.coords[a]);
        }
        SparseBlock b(fock.level_size(n + 1), size);
        b.setFromTriplets(t.begin(), t.end());
        op.add_block(n, n + 1, b);
    }
    return op;
}

/// c_q(ξ)*: ξ_1⊗...⊗ξ_n ↦ Σ_i q^{i-1} ⟨ξ, ξ_i⟩_U (word without ξ_i); kills Ω.
inline GradedOperator annihilation(const TruncatedFock& fock, const HVector& xi) {
    fock.rep().check_dim(xi.size());
    GradedOperator op(fock.cutoff());
    for (int n = 1; n <= fock.cutoff(); ++n) {
        const std::size_t size = fock.level_size(n);
        std::vector<Eigen::Triplet<Complex>> t;
        t.reserve(size * n);
        for (std::size_t w = 0; w < size; ++w)
            for (int p = 0; p < n; ++p) {
                const Complex c = std::conj(xi.coords[fock.letter(n, w, p)]);
                if (c == Complex(0.0)) continue;
                t.emplace_back(static_cast<int>(fock.remove_letter(n, w, p)), static_cast<int>(w),
                               fock.q_power(p) * c);
            }
        SparseBlock b(fock.level_size(n - 1), size);
        b.setFromTriplets(t.begin(), t.end());
        op.add_block(n, n - 1, b);
    }
    return op;
}

/// s_q(ξ) = c_q(ξ) + c_q(ξ)* for ξ ∈ H_R.
inline GradedOperator field(const TruncatedFock& fock, const HVector& xi) {
    if (!xi.real) throw DomainError("field operators are defined for real vectors (ξ ∈ H_R)");
    return creation(fock, xi) + annihilation(fock, xi);
}

/// Adjoint with respect to ⟨·,·⟩_q: block (t ← s) maps to G_s^{-1} B^H G_t.
/// Exact on blocks whose images stay below the cutoff.
namespace detail {

/// Dense sub-block of B between one target multiset block and one source
/// multiset block.
struct BlockPair {
    int target_block;
    int source_block;
    Eigen::MatrixXcd values;
};

/// Splits B (rows: level-t words, columns: level-s words) along the multiset
/// blocks of both levels, keeping only pairs that carry nonzeros. The Gram
/// matrices are block diagonal, so metric operations act pair by pair.
inline std::vector<BlockPair> split_by_multiset(const TruncatedFock& fock, int s, int t, const SparseBlock& b) {
    const auto& ls = fock.level(s);
    const auto& lt = fock.level(t);
    std::map<std::pair<int, int>, std::size_t> slot;
    std::vector<BlockPair> out;
    for (Eigen::Index c = 0; c < b.outerSize(); ++c)
        for (SparseBlock::InnerIterator it(b, c); it; ++it) {
            const int tb = lt.block_of[it.row()];
            const int sb = ls.block_of[it.col()];
            auto [pos, fresh] = slot.try_emplace({tb, sb}, out.size());
            if (fresh)
                out.push_back({tb, sb,
                               Eigen::MatrixXcd::Zero(lt.blocks[tb].words.size(), ls.blocks[sb].words.size())});
            out[pos->second].values(lt.pos_in_block[it.row()], ls.pos_in_block[it.col()]) += it.value();
        }
    return out;
}

} // namespace detail

/// X† for the ⟨·,·⟩_q geometry: blockwise G_s^{-1} B^H G_t.
inline GradedOperator gram_adjoint(const TruncatedFock& fock, const GradedOperator& x) {
    if (x.conjugate_linear()) throw DomainError("gram_adjoint expects a linear operator");
    GradedOperator out(x.cutoff());
    for (const auto& [key, b] : x.blocks()) {
        const auto [s, t] = key;
        const auto& ls = fock.level(s);
        const auto& lt = fock.level(t);
        std::vector<Eigen::Triplet<Complex>> trip;
        for (const auto& pr : detail::split_by_multiset(fock, s, t, b)) {
            const auto& sblk = ls.blocks[pr.source_block];
            const auto& tblk = lt.blocks[pr.target_block];
            // (B^H G_t) = (G_t B)^H since G_t is real symmetric
            const Eigen::MatrixXcd gb = tblk.factor.gram().cast<Complex>() * pr.values;
            const Eigen::MatrixXcd adj = sblk.factor.solve(gb.adjoint());
            for (Eigen::Index i = 0; i < adj.rows(); ++i)
                for (Eigen::Index j = 0; j < adj.cols(); ++j)
                    if (adj(i, j) != Complex(0.0)) trip.emplace_back(sblk.words[i], tblk.words[j], adj(i, j));
        }
        SparseBlock adj(static_cast<Eigen::Index>(ls.size), static_cast<Eigen::Index>(lt.size));
        adj.setFromTriplets(trip.begin(), trip.end());
        out.add_block(t, s, adj);
    }
    return out;
}

/// X† v without forming X†.
inline FockVector apply_adjoint(const TruncatedFock& fock, const GradedOperator& x, const FockVector& v) {
    if (x.conjugate_linear()) throw DomainError("apply_adjoint expects a linear operator");
    std::vector<Eigen::VectorXcd> gv;
    for (int n = 0; n <= fock.cutoff(); ++n) gv.push_back(fock.apply_gram(n, v.levels[n]));
    FockVector acc = FockVector::zero(fock);
    for (const auto& [key, b] : x.blocks()) acc.levels[key.first] += b.adjoint() * gv[key.second];
    for (int n = 0; n <= fock.cutoff(); ++n) acc.levels[n] = fock.solve_gram(n, acc.levels[n]);
    return acc;
}

/// φ(X) = ⟨Ω, XΩ⟩_q.
inline Complex vacuum_eval(const TruncatedFock& fock, const GradedOperator& x) {
    (void)fock;
    const SparseBlock* b = x.block(0, 0);
    return b ? b->coeff(0, 0) : Complex(0.0);
}

inline GradedOperator power(const TruncatedFock& fock, const GradedOperator& x, int k) {
    GradedOperator acc = GradedOperator::identity(fock);
    for (int i = 0; i < k; ++i) acc = x * acc;
    return acc;
}

/// Σ_k c_k X^k as an operator.
inline GradedOperator operator_polynomial(const TruncatedFock& fock, std::span<const double> coeffs,
                                          const GradedOperator& x) {
    GradedOperator acc(fock.cutoff());
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        acc = x * acc;
        GradedOperator id = GradedOperator::identity(fock);
        id *= *it;
        acc += id;
    }
    return acc;
}

/// Σ_k c_k X^k v, by Horner's rule on vectors.
inline FockVector apply_polynomial(std::span<const double> coeffs, const GradedOperator& x, const FockVector& v) {
    FockVector acc = v;
    for (auto& l : acc.levels) l.setZero();
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        acc = x.apply(acc);
        acc += Complex(*it) * v;
    }
    return acc;
}

/// Operator W in the algebra generated by the fields with WΩ = ξ_1⊗...⊗ξ_n,
/// from W(ξ⊗f) = s_q(ξ) W(f) - W(c_q(ξ)* f). Memoized over subsequences.
inline GradedOperator wick_word(const TruncatedFock& fock, std::span<const HVector> letters) {
    const int n = static_cast<int>(letters.size());
    if (n > fock.cutoff()) throw SizeError("Wick word of length " + std::to_string(n) + " exceeds cutoff");
    if (n > 24) throw SizeError("Wick word too long");
    for (const auto& x : letters)
        if (!x.real) throw DomainError("Wick words are built from real vectors (ξ ∈ H_R)");
    const auto& rep = fock.rep();

    std::vector<GradedOperator> fields;
    for (const auto& x : letters) fields.push_back(field(fock, x));

    std::unordered_map<std::uint32_t, GradedOperator> memo;
    std::function<const GradedOperator&(std::uint32_t)> word = [&](std::uint32_t mask) -> const GradedOperator& {
        if (auto it = memo.find(mask); it != memo.end()) return it->second;
        if (mask == 0) return memo.emplace(0u, GradedOperator::identity(fock)).first->second;
        const int first = std::countr_zero(mask);
        const std::uint32_t rest = mask & (mask - 1);
        GradedOperator w = fields[first] * word(rest);
        int j = 0;
        for (std::uint32_t m = rest; m != 0; m &= m - 1, ++j) {
            const int pos = std::countr_zero(m);
            const Complex c = fock.q_power(j) * deformed_inner(rep, letters[first], letters[pos]);
            if (c == Complex(0.0)) continue;
            GradedOperator sub = word(rest & ~(1u << pos));
            sub *= c;
            w = w - sub;
        }
        return memo.emplace(mask, std::move(w)).first->second;
    };
    return word(n == 0 ? 0u : static_cast<std::uint32_t>((1ull << n) - 1));
}

/// Dense matrix of X over all levels (level offsets in increasing order).
inline Eigen::MatrixXcd to_dense(const TruncatedFock& fock, const GradedOperator& x) {
    std::vector<Eigen::Index> offset(fock.cutoff() + 2, 0);
    for (int n = 0; n <= fock.cutoff(); ++n) offset[n + 1] = offset[n] + fock.level_size(n);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(offset.back(), offset.back());
    for (const auto& [k, b] : x.blocks())
        m.block(offset[k.second], offset[k.first], b.rows(), b.cols()) += Eigen::MatrixXcd(b);
    return m;
}

/// Hilbert–Schmidt norm of X (linear) in the ⟨·,·⟩_q geometry, over blocks
/// with source level ≤ max_source. Bounds the operator norm from above.
inline double q_hs_norm(const TruncatedFock& fock, const GradedOperator& x, int max_source) {
    double acc = 0.0;
    for (const auto& [k, b] : x.blocks()) {
        if (k.first > max_source) continue;
        for (const auto& pr : detail::split_by_multiset(fock, k.first, k.second, b)) {
            const auto& sf = fock.level(k.first).blocks[pr.source_block].factor;
            const auto& tf = fock.level(k.second).blocks[pr.target_block].factor;
            acc += sf.unwhiten_right(tf.whiten(pr.values)).squaredNorm();
        }
    }
    return std::sqrt(acc);
}

/// Operator norm of X (linear) in the ⟨·,·⟩_q geometry, via dense SVD.
inline double q_operator_norm(const TruncatedFock& fock, const GradedOperator& x) {
    std::vector<Eigen::Index> offset(fock.cutoff() + 2, 0);
    for (int n = 0; n <= fock.cutoff(); ++n) offset[n + 1] = offset[n] + fock.level_size(n);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(offset.back(), offset.back());
    for (const auto& [k, b] : x.blocks()) {
        const Eigen::MatrixXcd w = fock.unwhiten_right(k.first, fock.whiten(k.second, Eigen::MatrixXcd(b)));
        m.block(offset[k.second], offset[k.first], w.rows(), w.cols()) += w;
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

} // namespace qfocklab
