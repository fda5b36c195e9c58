#pragma once

/**
 * @file qcomb.hpp
 * @brief Exact q-combinatorics: inversions, pair partitions and their
 *        crossings, q-integers, q-factorials and q-Hermite polynomials.
 *
 * Everything here is exact (arbitrary precision rationals) and serves as
 * ground truth for the floating-point Fock-space computations.
 */

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "errors.hpp"

namespace qfocklab {

using Rational = boost::multiprecision::cpp_rational;

/// Polynomial in the formal variable q with exact rational coefficients.
/// coeffs()[m] is the coefficient of q^m; trailing zeros are never stored,
/// so the zero polynomial has an empty coefficient vector.
class QPoly {
public:
    QPoly() = default;

    explicit QPoly(std::vector<Rational> coeffs) : coeffs_(std::move(coeffs)) { normalize(); }

    QPoly(std::initializer_list<long long> coeffs) {
        coeffs_.reserve(coeffs.size());
        for (long long c : coeffs) coeffs_.emplace_back(c);
        normalize();
    }

    static QPoly constant(const Rational& c) { return QPoly(std::vector<Rational>{c}); }

    static QPoly monomial(std::size_t power, const Rational& c = 1) {
        std::vector<Rational> cs(power + 1);
        cs[power] = c;
        return QPoly(std::move(cs));
    }

    const std::vector<Rational>& coeffs() const noexcept { return coeffs_; }
    bool is_zero() const noexcept { return coeffs_.empty(); }
    /// Degree in q; -1 for the zero polynomial.
    int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }

    Rational coeff(std::size_t m) const { return m < coeffs_.size() ? coeffs_[m] : Rational(0); }

    double evaluate(double q) const {
        double acc = 0.0;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
            acc = acc * q + it->convert_to<double>();
        }
        return acc;
    }

    Rational evaluate(const Rational& q) const {
        Rational acc = 0;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * q + *it;
        return acc;
    }

    QPoly& operator+=(const QPoly& o) {
        if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size());
        for (std::size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
        normalize();
        return *this;
    }

    QPoly& operator-=(const QPoly& o) {
        if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size());
        for (std::size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
        normalize();
        return *this;
    }

    QPoly& operator*=(const Rational& c) {
        for (auto& x : coeffs_) x *= c;
        normalize();
        return *this;
    }

    friend QPoly operator+(QPoly a, const QPoly& b) { return a += b; }
    friend QPoly operator-(QPoly a, const QPoly& b) { return a -= b; }
    friend QPoly operator*(QPoly a, const Rational& c) { return a *= c; }
    friend QPoly operator*(const Rational& c, QPoly a) { return a *= c; }
    friend QPoly operator-(QPoly a) { return a *= Rational(-1); }

    friend QPoly operator*(const QPoly& a, const QPoly& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<Rational> out(a.coeffs_.size() + b.coeffs_.size() - 1);
        for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
            for (std::size_t j = 0; j < b.coeffs_.size(); ++j) out[i + j] += a.coeffs_[i] * b.coeffs_[j];
        return QPoly(std::move(out));
    }

    friend bool operator==(const QPoly& a, const QPoly& b) { return a.coeffs_ == b.coeffs_; }

    std::string to_string() const {
        if (is_zero()) return "0";
        std::ostringstream os;
        bool first = true;
        for (std::size_t m = 0; m < coeffs_.size(); ++m) {
            const Rational& c = coeffs_[m];
            if (c == 0) continue;
            if (!first) os << (c < 0 ? " - " : " + ");
            else if (c < 0) os << "-";
            Rational a = c < 0 ? Rational(-c) : c;
            if (m == 0 || a != 1) os << a;
            if (m >= 1) os << "q";
            if (m >= 2) os << "^" << m;
            first = false;
        }
        return os.str();
    }

private:
    void normalize() {
        while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
    }

    std::vector<Rational> coeffs_;
};

/// A bijection of {0, ..., n-1}; images()[i] is the image of i.
class Permutation {
public:
    explicit Permutation(std::vector<int> images) : images_(std::move(images)) {
        std::vector<char> seen(images_.size(), 0);
        for (int v : images_) {
            if (v < 0 || static_cast<std::size_t>(v) >= images_.size() || seen[v])
                throw DomainError("Permutation: images must be a bijection of {0,...,n-1}");
            seen[v] = 1;
        }
    }

    static Permutation identity(std::size_t n) {
        std::vector<int> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<int>(i);
        return Permutation(std::move(p));
    }

    std::size_t size() const noexcept { return images_.size(); }
    int operator()(std::size_t i) const { return images_[i]; }
    const std::vector<int>& images() const noexcept { return images_; }

private:
    std::vector<int> images_;
};

/// #{(i, j) : i < j, p(i) > p(j)}.
inline std::int64_t inversions(const Permutation& p) {
    std::int64_t count = 0;
    const auto& im = p.images();
    for (std::size_t i = 0; i < im.size(); ++i)
        for (std::size_t j = i + 1; j < im.size(); ++j)
            if (im[i] > im[j]) ++count;
    return count;
}

/// Perfect matching of {0, ..., n-1}. Stored canonically: each arc is
/// (opener, closer) with opener < closer, arcs sorted by opener.
class PairPartition {
public:
    using Arc = std::pair<int, int>;

    /// Accepts arcs in any order and orientation; canonicalizes.
    explicit PairPartition(std::vector<Arc> arcs) : arcs_(std::move(arcs)) {
        const std::size_t n = 2 * arcs_.size();
        std::vector<char> seen(n, 0);
        for (auto& [a, b] : arcs_) {
            if (a > b) std::swap(a, b);
            if (a < 0 || static_cast<std::size_t>(b) >= n || a == b || seen[a] || seen[b])
                throw DomainError("PairPartition: arcs must partition {0,...,n-1} into pairs");
            seen[a] = seen[b] = 1;
        }
        std::sort(arcs_.begin(), arcs_.end());
    }

    std::size_t size() const noexcept { return 2 * arcs_.size(); }
    const std::vector<Arc>& arcs() const noexcept { return arcs_; }

    friend bool operator==(const PairPartition&, const PairPartition&) = default;

private:
    std::vector<Arc> arcs_;
};

/// c(V) = #{(r, s) : π(r) < π(s) < κ(r) < κ(s)}.
inline int crossings(const PairPartition& v) {
    int count = 0;
    const auto& arcs = v.arcs();
    for (const auto& [pr, kr] : arcs)
        for (const auto& [ps, ks] : arcs)
            if (pr < ps && ps < kr && kr < ks) ++count;
    return count;
}

/// Largest n accepted by the pair-partition enumeration (2 027 025 pairings).
inline constexpr int kPairingGuard = 16;

/// (n-1)!! = 1·3·5···(n-1) for even n ≥ 0.
inline std::uint64_t pairing_count(int n) {
    std::uint64_t c = 1;
    for (int k = n - 1; k > 1; k -= 2) c *= static_cast<std::uint64_t>(k);
    return c;
}

/// Lazily enumerates every pair partition of {0, ..., n-1}, each exactly
/// once. The state is a mixed-radix counter: arc r pairs the smallest
/// unmatched point with the choice[r]-th remaining point, so arc r has
/// n-1-2r options.
class PairPartitionStream {
public:
    explicit PairPartitionStream(int n) : n_(n) {
        if (n < 0 || n % 2 != 0) throw DomainError("pair partitions need an even, nonnegative n");
        if (n > kPairingGuard)
            throw SizeError("pair-partition enumeration is guarded at n <= " + std::to_string(kPairingGuard));
        choice_.assign(static_cast<std::size_t>(n / 2), 0);
    }

    int n() const noexcept { return n_; }

    std::optional<PairPartition> next() {
        if (done_) return std::nullopt;
        PairPartition current = decode();
        advance();
        return current;
    }

private:
    PairPartition decode() const {
        std::vector<int> remaining(static_cast<std::size_t>(n_));
        for (int i = 0; i < n_; ++i) remaining[i] = i;
        std::vector<PairPartition::Arc> arcs;
        arcs.reserve(choice_.size());
        for (int c : choice_) {
            const int opener = remaining[0];
            const int closer = remaining[1 + c];
            arcs.emplace_back(opener, closer);
            remaining.erase(remaining.begin() + 1 + c);
            remaining.erase(remaining.begin());
        }
        return PairPartition(std::move(arcs));
    }

    void advance() {
        for (int r = static_cast<int>(choice_.size()) - 1; r >= 0; --r) {
            const int radix = n_ - 1 - 2 * r;
            if (++choice_[r] < radix) return;
            choice_[r] = 0;
        }
        done_ = true;
    }

    int n_;
    std::vector<int> choice_;
    bool done_ = false;
};

/// [n]_q = 1 + q + ... + q^{n-1}; [0]_q = 0.
inline QPoly q_integer(int n) {
    if (n < 0) throw DomainError("q_integer: n must be nonnegative");
    return QPoly(std::vector<Rational>(static_cast<std::size_t>(n), Rational(1)));
}

/// [n]_q! = [1]_q [2]_q ... [n]_q, with [0]_q! = 1.
inline QPoly q_factorial(int n) {
    if (n < 0) throw DomainError("q_factorial: n must be nonnegative");
    QPoly acc{1};
    for (int j = 1; j <= n; ++j) acc = acc * q_integer(j);
    return acc;
}

/// Σ_V q^{c(V)} over all pair partitions of {0, ..., n-1}; n even.
inline QPoly moment_polynomial(int n) {
    if (n % 2 != 0) throw DomainError("moment_polynomial: odd moments vanish; n must be even");
    PairPartitionStream stream(n);
    std::vector<std::uint64_t> histogram;
    while (auto v = stream.next()) {
        const auto c = static_cast<std::size_t>(crossings(*v));
        if (c >= histogram.size()) histogram.resize(c + 1, 0);
        ++histogram[c];
    }
    std::vector<Rational> coeffs;
    coeffs.reserve(histogram.size());
    for (auto h : histogram) coeffs.emplace_back(h);
    return QPoly(std::move(coeffs));
}

/// Vacuum moment of a unit field operator at numeric q: 0 for odd n.
inline double moment_value(int n, double q) {
    if (n % 2 != 0) return 0.0;
    return moment_polynomial(n).evaluate(q);
}

/// Polynomial in x whose coefficients are QPoly; element k is the coefficient of x^k.
using QHermitePoly = std::vector<QPoly>;

/// H_0 .. H_{n_max} from H_0 = 1, H_1 = x, x H_n = H_{n+1} + [n]_q H_{n-1}.
inline std::vector<QHermitePoly> q_hermite_family(int n_max) {
    if (n_max < 0) throw DomainError("q_hermite: n must be nonnegative");
    std::vector<QHermitePoly> family;
    family.push_back({QPoly{1}});
    if (n_max == 0) return family;
    family.push_back({QPoly{}, QPoly{1}});
    for (int n = 1; n < n_max; ++n) {
        const QHermitePoly& hn = family[n];
        const QHermitePoly& hprev = family[n - 1];
        QHermitePoly next(hn.size() + 1);
        for (std::size_t k = 0; k < hn.size(); ++k) next[k + 1] += hn[k];
        const QPoly qn = q_integer(n);
        for (std::size_t k = 0; k < hprev.size(); ++k) next[k] -= qn * hprev[k];
        family.push_back(std::move(next));
    }
    return family;
}

inline QHermitePoly q_hermite(int n) { return q_hermite_family(n).back(); }

/// Coefficients of x^k at numeric q.
inline std::vector<double> evaluate_coefficients(const QHermitePoly& h, double q) {
    std::vector<double> out(h.size());
    for (std::size_t k = 0; k < h.size(); ++k) out[k] = h[k].evaluate(q);
    return out;
}

} // namespace qfocklab
