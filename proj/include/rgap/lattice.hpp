#pragma once

// Integer-lattice combinatorics on Z^2: coprime generators, their fixed
// ordering, generalized arithmetic progressions and the prime-slope family
// B(n, k).

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

namespace rgap {

struct LatticeVector {
    std::int64_t a = 0;
    std::int64_t b = 0;

    friend constexpr bool operator==(const LatticeVector&, const LatticeVector&) = default;
    // Plain lexicographic (a, b). The generator ordering is a separate thing,
    // see generator_less().
    friend constexpr auto operator<=>(const LatticeVector&, const LatticeVector&) = default;

    constexpr LatticeVector operator-() const { return {-a, -b}; }
    friend constexpr LatticeVector operator+(LatticeVector u, LatticeVector v) { return {u.a + v.a, u.b + v.b}; }
    friend constexpr LatticeVector operator-(LatticeVector u, LatticeVector v) { return {u.a - v.a, u.b - v.b}; }
    friend constexpr LatticeVector operator*(std::int64_t k, LatticeVector v) { return {k * v.a, k * v.b}; }

    constexpr bool is_zero() const { return a == 0 && b == 0; }
    constexpr std::int64_t norm2() const { return a * a + b * b; }
    double norm() const { return std::sqrt(static_cast<double>(norm2())); }
    constexpr std::int64_t max_abs() const { return std::max(a < 0 ? -a : a, b < 0 ? -b : b); }
    constexpr std::int64_t l1() const { return (a < 0 ? -a : a) + (b < 0 ? -b : b); }
};

struct LatticeVectorHash {
    std::size_t operator()(const LatticeVector& v) const noexcept {
        auto x = static_cast<std::uint64_t>(v.a) * 0x9E3779B97F4A7C15ull;
        auto y = static_cast<std::uint64_t>(v.b) + 0x7F4A7C159E3779B9ull;
        return static_cast<std::size_t>(x ^ (y + (x << 6) + (x >> 2)));
    }
};

inline std::string to_string(const LatticeVector& v) {
    return "(" + std::to_string(v.a) + "," + std::to_string(v.b) + ")";
}

inline constexpr std::int64_t cross(LatticeVector u, LatticeVector v) { return u.a * v.b - u.b * v.a; }
inline constexpr std::int64_t dot(LatticeVector u, LatticeVector v) { return u.a * v.a + u.b * v.b; }

/// gcd(|a|, |b|) with gcd(0, n) = n.
inline std::int64_t lattice_gcd(LatticeVector v) { return std::gcd(v.a, v.b); }

inline bool is_coprime(LatticeVector v) { return !v.is_zero() && lattice_gcd(v) == 1; }

/// Total order on V: Euclidean norm first, then lexicographic (a, b).
inline bool generator_less(LatticeVector u, LatticeVector v) {
    const auto nu = u.norm2();
    const auto nv = v.norm2();
    if (nu != nv) return nu < nv;
    return u < v;
}

struct Generator {
    LatticeVector v;
    std::int64_t index_m = 0;  // 1-based position in the generator ordering

    friend bool operator==(const Generator&, const Generator&) = default;
};

struct Decomposition {
    std::int64_t ell = 0;
    LatticeVector v;

    friend bool operator==(const Decomposition&, const Decomposition&) = default;
};

/// Unique w = ell * v with ell = gcd >= 1 and v coprime.
inline Decomposition generator_decompose(LatticeVector w) {
    if (w.is_zero()) throw std::invalid_argument("generator_decompose: zero vector has no generator");
    const auto g = lattice_gcd(w);
    return {g, {w.a / g, w.b / g}};
}

namespace detail {

inline std::int64_t floor_radius(double radius) {
    // largest integer r with r <= radius, robust against radius = sqrt(k) rounding
    auto r = static_cast<std::int64_t>(std::floor(radius));
    while ((r + 1) * (r + 1) <= static_cast<std::int64_t>(std::floor(radius * radius + 1e-9))) ++r;
    return r;
}

inline std::int64_t radius2_cap(double radius) {
    // integer bound on a^2 + b^2 for "norm <= radius"; tolerant of radius = sqrt(k)
    return static_cast<std::int64_t>(std::floor(radius * radius + 1e-9));
}

}  // namespace detail

/// All coprime lattice points with norm <= radius, in generator order.
/// The result for a smaller radius is always a prefix of the result for a
/// larger one.
inline std::vector<Generator> enumerate_generators(double radius) {
    if (!(radius >= 1.0)) throw std::invalid_argument("enumerate_generators: radius must be >= 1");
    const auto r = detail::floor_radius(radius);
    const auto cap = detail::radius2_cap(radius);
    std::vector<LatticeVector> pts;
    pts.reserve(static_cast<std::size_t>(2.0 * radius * radius + 8));
    for (std::int64_t a = -r; a <= r; ++a) {
        for (std::int64_t b = -r; b <= r; ++b) {
            const LatticeVector v{a, b};
            if (v.norm2() <= cap && is_coprime(v)) pts.push_back(v);
        }
    }
    std::sort(pts.begin(), pts.end(), generator_less);
    std::vector<Generator> out;
    out.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) out.push_back({pts[i], static_cast<std::int64_t>(i) + 1});
    return out;
}

/// 1-based index of a coprime v in the generator order. Counts the coprime
/// points that precede v, so it is consistent with enumerate_generators().
inline std::int64_t generator_index(LatticeVector v) {
    if (!is_coprime(v)) throw std::invalid_argument("generator_index: " + to_string(v) + " is not a coprime nonzero vector");
    const auto n2 = v.norm2();
    const auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n2))) + 1;
    std::int64_t before = 0;
    for (std::int64_t a = -r; a <= r; ++a) {
        for (std::int64_t b = -r; b <= r; ++b) {
            const LatticeVector u{a, b};
            if (u.norm2() <= n2 && generator_less(u, v) && is_coprime(u)) ++before;
        }
    }
    return before + 1;
}

/// Lookup table of generator indices for all generators up to a radius; used
/// where many indices are needed at once.
class GeneratorIndex {
public:
    explicit GeneratorIndex(double radius) : radius2_(detail::radius2_cap(radius)) {
        for (const auto& g : enumerate_generators(radius)) index_.emplace(g.v, g.index_m);
    }

    std::int64_t operator()(LatticeVector v) const {
        if (v.norm2() <= radius2_) {
            auto it = index_.find(v);
            if (it == index_.end())
                throw std::invalid_argument("generator_index: " + to_string(v) + " is not a coprime nonzero vector");
            return it->second;
        }
        return generator_index(v);
    }

    std::size_t size() const { return index_.size(); }

private:
    std::int64_t radius2_;
    std::unordered_map<LatticeVector, std::int64_t, LatticeVectorHash> index_;
};

/// Fraction of the nonzero lattice points of norm <= radius that are coprime.
inline double coprime_density(double radius) {
    if (!(radius >= 1.0)) throw std::invalid_argument("coprime_density: radius must be >= 1");
    const auto r = detail::floor_radius(radius);
    const auto cap = detail::radius2_cap(radius);
    std::int64_t all = 0;
    std::int64_t coprime = 0;
    for (std::int64_t a = -r; a <= r; ++a) {
        for (std::int64_t b = -r; b <= r; ++b) {
            const LatticeVector v{a, b};
            if (v.is_zero() || v.norm2() > cap) continue;
            ++all;
            if (lattice_gcd(v) == 1) ++coprime;
        }
    }
    return static_cast<double>(coprime) / static_cast<double>(all);
}

// ---------------------------------------------------------------------------
// Generalized arithmetic progressions

struct GapSpec {
    LatticeVector w1;
    std::optional<LatticeVector> w2;
    std::int64_t d1 = 1;
    std::int64_t d2 = 1;
    LatticeVector translation{};
    int index_origin = 0;  // 0: k in [0, d), 1: k in [1, d]

    friend bool operator==(const GapSpec&, const GapSpec&) = default;

    int rank() const { return w2 ? 2 : 1; }
    std::int64_t size() const { return d1 * d2; }

    static GapSpec ap(LatticeVector w, std::int64_t d, int origin = 0, LatticeVector translation = {}) {
        return {w, std::nullopt, d, 1, translation, origin};
    }
    static GapSpec gap(LatticeVector w1, LatticeVector w2, std::int64_t d1, std::int64_t d2, int origin = 0,
                       LatticeVector translation = {}) {
        return {w1, w2, d1, d2, translation, origin};
    }
};

/// Throws std::invalid_argument when the spec violates its invariants.
inline void validate(const GapSpec& s) {
    if (s.d1 < 1 || s.d2 < 1) throw std::invalid_argument("GapSpec: d1 and d2 must be positive");
    if (s.index_origin != 0 && s.index_origin != 1) throw std::invalid_argument("GapSpec: index_origin must be 0 or 1");
    if (s.w1.is_zero()) throw std::invalid_argument("GapSpec: w1 must be nonzero");
    if (!s.w2) {
        if (s.d2 != 1) throw std::invalid_argument("GapSpec: rank 1 requires d2 = 1");
        return;
    }
    if (s.w2->is_zero()) throw std::invalid_argument("GapSpec: w2 must be nonzero");
    if (cross(s.w1, *s.w2) == 0)
        throw std::invalid_argument("GapSpec: w1 " + to_string(s.w1) + " and w2 " + to_string(*s.w2) +
                                    " are linearly dependent");
}

/// The d1*d2 points translation + k1 w1 + k2 w2, k2 outer and k1 inner.
inline std::vector<LatticeVector> gap_points(const GapSpec& s) {
    validate(s);
    const LatticeVector w2 = s.w2.value_or(LatticeVector{});
    const std::int64_t o = s.index_origin;
    std::vector<LatticeVector> pts;
    pts.reserve(static_cast<std::size_t>(s.size()));
    for (std::int64_t k2 = o; k2 < s.d2 + o; ++k2)
        for (std::int64_t k1 = o; k1 < s.d1 + o; ++k1) pts.push_back(s.translation + k1 * s.w1 + k2 * w2);
    return pts;
}

/// Largest coordinate magnitude of the untranslated spectrum. |P|^2 only
/// sees differences, so the translation is irrelevant for aliasing.
inline std::int64_t spectrum_extent(const GapSpec& s) {
    const std::int64_t hi = s.d1 - 1 + s.index_origin;
    const std::int64_t hi2 = s.d2 - 1 + s.index_origin;
    const LatticeVector w2 = s.w2.value_or(LatticeVector{});
    auto ext = [](std::int64_t c1, std::int64_t c2) { return (c1 < 0 ? -c1 : c1) + (c2 < 0 ? -c2 : c2); };
    return std::max(ext(hi * s.w1.a, hi2 * w2.a), ext(hi * s.w1.b, hi2 * w2.b));
}

/// B(n, k) = {w, 2w, ..., n^2 w} with w = (n, k).
inline GapSpec prime_slope_gap(std::int64_t n, std::int64_t k) {
    if (n < 2) throw std::invalid_argument("prime_slope_gap: n must be >= 2");
    if (k < 1 || k > n - 1)
        throw std::invalid_argument("prime_slope_gap: k = " + std::to_string(k) + " outside [1, " +
                                    std::to_string(n - 1) + "]");
    return GapSpec::ap({n, k}, n * n, 1);
}

struct DisjointnessResult {
    bool disjoint = true;
    std::optional<LatticeVector> witness;
    std::optional<std::pair<std::size_t, std::size_t>> blocks;  // indices into the input list
};

/// Brute-force point-set intersection of rank-1 blocks; reports the first
/// shared point met while scanning blocks in order.
inline DisjointnessResult check_pairwise_disjoint(const std::vector<GapSpec>& blocks) {
    std::unordered_map<LatticeVector, std::size_t, LatticeVectorHash> owner;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (blocks[i].rank() != 1) throw std::invalid_argument("check_pairwise_disjoint: blocks must be rank 1");
        // a point repeated inside one block is impossible for rank 1 with w != 0
        for (const auto& p : gap_points(blocks[i])) {
            auto [it, inserted] = owner.emplace(p, i);
            if (!inserted) return {false, p, std::pair{it->second, i}};
        }
    }
    return {};
}

/// Primes <= limit by a plain sieve.
inline std::vector<std::int64_t> primes_up_to(std::int64_t limit) {
    std::vector<std::int64_t> out;
    if (limit < 2) return out;
    std::vector<bool> composite(static_cast<std::size_t>(limit) + 1, false);
    for (std::int64_t p = 2; p <= limit; ++p) {
        if (composite[static_cast<std::size_t>(p)]) continue;
        out.push_back(p);
        for (std::int64_t q = p * p; q <= limit; q += p) composite[static_cast<std::size_t>(q)] = true;
    }
    return out;
}

inline bool is_prime(std::int64_t n) {
    if (n < 2) return false;
    for (std::int64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

}  // namespace rgap
