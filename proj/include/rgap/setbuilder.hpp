#pragma once

// The set S_W on the normalized torus [0,1)^2: the complement of the strips
// I_[w] = { t : <w, t> mod 1 in (-rho_w, rho_w) } for 0 < |w|_inf <= W, with
// rho_w = delta(ell) * delta(m) for w = ell * v_m.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <unordered_map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rgap/errors.hpp"
#include "rgap/lattice.hpp"
#include "rgap/parallel.hpp"

namespace rgap {

struct TorusPoint {
    double x = 0.0;
    double y = 0.0;

    TorusPoint() = default;
    TorusPoint(double x_, double y_) : x(reduce(x_)), y(reduce(y_)) {}

    /// Maps a point of [-pi, pi)^2 to normalized coordinates.
    static TorusPoint from_angles(double tx, double ty) {
        constexpr double two_pi = 2.0 * 3.14159265358979323846;
        return {tx / two_pi + 0.5, ty / two_pi + 0.5};
    }

    static double reduce(double v) {
        double r = v - std::floor(v);
        return r >= 1.0 ? 0.0 : r;
    }
};

/// Signed distance of <w, t> to the nearest integer, in [-1/2, 1/2).
inline double strip_offset(LatticeVector w, const TorusPoint& t) {
    const double s = static_cast<double>(w.a) * t.x + static_cast<double>(w.b) * t.y;
    return s - std::floor(s + 0.5);
}

// ---------------------------------------------------------------------------
// delta(n) = c0 / (n ln^2(n + 1))

namespace detail {

struct UnitDeltaSums {
    static constexpr std::int64_t cutoff = 1'000'000;
    double partial = 0.0;  // sum_{n <= cutoff} 1 / (n ln^2(n+1))
    double tail = 0.0;     // >= sum_{n > cutoff}, via int_N^inf dx / (x ln^2 x) = 1 / ln N
};

inline const UnitDeltaSums& unit_delta_sums() {
    static const UnitDeltaSums sums = [] {
        UnitDeltaSums s;
        long double acc = 0.0L;
        // smallest terms first
        for (std::int64_t n = UnitDeltaSums::cutoff; n >= 1; --n) {
            const long double l = std::log1p(static_cast<long double>(n));
            acc += 1.0L / (static_cast<long double>(n) * l * l);
        }
        s.partial = static_cast<double>(acc);
        s.tail = 1.0 / std::log(static_cast<double>(UnitDeltaSums::cutoff));
        return s;
    }();
    return sums;
}

}  // namespace detail

struct DeltaSequence {
    double epsilon = 0.0;
    double c0 = 0.0;

    static constexpr double safety = 0.99;

    friend bool operator==(const DeltaSequence&, const DeltaSequence&) = default;

    double operator()(std::int64_t n) const {
        if (n < 1) throw std::invalid_argument("delta: n must be >= 1");
        const double l = std::log1p(static_cast<double>(n));
        return c0 / (static_cast<double>(n) * l * l);
    }

    /// Certified upper bound on sum_{n >= 1} delta(n).
    double sum_upper_bound() const {
        const auto& u = detail::unit_delta_sums();
        return c0 * (u.partial + u.tail);
    }

    /// c0 chosen so that sum_upper_bound() = 0.99 sqrt(eps / 2).
    static DeltaSequence calibrated(double epsilon) {
        if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
        const auto& u = detail::unit_delta_sums();
        return {epsilon, safety * std::sqrt(epsilon / 2.0) / (u.partial + u.tail)};
    }
};

/// rho_w for the calibrated family. The generator index is taken from the
/// lexicographically larger of +-v so that rho_w = rho_{-w}.
inline double rho_for(const DeltaSequence& delta, LatticeVector w, const GeneratorIndex* index = nullptr) {
    const auto [ell, v] = generator_decompose(w);
    const LatticeVector rep = std::max(v, -v);
    const auto m = index ? (*index)(rep) : generator_index(rep);
    return delta(ell) * delta(m);
}

struct Strip {
    LatticeVector w;
    double rho = 0.0;  // normalized half-width

    friend bool operator==(const Strip&, const Strip&) = default;
};

inline bool strip_contains(const Strip& s, const TorusPoint& t) { return std::fabs(strip_offset(s.w, t)) < s.rho; }

// ---------------------------------------------------------------------------

class BadSetDescriptor {
public:
    BadSetDescriptor() = default;

    /// S_W for the calibrated delta rule; W = 0 gives the whole torus.
    static BadSetDescriptor build(double epsilon, std::int64_t truncation_W) {
        if (truncation_W < 0) throw std::invalid_argument("truncation W must be >= 0");
        BadSetDescriptor d;
        d.delta_ = DeltaSequence::calibrated(epsilon);
        d.truncation_W_ = truncation_W;
        if (truncation_W > 0) {
            const GeneratorIndex index(std::sqrt(2.0) * static_cast<double>(truncation_W) + 1.0);
            for (std::int64_t a = -truncation_W; a <= truncation_W; ++a)
                for (std::int64_t b = -truncation_W; b <= truncation_W; ++b)
                    if (a != 0 || b != 0) d.strips_.push_back({{a, b}, rho_for(*d.delta_, {a, b}, &index)});
        }
        d.finish();
        d.tail_bound_ = d.compute_tail();
        return d;
    }

    /// An explicit strip family (no delta rule, nothing omitted).
    static BadSetDescriptor from_strips(std::vector<Strip> strips) {
        BadSetDescriptor d;
        for (const auto& s : strips) {
            if (s.w.is_zero()) throw std::invalid_argument("strip vector must be nonzero");
            if (!(s.rho >= 0.0 && s.rho < 0.5)) throw std::invalid_argument("strip half-width must lie in [0, 1/2)");
            d.truncation_W_ = std::max(d.truncation_W_, s.w.max_abs());
        }
        d.strips_ = std::move(strips);
        d.finish();
        return d;
    }

    /// Restores a descriptor from stored fields (deserialization).
    static BadSetDescriptor restore(std::optional<DeltaSequence> delta, std::int64_t truncation_W,
                                    std::vector<Strip> strips, double tail_bound) {
        BadSetDescriptor d;
        d.delta_ = delta;
        d.truncation_W_ = truncation_W;
        d.strips_ = std::move(strips);
        d.tail_bound_ = tail_bound;
        d.finish();
        return d;
    }

    const std::optional<DeltaSequence>& delta() const { return delta_; }
    std::int64_t truncation_W() const { return truncation_W_; }
    double tail_bound() const { return tail_bound_; }
    /// Every included w (both signs for built sets), lexicographic order.
    const std::vector<Strip>& strips() const { return strips_; }
    /// One representative per set I_[w] = I_[-w].
    const std::vector<Strip>& distinct_strips() const { return distinct_; }

    /// rho_w; cached for included w, computed from the delta rule otherwise.
    double rho(LatticeVector w) const {
        if (w.is_zero()) throw std::invalid_argument("rho: zero vector");
        if (auto it = lookup_.find(w); it != lookup_.end()) return strips_[it->second].rho;
        if (auto it = lookup_.find(-w); it != lookup_.end()) return strips_[it->second].rho;
        if (!delta_) throw std::invalid_argument("rho: " + to_string(w) + " is not in the explicit strip family");
        return rho_for(*delta_, w);
    }

    bool includes(LatticeVector w) const { return lookup_.count(w) != 0; }

    friend bool operator==(const BadSetDescriptor& l, const BadSetDescriptor& r) {
        return l.delta_ == r.delta_ && l.truncation_W_ == r.truncation_W_ && l.strips_ == r.strips_ &&
               l.tail_bound_ == r.tail_bound_;
    }

    /// Sum of 2 rho over the included strips, both signs counted.
    double included_mass() const {
        double s = 0.0;
        for (const auto& st : strips_) s += 2.0 * st.rho;
        return s;
    }

    /// 1 - sum over distinct sets of |I_[w]|; a certified lower bound on |S_W|.
    double union_lower_bound() const {
        double s = 0.0;
        for (const auto& st : distinct_) s += 2.0 * st.rho;
        return 1.0 - s;
    }

private:
    void finish() {
        lookup_.clear();
        std::sort(strips_.begin(), strips_.end(), [](const Strip& l, const Strip& r) { return l.w < r.w; });
        for (std::size_t i = 0; i < strips_.size(); ++i) {
            if (!lookup_.emplace(strips_[i].w, i).second)
                throw std::invalid_argument("duplicate strip vector " + to_string(strips_[i].w));
        }
        // I_[w] and I_[-w] are the same set; if an explicit family gives them
        // different widths the union is the wider one
        std::map<LatticeVector, double> widest;
        for (const auto& s : strips_) {
            auto [it, inserted] = widest.emplace(std::max(s.w, -s.w), s.rho);
            if (!inserted) it->second = std::max(it->second, s.rho);
        }
        distinct_.clear();
        for (const auto& [w, r] : widest) distinct_.push_back({w, r});
    }

    double compute_tail() const {
        // Omitted mass sum of 2 rho over |ell v|_inf > W, both signs, so 4
        // delta(ell) delta(m) per pair +-v with m the lex-larger index.
        // Generators up to radius R are summed exactly. The j-th pair past
        // them has larger index >= M + 2j, so those pairs carry at most
        // (delta(M + 1) + c0 / ln(M + 1)) / 2; sum_{ell > W} delta(ell)
        // <= delta(W + 1) + c0 / ln(W + 1).
        const auto& delta = *delta_;
        const std::int64_t W = truncation_W_;
        const double R = std::max(100.0, 8.0 * static_cast<double>(W));
        const auto gens = enumerate_generators(R);
        std::vector<double> per_ell(static_cast<std::size_t>(W) + 1, 0.0);
        double all = 0.0;
        for (const auto& g : gens) {
            if (g.v < -g.v) continue;
            const double dm = delta(g.index_m);
            all += dm;
            for (std::int64_t ell = 1; ell <= W; ++ell)
                if (ell * g.v.max_abs() > W) per_ell[static_cast<std::size_t>(ell)] += dm;
        }
        const auto M = static_cast<std::int64_t>(gens.size());
        const double beyond = 0.5 * (delta(M + 1) + delta.c0 / std::log(static_cast<double>(M) + 1.0));
        double s = 0.0;
        for (std::int64_t ell = 1; ell <= W; ++ell) s += delta(ell) * (per_ell[static_cast<std::size_t>(ell)] + beyond);
        const double far_ell =
            W == 0 ? delta.sum_upper_bound()
                   : std::min(delta.sum_upper_bound(), delta(W + 1) + delta.c0 / std::log(static_cast<double>(W) + 1.0));
        s += far_ell * (all + beyond);
        const double crude = 2.0 * delta.sum_upper_bound() * delta.sum_upper_bound() - included_mass();
        return std::max(0.0, std::min(4.0 * s, crude));
    }

    std::optional<DeltaSequence> delta_;
    std::int64_t truncation_W_ = 0;
    std::vector<Strip> strips_;
    std::vector<Strip> distinct_;
    std::unordered_map<LatticeVector, std::size_t, LatticeVectorHash> lookup_;
    double tail_bound_ = 0.0;
};

inline double rho(const BadSetDescriptor& desc, LatticeVector w) { return desc.rho(w); }

inline bool strip_contains(const BadSetDescriptor& desc, LatticeVector w, const TorusPoint& t) {
    return std::fabs(strip_offset(w, t)) < desc.rho(w);
}

inline bool set_contains(const BadSetDescriptor& desc, const TorusPoint& t) {
    for (const auto& s : desc.distinct_strips())
        if (strip_contains(s, t)) return false;
    return true;
}

inline BadSetDescriptor build_bad_set(double epsilon, std::int64_t truncation_W) {
    return BadSetDescriptor::build(epsilon, truncation_W);
}

/// Upper bound on sum_{|w|_inf > W} 2 rho_w.
inline double tail_mass(const BadSetDescriptor& desc) { return desc.tail_bound(); }

// ---------------------------------------------------------------------------
// Cell-center classification

namespace detail {

inline void require_power_of_two_grid(int n, int min_n) {
    if (n < min_n || (n & (n - 1)) != 0)
        throw std::invalid_argument("grid resolution must be a power of two >= " + std::to_string(min_n));
    if (n > limits().max_grid)
        throw ResourceLimitError("grid resolution " + std::to_string(n) + " exceeds cap " +
                                 std::to_string(limits().max_grid));
}

/// Classifies the cell centers ((i + 1/2)/n, (j + 1/2)/n) against the
/// descriptor. At a cell center <w, t> = (a(2i+1) + b(2j+1)) / (2n), so the
/// distance to Z is tracked exactly as an integer residue mod 2n; the answer
/// agrees bit-for-bit with set_contains() at the center.
///
/// A cell is flagged uncertain when membership may change inside the cell,
/// i.e. when <w, .> ranges over a strip boundary for some strip and no strip
/// certainly covers the whole cell.
inline void classify_cells(const BadSetDescriptor& desc, int n, std::vector<std::uint8_t>& occupied,
                           std::vector<std::uint8_t>& uncertain) {
    const auto nn = static_cast<std::size_t>(n);
    occupied.assign(nn * nn, 1);
    uncertain.assign(nn * nn, 0);
    const std::int64_t two_n = 2 * static_cast<std::int64_t>(n);
    struct Prepared {
        std::int64_t a, b, step, reach;
        double width;  // 2n rho
    };
    auto mod = [two_n](std::int64_t v) { return ((v % two_n) + two_n) % two_n; };
    std::vector<Prepared> strips;
    for (const auto& s : desc.distinct_strips()) {
        if (s.rho <= 0.0) continue;
        strips.push_back({s.w.a, s.w.b, mod(2 * s.w.a), s.w.l1(), static_cast<double>(two_n) * s.rho});
    }
    parallel_chunks(nn, 16, [&](std::size_t, std::size_t row_begin, std::size_t row_end) {
        std::vector<std::uint8_t> certain_in(nn);
        std::vector<std::uint8_t> maybe(nn);
        for (std::size_t j = row_begin; j < row_end; ++j) {
            std::fill(certain_in.begin(), certain_in.end(), 0);
            std::fill(maybe.begin(), maybe.end(), 0);
            std::uint8_t* occ = occupied.data() + j * nn;
            const std::int64_t yj = 2 * static_cast<std::int64_t>(j) + 1;
            for (const auto& st : strips) {
                std::int64_t r = mod(st.a + st.b * yj);  // residue at i = 0
                const double reach = static_cast<double>(st.reach);
                for (std::size_t i = 0; i < nn; ++i) {
                    const double d = static_cast<double>(r <= two_n - r ? r : two_n - r);
                    if (d < st.width) occ[i] = 0;
                    if (d < st.width - reach) certain_in[i] = 1;
                    if (std::fabs(d - st.width) <= reach) maybe[i] = 1;
                    r += st.step;
                    if (r >= two_n) r -= two_n;
                }
            }
            std::uint8_t* unc = uncertain.data() + j * nn;
            for (std::size_t i = 0; i < nn; ++i) unc[i] = (maybe[i] && !certain_in[i]) ? 1 : 0;
        }
    });
}

}  // namespace detail

struct MeasureEstimate {
    double value = 0.0;
    double error_bound = 0.0;
    std::string method;
};

struct GridMethod {
    int n = 0;
};

struct MonteCarloMethod {
    std::int64_t samples = 0;
    std::uint64_t seed = 0;
};

/// Uniform double in [0, 1) from the top 53 bits; portable across standard
/// libraries, unlike std::uniform_real_distribution.
inline double unit_double(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Grid: fraction of cell centers in S_W; the error bound counts the cells in
/// which membership can change (each contributes at most one cell area).
inline MeasureEstimate measure_estimate(const BadSetDescriptor& desc, GridMethod method) {
    detail::require_power_of_two_grid(method.n, 64);
    std::vector<std::uint8_t> occ, unc;
    detail::classify_cells(desc, method.n, occ, unc);
    std::int64_t inside = 0, uncertain = 0;
    for (std::size_t k = 0; k < occ.size(); ++k) {
        inside += occ[k];
        uncertain += unc[k];
    }
    const double cells = static_cast<double>(occ.size());
    return {static_cast<double>(inside) / cells, std::min(1.0, static_cast<double>(uncertain) / cells),
            "grid(" + std::to_string(method.n) + ")"};
}

/// Monte Carlo with a 3-sigma binomial error bound.
inline MeasureEstimate measure_estimate(const BadSetDescriptor& desc, MonteCarloMethod method) {
    if (method.samples < 10'000) throw std::invalid_argument("Monte Carlo needs at least 10^4 samples");
    if (method.samples > limits().max_samples)
        throw ResourceLimitError("sample count " + std::to_string(method.samples) + " exceeds cap " +
                                 std::to_string(limits().max_samples));
    // sample blocks use independent streams so the result does not depend on
    // the worker count
    constexpr std::size_t block = 1 << 14;
    const auto total = static_cast<std::size_t>(method.samples);
    const std::int64_t hits = chunked_sum<std::int64_t>(total, block, [&](std::size_t b, std::size_t e) {
        std::seed_seq seq{static_cast<std::uint32_t>(method.seed), static_cast<std::uint32_t>(method.seed >> 32),
                          static_cast<std::uint32_t>(b / block)};
        std::mt19937_64 rng(seq);
        std::int64_t h = 0;
        for (std::size_t k = b; k < e; ++k) {
            const double x = unit_double(rng);
            const double y = unit_double(rng);
            h += set_contains(desc, TorusPoint(x, y)) ? 1 : 0;
        }
        return h;
    });
    const double p = static_cast<double>(hits) / static_cast<double>(total);
    return {p, 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(total)),
            "montecarlo(" + std::to_string(method.samples) + "," + std::to_string(method.seed) + ")"};
}

}  // namespace rgap
