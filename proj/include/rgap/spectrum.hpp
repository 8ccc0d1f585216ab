#pragma once

// Fourier-side numerics on the normalized torus: rasterized sets, indicator
// coefficients, L^2(S) norms of GAP-spectrum polynomials and the 1-D
// Dirichlet tail.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rgap/errors.hpp"
#include "rgap/lattice.hpp"
#include "rgap/parallel.hpp"
#include "rgap/setbuilder.hpp"

namespace rgap {

using cdouble = std::complex<double>;

// ---------------------------------------------------------------------------
// TorusGrid

/// Cell-center occupancy of a set on an n x n grid, cell (i, j) centered at
/// ((i + 1/2)/n, (j + 1/2)/n) and stored at j * n + i. `uncertain` marks the
/// cells whose true coverage may differ from the center sample.
struct TorusGrid {
    int n = 0;
    std::vector<std::uint8_t> cells;
    std::vector<std::uint8_t> uncertain;

    double occupancy() const {
        std::int64_t k = 0;
        for (auto c : cells) k += c;
        return static_cast<double>(k) / static_cast<double>(cells.size());
    }

    /// Area of the uncertain cells; bounds |occupancy - true measure|.
    double measure_error() const {
        std::int64_t k = 0;
        for (auto c : uncertain) k += c;
        return static_cast<double>(k) / static_cast<double>(uncertain.size());
    }

    bool at(int i, int j) const { return cells[static_cast<std::size_t>(j) * n + i] != 0; }
};

inline TorusGrid rasterize(const BadSetDescriptor& desc, int n) {
    detail::require_power_of_two_grid(n, 64);
    TorusGrid g;
    g.n = n;
    detail::classify_cells(desc, n, g.cells, g.uncertain);
    return g;
}

/// Axis-aligned rectangle [a1, b1) x [a2, b2) inside [0, 1]^2.
inline TorusGrid rasterize_rect(double a1, double b1, double a2, double b2, int n) {
    if (!(0.0 <= a1 && a1 < b1 && b1 <= 1.0 && 0.0 <= a2 && a2 < b2 && b2 <= 1.0))
        throw std::invalid_argument("rectangle bounds must satisfy 0 <= a < b <= 1");
    detail::require_power_of_two_grid(n, 64);
    TorusGrid g;
    g.n = n;
    const auto nn = static_cast<std::size_t>(n);
    g.cells.assign(nn * nn, 0);
    g.uncertain.assign(nn * nn, 0);
    const double h = 1.0 / n;
    auto inside = [](double c, double lo, double hi) { return c >= lo && c < hi; };
    auto straddles = [h](double c, double lo, double hi) {
        // an edge strictly inside the cell; edges at 0 or 1 coincide with
        // cell boundaries and never split a cell
        auto cuts = [&](double e) { return e > 0.0 && e < 1.0 && std::fabs(c - e) < 0.5 * h; };
        return cuts(lo) || cuts(hi);
    };
    for (std::size_t j = 0; j < nn; ++j) {
        const double y = (static_cast<double>(j) + 0.5) * h;
        for (std::size_t i = 0; i < nn; ++i) {
            const double x = (static_cast<double>(i) + 0.5) * h;
            g.cells[j * nn + i] = inside(x, a1, b1) && inside(y, a2, b2);
            const bool edge_x = straddles(x, a1, b1) && (y > a2 - h && y < b2 + h);
            const bool edge_y = straddles(y, a2, b2) && (x > a1 - h && x < b1 + h);
            g.uncertain[j * nn + i] = edge_x || edge_y;
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// FourierTable

/// Coefficients c(lambda) = int_S e^{-2 pi i <lambda, t>} dt for |lambda|_inf <= F.
/// Stored either densely or, for product sets, as two 1-D factor arrays.
/// Hermitian symmetry c(-lambda) = conj(c(lambda)) holds exactly.
class FourierTable {
public:
    FourierTable() = default;

    /// Dense coefficients at or below this modulus are stored as zero.
    static constexpr double storage_floor = 1e-14;

    /// values[(l2 + F) * (2F + 1) + (l1 + F)]; symmetry is enforced from the
    /// half-plane l2 > 0 or (l2 = 0, l1 >= 0).
    static FourierTable dense(int max_freq, std::vector<cdouble> values, double error_bound) {
        if (max_freq < 0) throw std::invalid_argument("FourierTable: max_freq must be >= 0");
        const auto side = static_cast<std::size_t>(2 * max_freq + 1);
        if (values.size() != side * side) throw std::invalid_argument("FourierTable: dense size mismatch");
        FourierTable t;
        t.max_freq_ = max_freq;
        t.dense_ = std::move(values);
        t.error_bound_ = error_bound;
        for (int l2 = -max_freq; l2 <= max_freq; ++l2)
            for (int l1 = -max_freq; l1 <= max_freq; ++l1)
                if (!upper_half({l1, l2})) t.dense_[t.offset({l1, l2})] = std::conj(t.dense_[t.offset({-l1, -l2})]);
        t.dense_[t.offset({0, 0})] = t.dense_[t.offset({0, 0})].real();
        for (auto& v : t.dense_)
            if (std::abs(v) <= storage_floor) v = 0.0;
        return t;
    }

    /// c(l1, l2) = fx[l1 + F] * fy[l2 + F]; entries for negative k are
    /// replaced by conj of the positive ones.
    static FourierTable separable(std::vector<cdouble> fx, std::vector<cdouble> fy, double error_bound = 0.0) {
        if (fx.size() != fy.size() || fx.size() % 2 != 1)
            throw std::invalid_argument("FourierTable: factor arrays must have equal odd length");
        FourierTable t;
        t.max_freq_ = static_cast<int>(fx.size() / 2);
        const auto F = static_cast<std::size_t>(t.max_freq_);
        for (auto* f : {&fx, &fy}) {
            (*f)[F] = (*f)[F].real();
            for (std::size_t k = 1; k <= F; ++k) (*f)[F - k] = std::conj((*f)[F + k]);
        }
        t.fx_ = std::move(fx);
        t.fy_ = std::move(fy);
        t.separable_ = true;
        t.error_bound_ = error_bound;
        return t;
    }

    int max_freq() const { return max_freq_; }
    bool is_separable() const { return separable_; }
    double error_bound() const { return error_bound_; }
    const std::vector<cdouble>& dense_values() const { return dense_; }
    const std::vector<cdouble>& factor_x() const { return fx_; }
    const std::vector<cdouble>& factor_y() const { return fy_; }

    bool in_range(LatticeVector l) const { return l.max_abs() <= max_freq_; }

    cdouble at(LatticeVector l) const {
        if (!in_range(l))
            throw std::invalid_argument("frequency " + to_string(l) + " outside table range " +
                                        std::to_string(max_freq_));
        return get(l);
    }

    /// Unchecked access; l must be in range.
    cdouble get(LatticeVector l) const {
        if (separable_) return fx_[static_cast<std::size_t>(l.a + max_freq_)] * fy_[static_cast<std::size_t>(l.b + max_freq_)];
        return dense_[offset(l)];
    }

    /// Set measure, c(0).
    double measure() const { return get({0, 0}).real(); }

    /// sum over the table of |c(lambda)|^2.
    double energy() const {
        if (separable_) {
            double sx = 0.0, sy = 0.0;
            for (const auto& v : fx_) sx += std::norm(v);
            for (const auto& v : fy_) sy += std::norm(v);
            return sx * sy;
        }
        double s = 0.0;
        for (const auto& v : dense_) s += std::norm(v);
        return s;
    }

    static bool upper_half(LatticeVector l) { return l.b > 0 || (l.b == 0 && l.a >= 0); }

    friend bool operator==(const FourierTable&, const FourierTable&) = default;

private:
    std::size_t offset(LatticeVector l) const {
        const auto side = static_cast<std::size_t>(2 * max_freq_ + 1);
        return static_cast<std::size_t>(l.b + max_freq_) * side + static_cast<std::size_t>(l.a + max_freq_);
    }

    int max_freq_ = 0;
    bool separable_ = false;
    double error_bound_ = 0.0;
    std::vector<cdouble> dense_;
    std::vector<cdouble> fx_, fy_;
};

// ---------------------------------------------------------------------------
// Rectangles (closed form)

/// phi(k; a, b) = int_a^b e^{-2 pi i k x} dx.
inline cdouble interval_fourier(std::int64_t k, double a, double b) {
    if (k == 0) return {b - a, 0.0};
    const double w = 2.0 * std::numbers::pi * static_cast<double>(k);
    const cdouble ea = std::polar(1.0, -w * a);
    const cdouble eb = std::polar(1.0, -w * b);
    return (ea - eb) / cdouble(0.0, w);
}

/// Exact coefficients of the indicator of [a1, b1] x [a2, b2].
struct RectFourier {
    double a1, b1, a2, b2;

    cdouble operator()(LatticeVector l) const { return interval_fourier(l.a, a1, b1) * interval_fourier(l.b, a2, b2); }
};

inline RectFourier rect_fourier(double a1, double b1, double a2, double b2) {
    if (!(a1 < b1 && a2 < b2)) throw std::invalid_argument("rect_fourier: need a1 < b1 and a2 < b2");
    return {a1, b1, a2, b2};
}

/// Exact separable table of a rectangle up to max_freq.
inline FourierTable rect_table(double a1, double b1, double a2, double b2, int max_freq) {
    rect_fourier(a1, b1, a2, b2);
    if (max_freq < 0) throw std::invalid_argument("rect_table: max_freq must be >= 0");
    const auto side = static_cast<std::size_t>(2 * max_freq + 1);
    std::vector<cdouble> fx(side), fy(side);
    for (int k = 0; k <= max_freq; ++k) {
        fx[static_cast<std::size_t>(k + max_freq)] = interval_fourier(k, a1, b1);
        fy[static_cast<std::size_t>(k + max_freq)] = interval_fourier(k, a2, b2);
    }
    return FourierTable::separable(std::move(fx), std::move(fy));
}

// ---------------------------------------------------------------------------
// Discrete transform of a rasterized set

/// c(lambda) = n^-2 sum_cells occupancy * e^{-2 pi i <lambda, center>}.
/// The recorded error bound covers the uncertain cells (one cell area each)
/// plus the cell-averaging factor 1 - sinc(pi F / n)^2 on the covered cells.
inline FourierTable fourier_coefficients(const TorusGrid& grid, int max_freq) {
    const int n = grid.n;
    if (max_freq < 0 || 2 * max_freq >= n)
        throw std::invalid_argument("fourier_coefficients: need 2F < n (F = " + std::to_string(max_freq) +
                                    ", n = " + std::to_string(n) + ")");
    const auto nn = static_cast<std::size_t>(n);
    const int side = 2 * max_freq + 1;
    // twiddle[k] = e^{-2 pi i k / (2n)}; the center coordinate is (2i+1)/(2n)
    const std::int64_t two_n = 2 * static_cast<std::int64_t>(n);
    std::vector<cdouble> twiddle(static_cast<std::size_t>(two_n));
    for (std::int64_t k = 0; k < two_n; ++k)
        twiddle[static_cast<std::size_t>(k)] =
            std::polar(1.0, -std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
    auto tw = [&](std::int64_t k) { return twiddle[static_cast<std::size_t>(((k % two_n) + two_n) % two_n)]; };

    // row transforms R_j(l1) = sum_i occ(i, j) e^{-2 pi i l1 x_i}
    std::vector<cdouble> rows(nn * static_cast<std::size_t>(side));
    parallel_chunks(nn, 32, [&](std::size_t, std::size_t jb, std::size_t je) {
        for (std::size_t j = jb; j < je; ++j) {
            const std::uint8_t* row = grid.cells.data() + j * nn;
            for (int l1 = -max_freq; l1 <= max_freq; ++l1) {
                cdouble acc = 0.0;
                std::int64_t k = l1;  // l1 * (2i + 1) at i = 0
                const std::int64_t step = ((2 * static_cast<std::int64_t>(l1)) % two_n + two_n) % two_n;
                k = ((k % two_n) + two_n) % two_n;
                for (std::size_t i = 0; i < nn; ++i) {
                    if (row[i]) acc += twiddle[static_cast<std::size_t>(k)];
                    k += step;
                    if (k >= two_n) k -= two_n;
                }
                rows[j * static_cast<std::size_t>(side) + static_cast<std::size_t>(l1 + max_freq)] = acc;
            }
        }
    });

    std::vector<cdouble> values(static_cast<std::size_t>(side) * static_cast<std::size_t>(side));
    const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
    parallel_chunks(static_cast<std::size_t>(max_freq + 1), 1, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t l2u = b; l2u < e; ++l2u) {
            const auto l2 = static_cast<std::int64_t>(l2u);
            for (int l1 = -max_freq; l1 <= max_freq; ++l1) {
                cdouble acc = 0.0;
                for (std::size_t j = 0; j < nn; ++j)
                    acc += rows[j * static_cast<std::size_t>(side) + static_cast<std::size_t>(l1 + max_freq)] *
                           tw(l2 * (2 * static_cast<std::int64_t>(j) + 1));
                values[static_cast<std::size_t>(l2 + max_freq) * static_cast<std::size_t>(side) +
                       static_cast<std::size_t>(l1 + max_freq)] = acc * scale;
            }
        }
    });

    const double arg = std::numbers::pi * static_cast<double>(max_freq) / static_cast<double>(n);
    const double sinc = arg == 0.0 ? 1.0 : std::sin(arg) / arg;
    const double bound = grid.measure_error() + (1.0 - sinc * sinc) * grid.occupancy();
    return FourierTable::dense(max_freq, std::move(values), bound);
}

// ---------------------------------------------------------------------------
// GAP-spectrum polynomials

namespace detail {

/// |sum_{k=0}^{d-1} e^{2 pi i k s}|^2 for s = m / (2n), m an integer residue.
inline double dirichlet_sq_at(std::int64_t d, std::int64_t m, std::int64_t two_n) {
    const std::int64_t r = ((m % two_n) + two_n) % two_n;
    if (r == 0) return static_cast<double>(d) * static_cast<double>(d);
    const double den = std::sin(std::numbers::pi * static_cast<double>(r) / static_cast<double>(two_n));
    const std::int64_t dr = (d % two_n) * r % two_n;
    const double num = std::sin(std::numbers::pi * static_cast<double>(dr) / static_cast<double>(two_n));
    return (num * num) / (den * den);
}

/// sup of the squared Dirichlet kernel over s in [m - reach, m + reach] / (2n),
/// from |D_d(s)| <= min(d, 1 / |sin(pi s)|).
inline double dirichlet_sq_envelope(std::int64_t d, std::int64_t m, std::int64_t reach, std::int64_t two_n) {
    const std::int64_t r = ((m % two_n) + two_n) % two_n;
    const std::int64_t dist = std::min(r, two_n - r) - reach;
    const double cap = static_cast<double>(d) * static_cast<double>(d);
    if (dist <= 0) return cap;
    const double s = std::sin(std::numbers::pi * static_cast<double>(dist) / static_cast<double>(two_n));
    return std::min(cap, 1.0 / (s * s));
}

/// sum_{k=o}^{o+d-1} e^{2 pi i k s}, from the centered closed form.
inline cdouble geometric_sum(std::int64_t d, int origin, double s) {
    const double r = s - std::round(s);
    const double den = std::sin(std::numbers::pi * r);
    const double ratio = std::fabs(den) < 1e-300 ? static_cast<double>(d) : std::sin(std::numbers::pi * d * r) / den;
    const double phase = 2.0 * std::numbers::pi * (static_cast<double>(origin) + 0.5 * static_cast<double>(d - 1)) * r;
    return std::polar(ratio, phase);
}

}  // namespace detail

/// P(t) = (d1 d2)^{-1/2} sum over the GAP points lambda of e^{2 pi i <lambda, t>},
/// evaluated as a product of one geometric sum per axis.
inline cdouble gap_polynomial(const GapSpec& spec, const TorusPoint& t) {
    validate(spec);
    auto ip = [&](LatticeVector w) { return static_cast<double>(w.a) * t.x + static_cast<double>(w.b) * t.y; };
    cdouble p = detail::geometric_sum(spec.d1, spec.index_origin, ip(spec.w1));
    if (spec.w2) p *= detail::geometric_sum(spec.d2, spec.index_origin, ip(*spec.w2));
    const double tr = ip(spec.translation);
    p *= std::polar(1.0, 2.0 * std::numbers::pi * (tr - std::round(tr)));
    return p / std::sqrt(static_cast<double>(spec.size()));
}

struct PolynomialNormReport {
    GapSpec spec;
    double value = 0.0;        // int_S |P|^2 on the normalized torus
    double error_bound = 0.0;  // quadrature error estimate for value
    double bound = std::numeric_limits<double>::quiet_NaN();  // C / (size * prod rho)
    double ratio = std::numeric_limits<double>::quiet_NaN();  // value / bound
    std::string route;
};

enum class NormRoute { automatic, grid, sheared };

struct NormOptions {
    NormRoute route = NormRoute::automatic;
    int grid_n = 0;        // 0: smallest admissible power of two, at least min_grid
    int min_grid = 2048;   // rasterized route only; coarser grids cannot resolve S_16
    double reporting_constant = 2.0;
};

inline int admissible_grid(const GapSpec& spec, int requested) {
    const std::int64_t need = 8 * spectrum_extent(spec);
    if (requested > 0) {
        if (requested < need)
            throw std::invalid_argument("aliasing: grid " + std::to_string(requested) + " < 8 * spectrum extent " +
                                        std::to_string(need));
        return requested;
    }
    std::int64_t n = 64;
    while (n < need) n *= 2;
    if (n > limits().max_grid)
        throw ResourceLimitError("aliasing rule needs grid " + std::to_string(n) + " above cap " +
                                 std::to_string(limits().max_grid));
    return static_cast<int>(n);
}

/// n^-2 sum_cells occupancy |P(center)|^2 on an existing grid. The error
/// estimate charges each uncertain cell its area times the sup of |P|^2 over
/// the cell (Dirichlet envelope). Cells away from the boundary of S are
/// integrated exactly for trigonometric polynomials below the aliasing limit
/// when summed over full periods, and are not charged.
inline PolynomialNormReport gap_polynomial_norm(const TorusGrid& grid, const GapSpec& spec) {
    validate(spec);
    const int n = admissible_grid(spec, grid.n);
    const auto nn = static_cast<std::size_t>(n);
    const std::int64_t two_n = 2 * static_cast<std::int64_t>(n);
    const LatticeVector w2 = spec.w2.value_or(LatticeVector{});

    auto axis_tables = [&](LatticeVector w, std::int64_t d) {
        std::vector<double> val(static_cast<std::size_t>(two_n)), env(static_cast<std::size_t>(two_n));
        for (std::int64_t m = 0; m < two_n; ++m) {
            val[static_cast<std::size_t>(m)] = detail::dirichlet_sq_at(d, m, two_n);
            env[static_cast<std::size_t>(m)] = detail::dirichlet_sq_envelope(d, m, w.l1(), two_n);
        }
        return std::pair{val, env};
    };
    const auto [v1, e1] = axis_tables(spec.w1, spec.d1);
    const auto [v2, e2] = spec.w2 ? axis_tables(w2, spec.d2)
                                  : std::pair{std::vector<double>(static_cast<std::size_t>(two_n), 1.0),
                                              std::vector<double>(static_cast<std::size_t>(two_n), 1.0)};
    auto mod = [two_n](std::int64_t v) { return ((v % two_n) + two_n) % two_n; };

    struct Acc {
        double value = 0.0, error = 0.0;
        Acc& operator+=(const Acc& o) {
            value += o.value;
            error += o.error;
            return *this;
        }
    };
    const Acc acc = chunked_sum<Acc>(nn, 16, [&](std::size_t jb, std::size_t je) {
        Acc a;
        for (std::size_t j = jb; j < je; ++j) {
            const std::int64_t yj = 2 * static_cast<std::int64_t>(j) + 1;
            std::int64_t m1 = mod(spec.w1.a + spec.w1.b * yj);
            std::int64_t m2 = mod(w2.a + w2.b * yj);
            const std::int64_t s1 = mod(2 * spec.w1.a), s2 = mod(2 * w2.a);
            double rv = 0.0, re = 0.0;
            for (std::size_t i = 0; i < nn; ++i) {
                const std::size_t c = j * nn + i;
                if (grid.cells[c]) rv += v1[static_cast<std::size_t>(m1)] * v2[static_cast<std::size_t>(m2)];
                if (grid.uncertain[c]) re += e1[static_cast<std::size_t>(m1)] * e2[static_cast<std::size_t>(m2)];
                m1 += s1;
                if (m1 >= two_n) m1 -= two_n;
                m2 += s2;
                if (m2 >= two_n) m2 -= two_n;
            }
            a.value += rv;
            a.error += re;
        }
        return a;
    });
    const double scale = 1.0 / (static_cast<double>(spec.size()) * static_cast<double>(n) * static_cast<double>(n));
    PolynomialNormReport rep;
    rep.spec = spec;
    rep.value = acc.value * scale;
    rep.error_bound = acc.error * scale;
    rep.route = "grid(" + std::to_string(n) + ")";
    return rep;
}

namespace detail {

struct Unimodular {
    LatticeVector v, xi;  // rows; v.a xi.b - v.b xi.a = 1
};

inline Unimodular complete_basis(LatticeVector v) {
    // extended Euclid on (v.a, v.b): v.a x + v.b y = 1
    std::int64_t r0 = v.a, r1 = v.b, x0 = 1, x1 = 0, y0 = 0, y1 = 1;
    while (r1 != 0) {
        const std::int64_t q = r0 / r1;
        std::tie(r0, r1) = std::pair{r1, r0 - q * r1};
        std::tie(x0, x1) = std::pair{x1, x0 - q * x1};
        std::tie(y0, y1) = std::pair{y1, y0 - q * y1};
    }
    if (r0 < 0) {
        x0 = -x0;
        y0 = -y0;
    }
    // xi.b = x0, xi.a = -y0 gives v.a xi.b - v.b xi.a = v.a x0 + v.b y0 = 1
    return {v, {-y0, x0}};
}

/// Measure of { u2 in [0,1) : (u1, u2) in S } after the change of variables
/// u = U t. Each strip becomes { dist(p u1 + q u2, Z) < rho }.
class ColumnMeasure {
public:
    ColumnMeasure(const BadSetDescriptor& desc, const Unimodular& basis) {
        for (const auto& s : desc.distinct_strips()) {
            if (s.rho <= 0.0) continue;
            const std::int64_t p = basis.xi.b * s.w.a - basis.xi.a * s.w.b;
            const std::int64_t q = cross(basis.v, s.w);
            if (q == 0)
                parallel_.push_back({p, 0, s.rho});
            else
                crossing_.push_back(q > 0 ? Transformed{p, q, s.rho} : Transformed{-p, -q, s.rho});
        }
    }

    double operator()(double u1, std::vector<std::pair<double, double>>& scratch) const {
        for (const auto& t : parallel_) {
            const double s = static_cast<double>(t.p) * u1;
            if (std::fabs(s - std::floor(s + 0.5)) < t.rho) return 0.0;
        }
        scratch.clear();
        for (const auto& t : crossing_) {
            const double q = static_cast<double>(t.q);
            const double half = t.rho / q;
            if (half >= 0.5) return 0.0;
            const double base = -static_cast<double>(t.p) * u1 / q;  // center for k = 0
            for (std::int64_t k = 0; k < t.q; ++k) {
                double c = base + static_cast<double>(k) / q;
                c -= std::floor(c);
                double lo = c - half, hi = c + half;
                if (lo < 0.0) {
                    scratch.emplace_back(lo + 1.0, 1.0);
                    lo = 0.0;
                }
                if (hi > 1.0) {
                    scratch.emplace_back(0.0, hi - 1.0);
                    hi = 1.0;
                }
                scratch.emplace_back(lo, hi);
            }
        }
        std::sort(scratch.begin(), scratch.end());
        double covered = 0.0, cl = 0.0, ch = -1.0;
        for (const auto& [lo, hi] : scratch) {
            if (lo > ch) {
                if (ch > cl) covered += ch - cl;
                cl = lo;
                ch = hi;
            } else {
                ch = std::max(ch, hi);
            }
        }
        if (ch > cl) covered += ch - cl;
        return std::max(0.0, 1.0 - covered);
    }

private:
    struct Transformed {
        std::int64_t p, q;
        double rho;
    };
    std::vector<Transformed> parallel_, crossing_;
};

}  // namespace detail

/// int_S |P|^2 for a rank-1 spec through the measure-preserving change of
/// variables u = U t with first row the generator v of w = ell v: |P|^2 then
/// depends on u1 only and the inner u2-measure of S is computed exactly as a
/// union of intervals. The outer integral is split at the jumps caused by
/// strips parallel to v and uses composite 3-point Gauss-Legendre panels;
/// the error estimate is the difference to the 2-point rule.
inline PolynomialNormReport gap_polynomial_norm_sheared(const BadSetDescriptor& desc, const GapSpec& spec, int panels = 0) {
    validate(spec);
    if (spec.rank() != 1) throw std::invalid_argument("sheared quadrature needs a rank-1 spec");
    const auto [ell, v] = generator_decompose(spec.w1);
    const std::int64_t extent = ell * (spec.d1 - 1 + spec.index_origin);
    std::int64_t n = std::max<std::int64_t>(1024, 4 * extent);
    if (panels > 0) {
        if (panels < 2 * extent) throw std::invalid_argument("sheared quadrature: too few panels");
        n = panels;
    }
    if (n > 16LL * limits().max_grid) throw ResourceLimitError("sheared quadrature: panel count above cap");
    const auto basis = detail::complete_basis(v);
    const detail::ColumnMeasure column(desc, basis);

    std::vector<double> cuts{0.0, 1.0};
    for (const auto& s : desc.distinct_strips()) {
        if (s.rho <= 0.0 || cross(v, s.w) != 0) continue;
        const std::int64_t p = std::abs(basis.xi.b * s.w.a - basis.xi.a * s.w.b);
        for (std::int64_t k = 0; k <= p; ++k)
            for (double e : {(static_cast<double>(k) - s.rho) / static_cast<double>(p),
                             (static_cast<double>(k) + s.rho) / static_cast<double>(p)})
                if (e > 0.0 && e < 1.0) cuts.push_back(e);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<std::pair<double, double>> pieces;  // (left end, width)
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], len = cuts[i + 1] - a;
        if (len <= 0.0) continue;
        const auto m = static_cast<std::int64_t>(std::ceil(len * static_cast<double>(n)));
        for (std::int64_t j = 0; j < m; ++j)
            pieces.emplace_back(a + len * static_cast<double>(j) / static_cast<double>(m), len / static_cast<double>(m));
    }

    const double K = static_cast<double>(spec.d1), L = static_cast<double>(ell);
    auto kernel = [&](double u1) {
        double th = L * u1;
        th -= std::floor(th);
        const double den = std::sin(std::numbers::pi * th);
        if (std::fabs(den) < 1e-9) return K * K;
        const double num = std::sin(std::numbers::pi * K * th);
        return num * num / (den * den);
    };
    static constexpr double g3x = 0.7745966692414834, g3w[2] = {5.0 / 9.0, 8.0 / 9.0};
    static constexpr double g2x = 0.5773502691896258;
    struct Acc {
        double hi = 0.0, lo = 0.0;
        Acc& operator+=(const Acc& o) {
            hi += o.hi;
            lo += o.lo;
            return *this;
        }
    };
    const Acc acc = chunked_sum<Acc>(pieces.size(), 256, [&](std::size_t b, std::size_t e) {
        std::vector<std::pair<double, double>> scratch;
        Acc a;
        auto f = [&](double u) { return kernel(u) * column(u, scratch); };
        for (std::size_t i = b; i < e; ++i) {
            const double h = 0.5 * pieces[i].second, c = pieces[i].first + h;
            a.hi += h * (g3w[0] * (f(c - g3x * h) + f(c + g3x * h)) + g3w[1] * f(c));
            a.lo += h * (f(c - g2x * h) + f(c + g2x * h));
        }
        return a;
    });
    PolynomialNormReport rep;
    rep.spec = spec;
    rep.value = acc.hi / K;
    rep.error_bound = std::fabs(acc.hi - acc.lo) / K;
    rep.route = "sheared(" + std::to_string(n) + ")";
    return rep;
}

/// Attaches the reporting bound C / (size * rho_w1 [* rho_w2]).
inline void attach_bound(PolynomialNormReport& rep, const BadSetDescriptor& desc, double C) {
    double denom = static_cast<double>(rep.spec.size()) * desc.rho(rep.spec.w1);
    if (rep.spec.w2) denom *= desc.rho(*rep.spec.w2);
    rep.bound = C / denom;
    rep.ratio = rep.value / rep.bound;
}

/// Norm over S_W with route selection: rank 1 defaults to the sheared
/// quadrature, rank 2 to the rasterized grid.
inline PolynomialNormReport gap_polynomial_norm(const BadSetDescriptor& desc, const GapSpec& spec,
                                                const NormOptions& opts = {}) {
    validate(spec);
    NormRoute route = opts.route;
    if (route == NormRoute::automatic) route = spec.rank() == 1 ? NormRoute::sheared : NormRoute::grid;
    PolynomialNormReport rep;
    if (route == NormRoute::sheared) {
        rep = gap_polynomial_norm_sheared(desc, spec, opts.grid_n);
    } else {
        int n = admissible_grid(spec, opts.grid_n);
        if (opts.grid_n == 0)
            while (n < opts.min_grid) n *= 2;
        rep = gap_polynomial_norm(rasterize(desc, n), spec);
    }
    attach_bound(rep, desc, opts.reporting_constant);
    return rep;
}

// ---------------------------------------------------------------------------
// Dirichlet tail

/// int_{rho < |s| <= 1/2} |sum_{j=1}^K e^{2 pi i j s}|^2 ds by adaptive
/// Gauss-Kronrod on each lobe [k/K, (k+1)/K] of the kernel.
inline double dirichlet_tail(double rho_hat, std::int64_t K) {
    if (!(rho_hat > 0.0 && rho_hat < 0.5)) throw std::invalid_argument("dirichlet_tail: rho must lie in (0, 1/2)");
    if (K < 1) throw std::invalid_argument("dirichlet_tail: K must be positive");
    const double dK = static_cast<double>(K);
    auto f = [dK](double s) {
        const double den = std::sin(std::numbers::pi * s);
        const double num = std::sin(std::numbers::pi * dK * s);
        return (num * num) / (den * den);
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    double total = 0.0;
    double a = rho_hat;
    std::int64_t lobe = static_cast<std::int64_t>(std::floor(rho_hat * dK)) + 1;
    while (a < 0.5) {
        const double b = std::min(0.5, static_cast<double>(lobe) / dK);
        if (b > a) total += GK::integrate(f, a, b, 15, 1e-10);
        a = b;
        ++lobe;
    }
    return 2.0 * total;
}

// ---------------------------------------------------------------------------
// Decay experiment

struct RankOneMode {};
struct RankTwoMode {};
struct FixedGeneratorMode {
    LatticeVector v;
};
using DecayMode = std::variant<RankOneMode, RankTwoMode, FixedGeneratorMode>;

struct DecayRow {
    std::int64_t N = 0;
    double alpha = 0.0;
    PolynomialNormReport report;
};

/// Step length floor(N^alpha), at least 1.
inline std::int64_t step_length(std::int64_t N, double alpha) {
    const double s = std::pow(static_cast<double>(N), alpha);
    // guard against pow(9, 0.5) = 2.9999...
    auto k = static_cast<std::int64_t>(std::floor(s + 1e-9));
    return std::max<std::int64_t>(1, k);
}

/// The spectrum tested at size N:
///  rank 1      AP((s, 0); N^2)
///  rank 2      GAP((s, 0), (0, s); N, N)
///  generator   AP(s v; N)
/// with s = floor(N^alpha) and 1-based indexing.
inline GapSpec decay_spec(const DecayMode& mode, std::int64_t N, double alpha) {
    const std::int64_t s = step_length(N, alpha);
    if (std::holds_alternative<RankOneMode>(mode)) return GapSpec::ap({s, 0}, N * N, 1);
    if (std::holds_alternative<RankTwoMode>(mode)) return GapSpec::gap({s, 0}, {0, s}, N, N, 1);
    const auto v = std::get<FixedGeneratorMode>(mode).v;
    if (!is_coprime(v)) throw std::invalid_argument("fixed generator must be a coprime vector");
    return GapSpec::ap(s * v, N, 1);
}

inline std::vector<DecayRow> thm1_decay_experiment(const BadSetDescriptor& desc, double alpha,
                                                   const std::vector<std::int64_t>& sizes, const DecayMode& mode,
                                                   const NormOptions& opts = {}) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    if (sizes.empty()) throw std::invalid_argument("sizes must be nonempty");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] < 2) throw std::invalid_argument("sizes must be >= 2");
        if (i > 0 && sizes[i] <= sizes[i - 1]) throw std::invalid_argument("sizes must be increasing");
    }
    std::vector<GapSpec> specs;
    for (const auto N : sizes) specs.push_back(decay_spec(mode, N, alpha));
    NormRoute route = opts.route;
    if (route == NormRoute::automatic) route = specs.front().rank() == 1 ? NormRoute::sheared : NormRoute::grid;

    std::vector<DecayRow> rows;
    rows.reserve(sizes.size());
    if (route == NormRoute::grid) {
        // one raster at the finest resolution any row needs
        int n = opts.grid_n;
        if (n == 0) {
            for (const auto& s : specs) n = std::max(n, admissible_grid(s, 0));
            while (n < opts.min_grid) n *= 2;
        }
        const TorusGrid grid = rasterize(desc, n);
        for (std::size_t i = 0; i < specs.size(); ++i) {
            auto rep = gap_polynomial_norm(grid, specs[i]);
            attach_bound(rep, desc, opts.reporting_constant);
            rows.push_back({sizes[i], alpha, std::move(rep)});
        }
        return rows;
    }
    NormOptions sheared = opts;
    sheared.route = route;
    for (std::size_t i = 0; i < specs.size(); ++i)
        rows.push_back({sizes[i], alpha, gap_polynomial_norm(desc, specs[i], sheared)});
    return rows;
}

}  // namespace rgap
