#pragma once

// Gram matrices of exponential systems over a torus set, lower Riesz bound
// certificates, the prime-slope small-mass search, translation gluing and
// greedy assembly of a Riesz frequency set.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "rgap/errors.hpp"
#include "rgap/lattice.hpp"
#include "rgap/parallel.hpp"
#include "rgap/spectrum.hpp"

namespace rgap {

using FrequencyList = std::vector<LatticeVector>;

// ---------------------------------------------------------------------------
// Gram matrix

struct GramMatrix {
    FrequencyList frequencies;
    Eigen::MatrixXcd entries;

    std::size_t size() const { return frequencies.size(); }
};

namespace detail {

inline void require_difference_range(const FourierTable& table, const FrequencyList& f) {
    for (std::size_t i = 0; i < f.size(); ++i)
        for (std::size_t j = 0; j < f.size(); ++j)
            if (!table.in_range(f[i] - f[j]))
                throw std::invalid_argument("difference " + to_string(f[i]) + " - " + to_string(f[j]) +
                                            " outside table range " + std::to_string(table.max_freq()));
}

inline bool has_duplicates(const FrequencyList& f) {
    std::unordered_set<LatticeVector, LatticeVectorHash> seen;
    for (const auto& l : f)
        if (!seen.insert(l).second) return true;
    return false;
}

}  // namespace detail

/// entry(i, j) = c(lambda_i - lambda_j).
inline GramMatrix gram(const FourierTable& table, FrequencyList frequencies) {
    detail::require_difference_range(table, frequencies);
    const auto n = static_cast<Eigen::Index>(frequencies.size());
    GramMatrix g{std::move(frequencies), Eigen::MatrixXcd(n, n)};
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            g.entries(i, j) = table.get(g.frequencies[static_cast<std::size_t>(i)] - g.frequencies[static_cast<std::size_t>(j)]);
    return g;
}

struct LowerRieszBound {
    double gamma = 0.0;       // max(0, lambda_min - residual)
    double lambda_min = 0.0;  // raw smallest eigenvalue
    double lambda_max = 0.0;
    double residual = 0.0;    // ||G V - V diag(lambda)||_F
};

inline void require_hermitian(const Eigen::MatrixXcd& m, double tol = 1e-12) {
    const double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (dev > tol) throw InternalConsistencyError("Gram matrix is not Hermitian (deviation " + std::to_string(dev) + ")");
}

inline Eigen::VectorXd gram_eigenvalues(const GramMatrix& g) {
    if (g.size() == 0) return {};
    require_hermitian(g.entries);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g.entries, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

inline LowerRieszBound lower_riesz_bound(const GramMatrix& g) {
    if (g.size() == 0) throw std::invalid_argument("lower_riesz_bound: empty Gram matrix");
    require_hermitian(g.entries);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g.entries);
    if (es.info() != Eigen::Success) throw InternalConsistencyError("Hermitian eigensolver did not converge");
    const auto& V = es.eigenvectors();
    const auto& L = es.eigenvalues();
    LowerRieszBound r;
    r.lambda_min = L.minCoeff();
    r.lambda_max = L.maxCoeff();
    r.residual = (g.entries * V - V * L.cast<std::complex<double>>().asDiagonal()).norm();
    r.gamma = std::max(0.0, r.lambda_min - r.residual);
    return r;
}

// ---------------------------------------------------------------------------
// Mass sequence a(lambda) = |c(lambda)|^2

class MassSequence {
public:
    explicit MassSequence(std::shared_ptr<const FourierTable> table) : table_(std::move(table)) {
        if (!table_) throw std::invalid_argument("MassSequence: null table");
    }

    /// Explicit nonnegative masses; missing frequencies have mass 0 and the
    /// domain is |lambda|_inf <= range.
    MassSequence(std::unordered_map<LatticeVector, double, LatticeVectorHash> masses, std::int64_t range)
        : explicit_(std::move(masses)), range_(range) {
        for (const auto& [l, m] : explicit_) {
            if (!(m >= 0.0)) throw std::invalid_argument("MassSequence: negative mass at " + to_string(l));
            if (l.max_abs() > range_) throw std::invalid_argument("MassSequence: mass outside range at " + to_string(l));
        }
    }

    std::int64_t range() const { return table_ ? table_->max_freq() : range_; }
    bool in_range(LatticeVector l) const { return l.max_abs() <= range(); }

    double operator()(LatticeVector l) const {
        if (!in_range(l))
            throw std::invalid_argument("mass at " + to_string(l) + " outside range " + std::to_string(range()));
        if (table_) return std::norm(table_->get(l));
        auto it = explicit_.find(l);
        return it == explicit_.end() ? 0.0 : it->second;
    }

    /// sum of all masses; at most |S| for an indicator table.
    double total() const {
        if (table_) return table_->energy();
        double s = 0.0;
        for (const auto& [l, m] : explicit_) s += m;
        return s;
    }

    /// max |a(lambda) - a(-lambda)| over the stored support.
    double symmetry_defect() const {
        if (table_) return 0.0;  // tables enforce conjugate symmetry exactly
        double d = 0.0;
        for (const auto& [l, m] : explicit_) d = std::max(d, std::fabs(m - (*this)(-l)));
        return d;
    }

    const FourierTable* table() const { return table_.get(); }

private:
    std::shared_ptr<const FourierTable> table_;
    std::unordered_map<LatticeVector, double, LatticeVectorHash> explicit_;
    std::int64_t range_ = 0;
};

inline MassSequence mass_sequence(const FourierTable& table) {
    return MassSequence(std::make_shared<const FourierTable>(table));
}

namespace detail {

inline void require_rank_one(const GapSpec& spec) {
    validate(spec);
    if (spec.rank() != 1) throw std::invalid_argument("expected a rank-1 spec");
}

}  // namespace detail

inline double block_mass(const MassSequence& a, const GapSpec& spec) {
    detail::require_rank_one(spec);
    double s = 0.0;
    for (const auto& l : gap_points(spec)) s += a(l);
    return s;
}

/// sum over ordered pairs lambda != mu of a(lambda - mu), through the
/// reduction 2 sum_{j=1}^{d-1} (d - j) a(j w).
inline double difference_mass(const MassSequence& a, const GapSpec& spec) {
    detail::require_rank_one(spec);
    double s = 0.0;
    for (std::int64_t j = 1; j < spec.d1; ++j) s += static_cast<double>(spec.d1 - j) * a(j * spec.w1);
    return 2.0 * s;
}

/// Direct double sum for an arbitrary frequency list.
inline double difference_mass(const MassSequence& a, const FrequencyList& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        for (std::size_t j = 0; j < f.size(); ++j)
            if (i != j) s += a(f[i] - f[j]);
    return s;
}

// ---------------------------------------------------------------------------
// Small-mass AP search over prime slopes

struct PrimeMassRecord {
    std::int64_t p = 0;
    std::int64_t best_k = 0;
    double best_mass = 0.0;
    double threshold = 0.0;  // eps / p^2
};

struct MassSearchResult {
    std::optional<std::int64_t> p, k;
    double mass = std::numeric_limits<double>::quiet_NaN();
    std::vector<PrimeMassRecord> scanned;  // one per prime examined

    bool found() const { return p.has_value(); }
};

/// First (p, k), primes ascending and 1 <= k <= p - 1 ascending, with
/// block_mass(B(p, k)) < eps / p^2. A budget without such a block returns the
/// per-prime minima instead.
inline MassSearchResult find_small_mass_ap(const MassSequence& a, double eps, const std::vector<std::int64_t>& primes) {
    if (!(eps > 0.0)) throw std::invalid_argument("find_small_mass_ap: eps must be positive");
    for (std::size_t i = 0; i < primes.size(); ++i) {
        if (!is_prime(primes[i])) throw std::invalid_argument("find_small_mass_ap: " + std::to_string(primes[i]) + " is not prime");
        if (i > 0 && primes[i] <= primes[i - 1]) throw std::invalid_argument("find_small_mass_ap: primes must be ascending");
    }
    MassSearchResult res;
    for (const auto p : primes) {
        PrimeMassRecord rec{p, 0, std::numeric_limits<double>::infinity(), eps / static_cast<double>(p * p)};
        for (std::int64_t k = 1; k < p; ++k) {
            const double m = block_mass(a, prime_slope_gap(p, k));
            if (m < rec.best_mass) {
                rec.best_mass = m;
                rec.best_k = k;
            }
            if (m < rec.threshold) {
                res.scanned.push_back({p, k, m, rec.threshold});
                res.p = p;
                res.k = k;
                res.mass = m;
                return res;
            }
        }
        res.scanned.push_back(rec);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Certificates

enum class CertMethod { eigen, hilbert_schmidt };

inline const char* to_string(CertMethod m) { return m == CertMethod::eigen ? "eigen" : "hilbert_schmidt"; }

struct RieszCertificate {
    FrequencyList frequencies;
    std::optional<GapSpec> spec;
    double target = 0.0;
    double gamma = 0.0;  // best route, minus its residual and fourier_error
    CertMethod method = CertMethod::eigen;
    double residual = 0.0;
    double fourier_error = 0.0;  // block size times the table's coefficient error

    double measure = 0.0;  // c(0)
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double eigen_residual = 0.0;
    double eigen_gamma = 0.0;  // lambda_min - eigen_residual
    double difference_mass = 0.0;
    double hs_residual = 0.0;
    double hs_gamma = 0.0;  // c(0) - sqrt(difference_mass) - hs_residual

    bool success() const { return gamma >= target; }
};

inline RieszCertificate certify_block(const FourierTable& table, FrequencyList frequencies, double target_gamma) {
    if (frequencies.empty()) throw std::invalid_argument("certify_block: empty block");
    if (detail::has_duplicates(frequencies)) throw std::invalid_argument("certify_block: duplicate frequencies");
    RieszCertificate c;
    c.target = target_gamma;
    const GramMatrix g = gram(table, frequencies);
    const auto lb = lower_riesz_bound(g);
    c.measure = table.measure();
    c.lambda_min = lb.lambda_min;
    c.lambda_max = lb.lambda_max;
    c.eigen_residual = lb.residual;
    c.eigen_gamma = lb.lambda_min - lb.residual;

    // squared Hilbert-Schmidt norm of the off-diagonal part
    const MassSequence a(std::shared_ptr<const FourierTable>(&table, [](const FourierTable*) {}));
    c.difference_mass = difference_mass(a, frequencies);
    const double n = static_cast<double>(frequencies.size());
    c.hs_residual = 4.0 * n * n * std::numeric_limits<double>::epsilon();
    c.hs_gamma = c.measure - std::sqrt(c.difference_mass) - c.hs_residual;

    c.fourier_error = n * table.error_bound();
    if (c.eigen_gamma >= c.hs_gamma) {
        c.method = CertMethod::eigen;
        c.residual = c.eigen_residual;
        c.gamma = c.eigen_gamma - c.fourier_error;
    } else {
        c.method = CertMethod::hilbert_schmidt;
        c.residual = c.hs_residual;
        c.gamma = c.hs_gamma - c.fourier_error;
    }
    c.frequencies = std::move(frequencies);
    return c;
}

inline RieszCertificate certify_block(const FourierTable& table, const GapSpec& spec, double target_gamma) {
    auto c = certify_block(table, gap_points(spec), target_gamma);
    c.spec = spec;
    return c;
}

// ---------------------------------------------------------------------------
// Translation gluing

struct TranslationOptions {
    std::int64_t initial_radius = 0;
    /// 0: as far as the table range allows.
    std::int64_t max_radius = 0;
    /// candidates evaluated per parallel batch; acceptance stays in order
    std::size_t batch = 64;
};

struct TranslationResult {
    std::optional<LatticeVector> M;
    double lambda_min = std::numeric_limits<double>::quiet_NaN();  // at M
    std::optional<LatticeVector> best_M;                           // best seen, for exhaustion reports
    double best_lambda_min = -std::numeric_limits<double>::infinity();
    std::int64_t candidates = 0;
    std::int64_t searched_radius = 0;

    bool found() const { return M.has_value(); }
};

namespace detail {

/// M with lo < |M|_inf <= hi, ordered by |M|_inf then lexicographically.
/// lo < 0 includes the origin.
inline FrequencyList shell(std::int64_t lo, std::int64_t hi) {
    FrequencyList out;
    for (std::int64_t r = std::max<std::int64_t>(lo + 1, 0); r <= hi; ++r) {
        if (r == 0) {
            out.push_back({0, 0});
            continue;
        }
        for (std::int64_t a = -r; a <= r; ++a) {
            if (a == -r || a == r)
                for (std::int64_t b = -r; b <= r; ++b) out.push_back({a, b});
            else {
                out.push_back({a, -r});
                out.push_back({a, r});
            }
        }
    }
    return out;
}

struct Box {
    std::int64_t lo_a, hi_a, lo_b, hi_b;
};

inline Box bounding_box(const FrequencyList& f) {
    Box b{f.front().a, f.front().a, f.front().b, f.front().b};
    for (const auto& l : f) {
        b.lo_a = std::min(b.lo_a, l.a);
        b.hi_a = std::max(b.hi_a, l.a);
        b.lo_b = std::min(b.lo_b, l.b);
        b.hi_b = std::max(b.hi_b, l.b);
    }
    return b;
}

}  // namespace detail

/// Searches M such that block1 together with M + block2 has lambda_min >=
/// gamma_prime. Shells |M|_inf <= R0, then R doubling; inside a shell the
/// order is by |M|_inf, then lexicographic. Candidates that create a repeated
/// frequency or a difference outside the table are skipped.
inline TranslationResult find_translation(const FourierTable& table, const FrequencyList& block1,
                                          const FrequencyList& block2, double gamma_prime,
                                          const TranslationOptions& opts = {}) {
    if (block1.empty() || block2.empty()) throw std::invalid_argument("find_translation: empty block");
    const double c0 = table.measure();
    if (gamma_prime >= c0)
        throw std::invalid_argument("find_translation: gamma_prime " + std::to_string(gamma_prime) +
                                    " is not below the diagonal c(0) = " + std::to_string(c0));
    for (const auto* b : {&block1, &block2}) {
        const auto lb = lower_riesz_bound(gram(table, *b));
        if (gamma_prime >= lb.lambda_min)
            throw std::invalid_argument("find_translation: gamma_prime " + std::to_string(gamma_prime) +
                                        " is not below a block's lambda_min " + std::to_string(lb.lambda_min));
    }

    const auto b1 = detail::bounding_box(block1);
    const auto b2 = detail::bounding_box(block2);
    const std::int64_t F = table.max_freq();
    // cross differences lambda - mu - M must stay within F
    auto in_range = [&](LatticeVector M) {
        return std::max({b1.hi_a - b2.lo_a - M.a, -(b1.lo_a - b2.hi_a - M.a), b1.hi_b - b2.lo_b - M.b,
                         -(b1.lo_b - b2.hi_b - M.b)}) <= F;
    };
    // beyond this radius no candidate is in range
    const std::int64_t reach =
        F + std::max({std::abs(b1.hi_a - b2.lo_a), std::abs(b1.lo_a - b2.hi_a), std::abs(b1.hi_b - b2.lo_b),
                      std::abs(b1.lo_b - b2.hi_b)});
    const std::int64_t limit = opts.max_radius > 0 ? std::min(opts.max_radius, reach) : reach;

    const std::unordered_set<LatticeVector, LatticeVectorHash> first(block1.begin(), block1.end());
    FrequencyList joint = block1;
    joint.insert(joint.end(), block2.size(), LatticeVector{});
    const auto n1 = static_cast<Eigen::Index>(block1.size());
    const auto n = static_cast<Eigen::Index>(joint.size());
    // block1 and block2 diagonal blocks are translation invariant
    Eigen::MatrixXcd base(n, n);
    base.topLeftCorner(n1, n1) = gram(table, block1).entries;
    base.bottomRightCorner(n - n1, n - n1) = gram(table, block2).entries;

    TranslationResult res;
    auto admissible = [&](LatticeVector M) {
        if (!in_range(M)) return false;
        for (const auto& l : block2)
            if (first.count(l + M)) return false;
        return true;
    };
    auto evaluate = [&](LatticeVector M) {
        Eigen::MatrixXcd g = base;
        for (Eigen::Index i = 0; i < n1; ++i)
            for (Eigen::Index j = n1; j < n; ++j) {
                const auto d = block1[static_cast<std::size_t>(i)] - (block2[static_cast<std::size_t>(j - n1)] + M);
                g(i, j) = table.get(d);
                g(j, i) = std::conj(g(i, j));
            }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    };

    std::int64_t lo = -1;
    std::int64_t hi = std::min(std::max<std::int64_t>(opts.initial_radius, 0), limit);
    while (true) {
        FrequencyList cand;
        for (const auto& M : detail::shell(lo, hi))
            if (admissible(M)) cand.push_back(M);
        for (std::size_t start = 0; start < cand.size(); start += opts.batch) {
            const std::size_t stop = std::min(cand.size(), start + opts.batch);
            std::vector<double> lam(stop - start);
            parallel_chunks(stop - start, 1, [&](std::size_t, std::size_t b, std::size_t e) {
                for (std::size_t i = b; i < e; ++i) lam[i] = evaluate(cand[start + i]);
            });
            for (std::size_t i = 0; i < lam.size(); ++i) {
                ++res.candidates;
                if (lam[i] > res.best_lambda_min) {
                    res.best_lambda_min = lam[i];
                    res.best_M = cand[start + i];
                }
                if (lam[i] >= gamma_prime) {
                    res.M = cand[start + i];
                    res.lambda_min = lam[i];
                    res.searched_radius = cand[start + i].max_abs();
                    return res;
                }
            }
        }
        res.searched_radius = hi;
        if (hi >= limit) return res;
        lo = hi;
        hi = std::min(limit, std::max<std::int64_t>(1, 2 * hi));
    }
}

// ---------------------------------------------------------------------------
// Assembly

struct LambdaSection {
    std::int64_t p = 0, k = 0;
    LatticeVector M;
    RieszCertificate certificate;  // of the untranslated block B(p, k)
};

struct SkippedPrime {
    std::int64_t p = 0;
    std::string reason;  // "mass", "certificate" or "translation"
    std::optional<MassSearchResult> mass_search;
    std::optional<TranslationResult> translation;
};

struct Assembly {
    double set_measure = 0.0;
    double block_gamma = 0.0;   // c(0) / 2
    double target_gamma = 0.0;  // gamma_fraction * block_gamma
    std::vector<LambdaSection> sections;
    std::vector<SkippedPrime> skipped;
    FrequencyList frequencies;                  // the finite union
    std::optional<RieszCertificate> global;     // absent for an empty union
    bool empty() const { return sections.empty(); }
    bool partial() const { return !skipped.empty() || (global && !global->success()); }
};

/// Greedy construction: for each prime p pick (p, k) with small mass at
/// eps = (c(0)/2)^2, certify B(p, k) at c(0)/2, then translate it next to the
/// running union so that the union keeps lambda_min >= gamma_fraction * c(0)/2.
inline Assembly assemble_lambda(const FourierTable& table, const std::vector<std::int64_t>& primes,
                                double gamma_fraction, const TranslationOptions& topts = {}) {
    if (!(gamma_fraction > 0.0 && gamma_fraction < 1.0))
        throw std::invalid_argument("assemble_lambda: gamma_fraction must lie in (0, 1)");
    Assembly out;
    out.set_measure = table.measure();
    out.block_gamma = out.set_measure / 2.0;
    out.target_gamma = gamma_fraction * out.block_gamma;
    if (primes.empty()) return out;
    if (!(out.set_measure > 0.0)) throw std::invalid_argument("assemble_lambda: set has zero measure");

    const MassSequence a = mass_sequence(table);
    const double eps = out.block_gamma * out.block_gamma;
    for (const auto p : primes) {
        auto search = find_small_mass_ap(a, eps, {p});
        if (!search.found()) {
            out.skipped.push_back({p, "mass", std::move(search), std::nullopt});
            continue;
        }
        const auto spec = prime_slope_gap(p, *search.k);
        auto cert = certify_block(table, spec, out.block_gamma);
        if (!cert.success()) {
            out.skipped.push_back({p, "certificate", std::move(search), std::nullopt});
            continue;
        }
        LatticeVector M{0, 0};
        if (!out.frequencies.empty()) {
            auto tr = find_translation(table, out.frequencies, cert.frequencies, out.target_gamma, topts);
            if (!tr.found()) {
                out.skipped.push_back({p, "translation", std::move(search), std::move(tr)});
                continue;
            }
            M = *tr.M;
        }
        for (const auto& l : cert.frequencies) out.frequencies.push_back(l + M);
        out.sections.push_back({p, *search.k, M, std::move(cert)});
    }
    if (!out.frequencies.empty()) out.global = certify_block(table, out.frequencies, out.target_gamma);
    return out;
}

}  // namespace rgap
