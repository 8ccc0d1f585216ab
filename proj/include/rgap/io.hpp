#pragma once

// JSON and CSV persistence. Every JSON document carries "schema": "rgap/1".
// Doubles are written in shortest round-trip form, so write-then-read
// reproduces the in-memory values exactly.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "rgap/lattice.hpp"
#include "rgap/riesz.hpp"
#include "rgap/setbuilder.hpp"
#include "rgap/spectrum.hpp"

namespace rgap::io {

using nlohmann::json;

inline constexpr const char* schema_tag = "rgap/1";

inline json tagged() { return json{{"schema", schema_tag}}; }

inline void check_schema(const json& j) {
    if (!j.contains("schema") || j.at("schema") != schema_tag)
        throw std::invalid_argument("missing or unsupported schema tag (expected rgap/1)");
}

inline json to_json(LatticeVector v) { return json::array({v.a, v.b}); }

inline LatticeVector vector_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw std::invalid_argument("lattice vector must be [a, b]");
    return {j[0].get<std::int64_t>(), j[1].get<std::int64_t>()};
}

// ---------------------------------------------------------------------------
// GapSpec

inline json to_json(const GapSpec& s) {
    return {{"w1", to_json(s.w1)},
            {"w2", s.w2 ? to_json(*s.w2) : json(nullptr)},
            {"d1", s.d1},
            {"d2", s.d2},
            {"translation", to_json(s.translation)},
            {"index_origin", s.index_origin}};
}

inline GapSpec gap_spec_from_json(const json& j) {
    GapSpec s;
    s.w1 = vector_from_json(j.at("w1"));
    if (j.contains("w2") && !j.at("w2").is_null()) s.w2 = vector_from_json(j.at("w2"));
    s.d1 = j.at("d1").get<std::int64_t>();
    s.d2 = j.value("d2", std::int64_t{1});
    if (j.contains("translation")) s.translation = vector_from_json(j.at("translation"));
    s.index_origin = j.value("index_origin", 0);
    validate(s);
    return s;
}

// ---------------------------------------------------------------------------
// BadSetDescriptor

inline json to_json(const BadSetDescriptor& d) {
    json j = tagged();
    if (d.delta()) {
        j["epsilon"] = d.delta()->epsilon;
        j["c0"] = d.delta()->c0;
    } else {
        j["epsilon"] = nullptr;
        j["c0"] = nullptr;
    }
    j["truncation_W"] = d.truncation_W();
    json rho = json::array();
    for (const auto& s : d.strips()) rho.push_back({{"w", to_json(s.w)}, {"rho", s.rho}});
    j["rho"] = std::move(rho);
    j["tail_bound"] = d.tail_bound();
    return j;
}

inline BadSetDescriptor descriptor_from_json(const json& j) {
    check_schema(j);
    std::optional<DeltaSequence> delta;
    if (!j.at("c0").is_null()) delta = DeltaSequence{j.at("epsilon").get<double>(), j.at("c0").get<double>()};
    std::vector<Strip> strips;
    for (const auto& e : j.at("rho")) {
        const Strip s{vector_from_json(e.at("w")), e.at("rho").get<double>()};
        if (s.w.is_zero() || !(s.rho >= 0.0 && s.rho < 0.5)) throw std::invalid_argument("invalid strip entry");
        strips.push_back(s);
    }
    return BadSetDescriptor::restore(delta, j.at("truncation_W").get<std::int64_t>(), std::move(strips),
                                     j.at("tail_bound").get<double>());
}

// ---------------------------------------------------------------------------
// FourierTable
//
// Dense tables list one of each +-lambda pair (the upper half-plane) with
// nonzero value. Separable tables store their two factor arrays for k >= 0
// under "factors"; the coefficient list would be quadratic in F.

inline json to_json(const FourierTable& t) {
    json j = tagged();
    j["max_freq"] = t.max_freq();
    j["measure"] = t.measure();
    j["error_bound"] = t.error_bound();
    if (t.is_separable()) {
        j["representation"] = "separable";
        auto half = [&](const std::vector<cdouble>& f) {
            json a = json::array();
            for (int k = 0; k <= t.max_freq(); ++k) {
                const auto& v = f[static_cast<std::size_t>(k + t.max_freq())];
                a.push_back(json::array({v.real(), v.imag()}));
            }
            return a;
        };
        j["factors"] = {{"x", half(t.factor_x())}, {"y", half(t.factor_y())}};
        return j;
    }
    j["representation"] = "dense";
    json coeffs = json::array();
    const int F = t.max_freq();
    for (int l2 = 0; l2 <= F; ++l2)
        for (int l1 = -F; l1 <= F; ++l1) {
            const LatticeVector l{l1, l2};
            if (!FourierTable::upper_half(l)) continue;
            const cdouble v = t.get(l);
            if (std::abs(v) <= FourierTable::storage_floor) continue;
            coeffs.push_back({{"lambda", to_json(l)}, {"re", v.real()}, {"im", v.imag()}});
        }
    j["coefficients"] = std::move(coeffs);
    return j;
}

inline FourierTable fourier_from_json(const json& j) {
    check_schema(j);
    const int F = j.at("max_freq").get<int>();
    if (F < 0) throw std::invalid_argument("max_freq must be >= 0");
    const double err = j.value("error_bound", 0.0);
    if (j.value("representation", std::string("dense")) == "separable") {
        auto full = [&](const json& a) {
            if (!a.is_array() || a.size() != static_cast<std::size_t>(F) + 1)
                throw std::invalid_argument("factor array length must be max_freq + 1");
            std::vector<cdouble> f(2 * static_cast<std::size_t>(F) + 1);
            for (int k = 0; k <= F; ++k)
                f[static_cast<std::size_t>(k + F)] = {a[static_cast<std::size_t>(k)][0].get<double>(),
                                                      a[static_cast<std::size_t>(k)][1].get<double>()};
            return f;
        };
        return FourierTable::separable(full(j.at("factors").at("x")), full(j.at("factors").at("y")), err);
    }
    const auto side = 2 * static_cast<std::size_t>(F) + 1;
    std::vector<cdouble> values(side * side);
    for (const auto& e : j.at("coefficients")) {
        const auto l = vector_from_json(e.at("lambda"));
        if (l.max_abs() > F) throw std::invalid_argument("coefficient outside max_freq: " + to_string(l));
        const cdouble v{e.at("re").get<double>(), e.at("im").get<double>()};
        values[static_cast<std::size_t>(l.b + F) * side + static_cast<std::size_t>(l.a + F)] = v;
        values[static_cast<std::size_t>(-l.b + F) * side + static_cast<std::size_t>(-l.a + F)] = std::conj(v);
    }
    return FourierTable::dense(F, std::move(values), err);
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const MeasureEstimate& m) {
    return {{"value", m.value}, {"error_bound", m.error_bound}, {"method", m.method}};
}

inline json to_json(const PolynomialNormReport& r) {
    return {{"spec", to_json(r.spec)}, {"value", r.value},   {"error_bound", r.error_bound},
            {"bound", r.bound},        {"ratio", r.ratio},   {"route", r.route}};
}

inline json to_json(const RieszCertificate& c) {
    json freqs = json::array();
    for (const auto& l : c.frequencies) freqs.push_back(to_json(l));
    return {{"block", c.spec ? to_json(*c.spec) : json(nullptr)},
            {"frequencies", std::move(freqs)},
            {"target", c.target},
            {"gamma", c.gamma},
            {"success", c.success()},
            {"method", to_string(c.method)},
            {"residual", c.residual},
            {"fourier_error", c.fourier_error},
            {"measure", c.measure},
            {"lambda_min", c.lambda_min},
            {"lambda_max", c.lambda_max},
            {"eigen_gamma", c.eigen_gamma},
            {"difference_mass", c.difference_mass},
            {"hs_gamma", c.hs_gamma}};
}

inline json to_json(const MassSearchResult& r) {
    json scanned = json::array();
    for (const auto& s : r.scanned)
        scanned.push_back({{"p", s.p}, {"best_k", s.best_k}, {"best_mass", s.best_mass}, {"threshold", s.threshold}});
    json j{{"found", r.found()}, {"scanned", std::move(scanned)}};
    if (r.found()) {
        j["p"] = *r.p;
        j["k"] = *r.k;
        j["mass"] = r.mass;
    }
    return j;
}

inline json to_json(const TranslationResult& r) {
    json j{{"found", r.found()}, {"candidates", r.candidates}, {"searched_radius", r.searched_radius}};
    if (r.M) j["M"] = to_json(*r.M);
    if (r.best_M) {
        j["best_M"] = to_json(*r.best_M);
        j["best_lambda_min"] = r.best_lambda_min;
    }
    return j;
}

/// Sections, per-section block gamma, the global eigen certificate and any
/// skipped primes. An empty assembly has "empty": true and a null
/// global_gamma.
inline json to_json(const Assembly& a) {
    json j = tagged();
    json sections = json::array();
    for (const auto& s : a.sections)
        sections.push_back({{"p", s.p}, {"k", s.k}, {"M", to_json(s.M)}, {"gamma", s.certificate.gamma}});
    j["sections"] = std::move(sections);
    j["global_gamma"] = a.global ? json(a.global->gamma) : json(nullptr);
    j["set_measure"] = a.set_measure;
    j["block_gamma"] = a.block_gamma;
    j["target_gamma"] = a.target_gamma;
    j["empty"] = a.empty();
    j["partial"] = a.partial();
    if (a.global) {
        j["global_lambda_min"] = a.global->lambda_min;
        j["global_residual"] = a.global->eigen_residual;
        j["frequency_count"] = a.frequencies.size();
    }
    json skipped = json::array();
    for (const auto& s : a.skipped) {
        json e{{"p", s.p}, {"reason", s.reason}};
        if (s.mass_search) e["mass_search"] = to_json(*s.mass_search);
        if (s.translation) e["translation"] = to_json(*s.translation);
        skipped.push_back(std::move(e));
    }
    j["skipped"] = std::move(skipped);
    return j;
}

// ---------------------------------------------------------------------------
// Files

inline json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// CSV (RFC 4180: CRLF line breaks, fields quoted when they contain a comma,
// quote or line break)

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

inline std::string csv_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_row(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) line += ',';
        line += csv_field(fields[i]);
    }
    return line + "\r\n";
}

inline std::string decay_csv(const std::vector<DecayRow>& rows) {
    std::string out = csv_row({"N", "alpha", "step_w1", "step_w2", "value", "bound", "ratio"});
    for (const auto& r : rows) {
        const auto& s = r.report.spec;
        out += csv_row({std::to_string(r.N), csv_number(r.alpha), to_string(s.w1), s.w2 ? to_string(*s.w2) : "",
                        csv_number(r.report.value), csv_number(r.report.bound), csv_number(r.report.ratio)});
    }
    return out;
}

inline std::string decay_plot_csv(const std::vector<DecayRow>& rows) {
    std::string out = csv_row({"N", "value", "bound"});
    for (const auto& r : rows)
        out += csv_row({std::to_string(r.N), csv_number(r.report.value), csv_number(r.report.bound)});
    return out;
}

}  // namespace rgap::io
