#pragma once

// Command-line front end. Artifacts (JSON, CSV) are deterministic; the run
// report printed on stdout also carries wall-clock timings.
//
// Exit codes: 0 ok, 1 other failure, 2 invalid input, 3 resource limit,
// 4 partial result (artifacts still written).

#include <chrono>
#include <cstdint>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rgap/errors.hpp"
#include "rgap/io.hpp"
#include "rgap/lattice.hpp"
#include "rgap/parallel.hpp"
#include "rgap/riesz.hpp"
#include "rgap/setbuilder.hpp"
#include "rgap/spectrum.hpp"

namespace rgap::cli {

enum ExitCode : int { ok = 0, failure = 1, invalid = 2, resource = 3, partial = 4 };

/// Thrown by commands that wrote their artifacts but could not finish.
struct PartialResult : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    return out;
}

inline std::int64_t parse_int(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != s.size()) throw std::invalid_argument(what + ": '" + s + "' is not an integer");
    return v;
}

inline double parse_double(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != s.size()) throw std::invalid_argument(what + ": '" + s + "' is not a number");
    return v;
}

inline std::vector<std::int64_t> int_list(const std::string& s, const std::string& what) {
    std::vector<std::int64_t> out;
    for (const auto& f : split(s, ',')) out.push_back(parse_int(f, what));
    if (out.empty()) throw std::invalid_argument(what + " must be a nonempty comma-separated list");
    return out;
}

inline LatticeVector vector_arg(const std::string& s, const std::string& what) {
    const auto v = int_list(s, what);
    if (v.size() != 2) throw std::invalid_argument(what + " must be two integers a,b");
    return {v[0], v[1]};
}

struct Common {
    std::string out;
    unsigned threads = 1;
    std::uint64_t seed = 0;
};

inline void add_common(CLI::App* cmd, Common& c, bool out_required) {
    auto* o = cmd->add_option("--out", c.out, "output path");
    if (out_required) o->required();
    cmd->add_option("--threads", c.threads, "worker threads (0 = all cores)")->capture_default_str();
    cmd->add_option("--seed", c.seed, "random seed")->capture_default_str();
}

using Clock = std::chrono::steady_clock;

struct Report {
    io::json body = io::tagged();
    io::json timings = io::json::object();
    Clock::time_point start = Clock::now();

    template <class F>
    auto timed(const std::string& step, F&& f) {
        const auto t0 = Clock::now();
        auto r = f();
        timings[step] = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        return r;
    }
};

}  // namespace detail

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"rgap: bad sets and Riesz sequences of exponentials on the 2-torus"};
    app.require_subcommand(1);
    detail::Common common;
    detail::Report report;
    std::function<int()> action;

    // gen enumerate
    auto* gen = app.add_subcommand("gen", "lattice generators");
    gen->require_subcommand(1);
    auto* gen_enum = gen->add_subcommand("enumerate", "coprime generators ordered by norm");
    double gen_radius = 0;
    gen_enum->add_option("--radius", gen_radius, "enumeration radius (>= 1)")->required();
    detail::add_common(gen_enum, common, false);
    gen_enum->callback([&] {
        action = [&] {
            const auto gens = report.timed("enumerate", [&] { return enumerate_generators(gen_radius); });
            io::json j = io::tagged();
            j["radius"] = gen_radius;
            io::json list = io::json::array();
            for (const auto& g : gens) list.push_back({{"m", g.index_m}, {"v", io::to_json(g.v)}});
            j["generators"] = std::move(list);
            if (!common.out.empty()) io::write_text(common.out, io::dump(j));
            report.body["generators"] = gens.size();
            report.body["coprime_density"] = coprime_density(gen_radius);
            return ok;
        };
    });

    // set build | measure
    auto* set = app.add_subcommand("set", "bad set S_W");
    set->require_subcommand(1);
    auto* set_build = set->add_subcommand("build", "build the truncated set descriptor");
    double epsilon = 0;
    std::int64_t truncation = 0;
    set_build->add_option("--epsilon", epsilon, "measure deficit, in (0, 1)")->required();
    set_build->add_option("--truncation", truncation, "truncation radius W >= 1")->required();
    detail::add_common(set_build, common, true);
    set_build->callback([&] {
        action = [&] {
            if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("--epsilon must lie in (0, 1)");
            if (truncation < 1) throw std::invalid_argument("--truncation must be >= 1");
            const auto d = report.timed("build", [&] { return build_bad_set(epsilon, truncation); });
            io::write_text(common.out, io::dump(io::to_json(d)));
            report.body["strips"] = d.strips().size();
            report.body["tail_bound"] = d.tail_bound();
            report.body["union_lower_bound"] = {{"value", d.union_lower_bound()}, {"error_bound", "exact"}};
            report.body["measure_target"] = 1.0 - epsilon;
            return ok;
        };
    });

    auto* set_measure = set->add_subcommand("measure", "estimate |S_W|");
    std::string set_path;
    int grid = 0;
    std::int64_t samples = 0;
    set_measure->add_option("--set", set_path, "descriptor JSON")->required();
    auto* grid_opt = set_measure->add_option("--grid", grid, "grid resolution (power of two >= 64)");
    auto* samples_opt = set_measure->add_option("--samples", samples, "Monte Carlo samples (>= 10^4)");
    grid_opt->excludes(samples_opt);
    detail::add_common(set_measure, common, false);
    set_measure->callback([&] {
        action = [&] {
            if (!*grid_opt && !*samples_opt) throw std::invalid_argument("set measure needs --grid or --samples");
            const auto d = io::descriptor_from_json(io::read_json(set_path));
            const auto m = report.timed("measure", [&] {
                return *grid_opt ? measure_estimate(d, GridMethod{grid})
                                 : measure_estimate(d, MonteCarloMethod{samples, common.seed});
            });
            io::json j = io::tagged();
            j["measure"] = io::to_json(m);
            j["union_lower_bound"] = d.union_lower_bound();
            j["tail_bound"] = d.tail_bound();
            if (d.delta()) j["epsilon"] = d.delta()->epsilon;
            if (!common.out.empty()) io::write_text(common.out, io::dump(j));
            report.body["result"] = j;
            return ok;
        };
    });

    // fourier build
    auto* fourier = app.add_subcommand("fourier", "indicator Fourier tables");
    fourier->require_subcommand(1);
    auto* fourier_build = fourier->add_subcommand("build", "coefficients of a set's indicator");
    std::string f_set, f_rect;
    int f_grid = 0, f_max = 0;
    auto* f_set_opt = fourier_build->add_option("--set", f_set, "descriptor JSON (rasterized)");
    auto* f_rect_opt = fourier_build->add_option("--rect", f_rect, "rectangle a1,b1,a2,b2");
    f_set_opt->excludes(f_rect_opt);
    auto* f_grid_opt = fourier_build->add_option("--grid", f_grid, "raster resolution");
    fourier_build->add_option("--max-freq", f_max, "largest |lambda|_inf")->required();
    detail::add_common(fourier_build, common, true);
    fourier_build->callback([&] {
        action = [&] {
            if (!*f_set_opt && !*f_rect_opt) throw std::invalid_argument("fourier build needs --set or --rect");
            FourierTable t;
            if (*f_set_opt) {
                if (!*f_grid_opt) throw std::invalid_argument("--set requires --grid");
                const auto d = io::descriptor_from_json(io::read_json(f_set));
                t = report.timed("transform", [&] { return fourier_coefficients(rasterize(d, f_grid), f_max); });
            } else {
                std::vector<double> r;
                for (const auto& s : detail::split(f_rect, ',')) r.push_back(detail::parse_double(s, "--rect"));
                if (r.size() != 4) throw std::invalid_argument("--rect must be a1,b1,a2,b2");
                if (*f_grid_opt)
                    t = report.timed("transform", [&] {
                        return fourier_coefficients(rasterize_rect(r[0], r[1], r[2], r[3], f_grid), f_max);
                    });
                else
                    t = report.timed("transform", [&] { return rect_table(r[0], r[1], r[2], r[3], f_max); });
            }
            io::write_text(common.out, io::dump(io::to_json(t)));
            report.body["measure"] = t.measure();
            report.body["error_bound"] = t.error_bound() == 0.0 ? io::json("exact") : io::json(t.error_bound());
            report.body["energy"] = t.energy();
            return ok;
        };
    });

    // thm1
    auto* thm1 = app.add_subcommand("thm1", "norm decay of GAP polynomials over S_W");
    std::string t1_set, t1_sizes, t1_mode = "rank1", t1_gen = "1,0", t1_plot;
    double alpha = 0, constant = 2.0;
    int t1_grid = 0;
    thm1->add_option("--set", t1_set, "descriptor JSON")->required();
    thm1->add_option("--alpha", alpha, "step exponent, in (0, 1)")->required();
    thm1->add_option("--sizes", t1_sizes, "increasing sizes N, comma-separated")->required();
    thm1->add_option("--mode", t1_mode, "rank1 | rank2 | generator")->capture_default_str();
    thm1->add_option("--generator", t1_gen, "coprime v for --mode generator")->capture_default_str();
    thm1->add_option("--constant", constant, "reporting constant C")->capture_default_str();
    thm1->add_option("--grid", t1_grid, "grid resolution or node count (0 = automatic)");
    thm1->add_option("--plot", t1_plot, "plot-data CSV (default: <out>.plot.csv)");
    detail::add_common(thm1, common, true);
    thm1->callback([&] {
        action = [&] {
            if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("--alpha must lie in (0, 1)");
            if (!(constant > 0.0)) throw std::invalid_argument("--constant must be positive");
            const auto sizes = detail::int_list(t1_sizes, "--sizes");
            DecayMode mode;
            if (t1_mode == "rank1")
                mode = RankOneMode{};
            else if (t1_mode == "rank2")
                mode = RankTwoMode{};
            else if (t1_mode == "generator")
                mode = FixedGeneratorMode{detail::vector_arg(t1_gen, "--generator")};
            else
                throw std::invalid_argument("--mode must be rank1, rank2 or generator");
            const auto d = io::descriptor_from_json(io::read_json(t1_set));
            NormOptions opts;
            opts.grid_n = t1_grid;
            opts.reporting_constant = constant;
            const auto rows = report.timed("experiment", [&] { return thm1_decay_experiment(d, alpha, sizes, mode, opts); });
            io::json rj = io::json::array();
            for (const auto& r : rows) rj.push_back({{"N", r.N}, {"report", io::to_json(r.report)}});
            report.body["rows"] = rj;
            report.body["tail_bound"] = d.tail_bound();
            for (const auto& r : rows)
                if (!(r.report.value <= r.report.bound)) {
                    err << "value " << r.report.value << " exceeds bound " << r.report.bound << " at N = " << r.N << "\n";
                    return failure;
                }
            io::write_text(common.out, io::decay_csv(rows));
            io::write_text(t1_plot.empty() ? common.out + ".plot.csv" : t1_plot, io::decay_plot_csv(rows));
            return ok;
        };
    });

    // riesz certify | assemble, thm2
    auto* riesz = app.add_subcommand("riesz", "lower Riesz bounds");
    riesz->require_subcommand(1);
    auto* certify = riesz->add_subcommand("certify", "certify a block B(p, k)");
    std::string r_fourier, r_block;
    double target = 0;
    certify->add_option("--fourier", r_fourier, "Fourier table JSON")->required();
    certify->add_option("--block", r_block, "p,k")->required();
    certify->add_option("--target", target, "target gamma")->required();
    detail::add_common(certify, common, false);
    certify->callback([&] {
        action = [&] {
            const auto pk = detail::int_list(r_block, "--block");
            if (pk.size() != 2 || pk[0] < 1) throw std::invalid_argument("--block must be p,k with p >= 1");
            const auto t = io::fourier_from_json(io::read_json(r_fourier));
            const auto c = report.timed("certify", [&] { return certify_block(t, prime_slope_gap(pk[0], pk[1]), target); });
            io::json j = io::tagged();
            j["certificate"] = io::to_json(c);
            if (!common.out.empty()) io::write_text(common.out, io::dump(j));
            report.body["gamma"] = c.gamma;
            report.body["success"] = c.success();
            report.body["method"] = to_string(c.method);
            report.body["residual"] = c.residual;
            report.body["fourier_error"] = c.fourier_error;
            return ok;
        };
    });

    std::string a_fourier, a_primes, a_certs;
    double gamma_frac = 0.5;
    auto assemble_action = [&] {
        const auto primes = detail::int_list(a_primes, "--primes");
        if (!(gamma_frac > 0.0 && gamma_frac < 1.0)) throw std::invalid_argument("--gamma-frac must lie in (0, 1)");
        const auto t = io::fourier_from_json(io::read_json(a_fourier));
        const auto a = report.timed("assemble", [&] { return assemble_lambda(t, primes, gamma_frac); });
        io::write_text(common.out, io::dump(io::to_json(a)));
        if (!a_certs.empty()) {
            io::json cj = io::tagged();
            io::json list = io::json::array();
            for (const auto& s : a.sections) list.push_back(io::to_json(s.certificate));
            cj["sections"] = std::move(list);
            cj["global"] = a.global ? io::to_json(*a.global) : io::json(nullptr);
            io::write_text(a_certs, io::dump(cj));
        }
        report.body["global_gamma"] = a.global ? io::json(a.global->gamma) : io::json(nullptr);
        report.body["target_gamma"] = a.target_gamma;
        report.body["sections"] = a.sections.size();
        err << "global gamma: " << (a.global ? std::to_string(a.global->gamma) : std::string("undefined (empty)"))
            << "\n";
        return a.partial() ? partial : ok;
    };
    for (auto* cmd : {riesz->add_subcommand("assemble", "greedy assembly of a Riesz frequency set"),
                      app.add_subcommand("thm2", "assemble and certify a finite section of Lambda")}) {
        cmd->add_option("--fourier", a_fourier, "Fourier table JSON")->required();
        cmd->add_option("--primes", a_primes, "ascending primes, comma-separated")->required();
        cmd->add_option("--gamma-frac", gamma_frac, "fraction of c(0)/2 kept by the union")->capture_default_str();
        cmd->add_option("--certificates", a_certs, "write all certificates to this JSON file");
        detail::add_common(cmd, common, true);
        cmd->callback([&] { action = assemble_action; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return invalid;
    }

    worker_threads() = common.threads;
    report.body["command"] = [&] {
        std::string s;
        for (int i = 1; i < argc; ++i) s += (i > 1 ? " " : "") + std::string(argv[i]);
        return s;
    }();
    int code = failure;
    try {
        code = action();
    } catch (const ResourceLimitError& e) {
        err << "resource limit: " << e.what() << "\n";
        return resource;
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << "\n";
        return invalid;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return failure;
    }
    report.body["exit_code"] = code;
    report.timings["total"] = std::chrono::duration<double, std::milli>(detail::Clock::now() - report.start).count();
    report.body["timings_ms"] = report.timings;
    out << report.body.dump(2) << "\n";
    return code;
}

}  // namespace rgap::cli
