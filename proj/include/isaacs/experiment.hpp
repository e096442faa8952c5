#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "isaacs/analysis.hpp"
#include "isaacs/manufactured.hpp"
#include "isaacs/solver.hpp"

namespace isaacs {

inline constexpr const char* kLibraryVersion = "0.1.0";

/// Shortest decimal rendering that round-trips the exact binary value, so
/// downstream rate fits read the same numbers the solver produced.
inline std::string render_double(double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

namespace config_detail {

using nlohmann::json;

inline std::string join(const std::string& base, const char* key) {
    return base.empty() ? key : base + "." + key;
}

inline const json& require_field(const json& j, const std::string& base, const char* key) {
    if (!j.is_object() || !j.contains(key))
        throw ConfigParseError(join(base, key), "missing required field");
    return j.at(key);
}

inline double require_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigParseError(path, "must be a number");
    return j.get<double>();
}

inline double require_positive(const json& j, const std::string& path) {
    const double v = require_number(j, path);
    if (!(v > 0.0)) throw ConfigParseError(path, "must be > 0");
    return v;
}

inline std::string require_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigParseError(path, "must be a string");
    return j.get<std::string>();
}

inline std::vector<double> require_number_list(const json& j, const std::string& path,
                                               std::size_t min_len = 1) {
    if (!j.is_array() || j.size() < min_len)
        throw ConfigParseError(path, "must be an array of at least " +
                                         std::to_string(min_len) + " number(s)");
    std::vector<double> out;
    for (const auto& e : j) {
        if (!e.is_number()) throw ConfigParseError(path, "entries must be numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

}  // namespace config_detail

enum class StudyKind { solve, rates, kgap, regularity };

inline StudyKind parse_study_kind(const std::string& name) {
    if (name == "solve") return StudyKind::solve;
    if (name == "rates") return StudyKind::rates;
    if (name == "kgap") return StudyKind::kgap;
    if (name == "regularity") return StudyKind::regularity;
    throw ConfigParseError("study.kind", "unknown study '" + name + "'");
}

inline const char* study_name(StudyKind k) {
    switch (k) {
        case StudyKind::solve: return "solve";
        case StudyKind::rates: return "rates";
        case StudyKind::kgap: return "kgap";
        case StudyKind::regularity: return "regularity";
    }
    return "?";
}

/// A problem instance assembled from a config: coefficients, the cylinder it
/// lives on, and (for manufactured families) the exact solution.
struct BuiltProblem {
    IsaacsProblem problem;
    SpatialDomain domain = SpatialDomain::box({0.0}, {1.0});
    double horizon = 1.0;
    std::function<double(double, std::span<const double>)> exact;
    std::string family;
};

namespace config_detail {

inline SpatialDomain parse_domain(const json& j, const std::string& path) {
    const std::string kind = require_string(require_field(j, path, "kind"), join(path, "kind"));
    if (kind == "box") {
        auto lower = require_number_list(require_field(j, path, "lower"), join(path, "lower"));
        auto upper = require_number_list(require_field(j, path, "upper"), join(path, "upper"));
        if (lower.size() != upper.size())
            throw ConfigParseError(path, "lower/upper lengths differ");
        for (std::size_t i = 0; i < lower.size(); ++i)
            if (!(lower[i] < upper[i]))
                throw ConfigParseError(path, "bounds must satisfy lower < upper");
        return SpatialDomain::box(std::move(lower), std::move(upper));
    }
    if (kind == "ball") {
        auto center =
            require_number_list(require_field(j, path, "center"), join(path, "center"));
        const double radius =
            require_positive(require_field(j, path, "radius"), join(path, "radius"));
        return SpatialDomain::ball(std::move(center), radius);
    }
    throw ConfigParseError(join(path, "kind"), "must be 'box' or 'ball'");
}

inline BuiltProblem build_problem(const json& problem_block, const json& grid_block,
                                  double horizon) {
    const std::string family =
        require_string(require_field(problem_block, "problem", "family"), "problem.family");
    const json params = problem_block.value("params", json::object());

    BuiltProblem out;
    out.family = family;
    out.horizon = horizon;

    if (family == "heat_1d" || family == "heat_2d" || family == "isaacs_game") {
        if (grid_block.contains("domain"))
            throw ConfigParseError("grid.domain",
                                   "fixed by problem family '" + family + "'; remove it");
        ManufacturedParams mp;
        mp.horizon = horizon;
        const auto kind = family == "heat_1d"   ? ManufacturedKind::heat_1d
                          : family == "heat_2d" ? ManufacturedKind::heat_2d
                                                : ManufacturedKind::isaacs_game;
        auto c = make_manufactured(kind, mp);
        out.problem = std::move(c.problem);
        out.domain = std::move(c.domain);
        out.exact = std::move(c.exact);
        return out;
    }
    if (family == "constant_coefficient") {
        out.domain = parse_domain(require_field(grid_block, "grid", "domain"), "grid.domain");
        const int d = out.domain.dim();

        const json& aj = require_field(params, "problem.params", "a");
        if (!aj.is_array() || aj.size() != static_cast<std::size_t>(d))
            throw ConfigParseError("problem.params.a", "must be a " + std::to_string(d) + "x" +
                                                           std::to_string(d) + " matrix");
        std::vector<double> a;
        for (std::size_t i = 0; i < aj.size(); ++i) {
            auto row = require_number_list(aj.at(i), "problem.params.a");
            if (row.size() != static_cast<std::size_t>(d))
                throw ConfigParseError("problem.params.a", "rows must have length " +
                                                               std::to_string(d));
            a.insert(a.end(), row.begin(), row.end());
        }
        std::vector<double> b(d, 0.0);
        if (params.contains("b")) {
            b = require_number_list(params.at("b"), "problem.params.b");
            if (b.size() != static_cast<std::size_t>(d))
                throw ConfigParseError("problem.params.b", "must have length " +
                                                               std::to_string(d));
        }
        const double c = params.contains("c")
                             ? require_number(params.at("c"), "problem.params.c")
                             : 0.0;
        if (c < 0.0) throw ConfigParseError("problem.params.c", "must be >= 0");
        const double f = params.contains("f")
                             ? require_number(params.at("f"), "problem.params.f")
                             : 0.0;

        std::vector<double> g_gradient(d, 0.0);
        double g_offset = 0.0;
        if (params.contains("g")) {
            const json& gj = params.at("g");
            const std::string gkind =
                require_string(require_field(gj, "problem.params.g", "kind"),
                               "problem.params.g.kind");
            if (gkind == "affine") {
                g_gradient = require_number_list(require_field(gj, "problem.params.g", "gradient"),
                                                 "problem.params.g.gradient");
                if (g_gradient.size() != static_cast<std::size_t>(d))
                    throw ConfigParseError("problem.params.g.gradient",
                                           "must have length " + std::to_string(d));
                g_offset = require_number(require_field(gj, "problem.params.g", "offset"),
                                          "problem.params.g.offset");
            } else if (gkind != "zero") {
                throw ConfigParseError("problem.params.g.kind", "must be 'affine' or 'zero'");
            }
        }

        out.problem.dim = d;
        out.problem.actions = {{0.0}, {0.0}};
        out.problem.diffusion = [a](double, double, double, std::span<const double>,
                                    std::span<double> m) {
            std::copy(a.begin(), a.end(), m.begin());
        };
        out.problem.drift = [b](double, double, double, std::span<const double>,
                                std::span<double> v) {
            std::copy(b.begin(), b.end(), v.begin());
        };
        out.problem.discount = [c](double, double, double, std::span<const double>) {
            return c;
        };
        out.problem.source = [f](double, double, double, std::span<const double>) {
            return f;
        };
        out.problem.boundary = [g_gradient, g_offset](double, std::span<const double> x) {
            double v = g_offset;
            for (std::size_t i = 0; i < x.size(); ++i) v += g_gradient[i] * x[i];
            return v;
        };
        out.problem.ellipticity =
            params.contains("delta")
                ? require_positive(params.at("delta"), "problem.params.delta")
                : 0.5;
        if (!(out.problem.ellipticity < 1.0))
            throw ConfigParseError("problem.params.delta", "must lie in (0,1)");
        out.problem.bound = params.contains("k0")
                                ? require_number(params.at("k0"), "problem.params.k0")
                                : 16.0;
        return out;
    }
    throw ConfigParseError("problem.family",
                           "unknown family '" + family +
                               "' (expected heat_1d, heat_2d, isaacs_game, or "
                               "constant_coefficient)");
}

inline SolverConfig parse_solver(const json& root) {
    SolverConfig cfg;
    if (!root.contains("solver")) return cfg;
    const json& s = root.at("solver");
    if (s.contains("slice_tolerance"))
        cfg.slice_tolerance = require_positive(s.at("slice_tolerance"),
                                               "solver.slice_tolerance");
    if (s.contains("max_slice_iterations")) {
        const double v = require_positive(s.at("max_slice_iterations"),
                                          "solver.max_slice_iterations");
        cfg.max_slice_iterations = static_cast<int>(v);
    }
    if (s.contains("sweep_mode")) {
        const std::string m = require_string(s.at("sweep_mode"), "solver.sweep_mode");
        if (m == "simultaneous")
            cfg.sweep = SweepMode::simultaneous;
        else if (m == "in_place")
            cfg.sweep = SweepMode::in_place;
        else
            throw ConfigParseError("solver.sweep_mode", "must be 'simultaneous' or 'in_place'");
    }
    if (s.contains("drift_mode")) {
        const std::string m = require_string(s.at("drift_mode"), "solver.drift_mode");
        if (m == "upwind")
            cfg.drift = DriftMode::upwind;
        else if (m == "forward")
            cfg.drift = DriftMode::forward;
        else
            throw ConfigParseError("solver.drift_mode", "must be 'upwind' or 'forward'");
    }
    if (s.contains("acceleration")) {
        const std::string m = require_string(s.at("acceleration"), "solver.acceleration");
        if (m == "none")
            cfg.acceleration = Acceleration::none;
        else if (m == "policy_iteration")
            cfg.acceleration = Acceleration::policy_iteration;
        else
            throw ConfigParseError("solver.acceleration",
                                   "must be 'none' or 'policy_iteration'");
    }
    return cfg;
}

}  // namespace config_detail

struct RunOutcome {
    nlohmann::json manifest;
    std::filesystem::path csv_path;
    std::filesystem::path manifest_path;
};

/// Execute the study described by a parsed config, writing <study>.csv and
/// manifest.json into out_dir. Throws ConfigParseError for schema problems
/// and propagates solver errors with their own types.
inline RunOutcome run_config_json(const nlohmann::json& config,
                                  const std::filesystem::path& out_dir) {
    using config_detail::join;
    using config_detail::require_field;
    using config_detail::require_number_list;
    using config_detail::require_positive;
    using config_detail::require_string;
    using nlohmann::json;

    const json& grid_block = require_field(config, "", "grid");
    const double horizon =
        require_positive(require_field(grid_block, "grid", "T"), "grid.T");
    auto h_list = require_number_list(require_field(grid_block, "grid", "h"), "grid.h");
    for (std::size_t i = 0; i < h_list.size(); ++i) {
        if (!(h_list[i] > 0.0)) throw ConfigParseError("grid.h", "steps must be > 0");
        if (i > 0 && !(h_list[i] < h_list[i - 1]))
            throw ConfigParseError("grid.h", "steps must be strictly decreasing");
    }

    const json& study_block = require_field(config, "", "study");
    const StudyKind study = parse_study_kind(
        require_string(require_field(study_block, "study", "kind"), "study.kind"));

    BuiltProblem built = config_detail::build_problem(require_field(config, "", "problem"),
                                                      grid_block, horizon);
    const SolverConfig solver_cfg = config_detail::parse_solver(config);
    const DirectionSet dirs = standard_directions(built.problem.dim);

    std::filesystem::create_directories(out_dir);
    RunOutcome outcome;
    outcome.csv_path = out_dir / (std::string(study_name(study)) + ".csv");
    outcome.manifest_path = out_dir / "manifest.json";

    json manifest;
    manifest["study"] = study_name(study);
    manifest["family"] = built.family;
    manifest["config"] = config;
    manifest["versions"] = {{"library", kLibraryVersion}};
    manifest["max_threads_cap"] = detail::env_thread_cap();
    json stats_list = json::array();
    json results;

    const double validation_chi =
        study == StudyKind::regularity && study_block.contains("chi")
            ? require_positive(study_block.at("chi"), "study.chi")
            : 0.5;
    const auto validation = validate_problem(built.problem, built.domain, horizon, 200,
                                             0xace5eedULL, validation_chi);
    manifest["validation"] = {{"passed", validation.passed()},
                              {"gamma", validation.gamma},
                              {"samples", validation.samples}};

    std::ofstream csv(outcome.csv_path);
    if (!csv) throw Error("cannot open " + outcome.csv_path.string());

    auto record_stats = [&](const std::string& label, const SolveStats& st) {
        stats_list.push_back({{"run", label},
                              {"slices", st.slices.size()},
                              {"total_iterations", st.total_iterations},
                              {"max_contraction", st.max_contraction}});
    };

    switch (study) {
        case StudyKind::solve: {
            if (h_list.size() != 1)
                throw ConfigParseError("grid.h", "solve study takes exactly one step");
            const auto grid =
                build_grid(built.domain, horizon, h_list[0], dirs.radius());
            SolveStats st;
            const auto v = solve_isaacs(built.problem, grid, dirs, solver_cfg, &st);
            record_stats("h=" + render_double(h_list[0]), st);

            csv << "t";
            for (int i = 0; i < grid.dim(); ++i) csv << ",x" << i + 1;
            csv << ",value\n";
            std::vector<double> x(grid.dim());
            for (std::size_t k = 0; k < grid.num_times(); ++k) {
                for (std::size_t n = 0; n < grid.num_nodes(); ++n) {
                    grid.node_coords(n, x);
                    csv << render_double(grid.time(k));
                    for (double c : x) csv << "," << render_double(c);
                    csv << "," << render_double(v(k, n)) << "\n";
                }
            }
            results["nodes"] = grid.num_nodes();
            results["times"] = grid.num_times();
            break;
        }
        case StudyKind::rates: {
            if (!built.exact)
                throw ConfigParseError("problem.family",
                                       "rates study needs a manufactured family");
            if (h_list.size() < 2)
                throw ConfigParseError("grid.h", "rates study needs at least two steps");
            std::vector<RateSample> samples;
            for (double h : h_list) {
                const auto grid = build_grid(built.domain, horizon, h, dirs.radius());
                SolveStats st;
                const auto v = solve_isaacs(built.problem, grid, dirs, solver_cfg, &st);
                record_stats("h=" + render_double(h), st);
                samples.push_back({h, sup_error(v, built.exact)});
            }
            const auto report = fit_rate(samples);
            csv << "h,sup_error,pairwise_order\n";
            for (std::size_t i = 0; i < samples.size(); ++i) {
                csv << render_double(samples[i].parameter) << ","
                    << render_double(samples[i].error) << ",";
                if (i > 0) csv << render_double(report.pairwise_orders[i - 1]);
                csv << "\n";
            }
            results["fitted_exponent"] = report.fitted_exponent;
            results["pairwise_orders"] = report.pairwise_orders;
            results["fit_residual"] = report.residual;
            break;
        }
        case StudyKind::kgap: {
            if (h_list.size() != 1)
                throw ConfigParseError("grid.h", "kgap study takes exactly one step");
            auto k_list = require_number_list(require_field(study_block, "study", "K_list"),
                                              "study.K_list", 2);
            for (std::size_t i = 0; i < k_list.size(); ++i)
                if (!(k_list[i] > 0.0) || (i > 0 && !(k_list[i] > k_list[i - 1])))
                    throw ConfigParseError("study.K_list",
                                           "must be strictly increasing and positive");
            const auto grid =
                build_grid(built.domain, horizon, h_list[0], dirs.radius());
            const auto report =
                k_gap_study(built.problem, grid, dirs, k_list, solver_cfg);
            csv << "K,gap\n";
            for (std::size_t i = 0; i < report.samples.size(); ++i)
                csv << render_double(k_list[i]) << ","
                    << render_double(report.samples[i].error) << "\n";
            results["exact_to_tolerance"] = report.exact_to_tolerance;
            if (!report.exact_to_tolerance) {
                results["fitted_xi"] = report.fitted_exponent;
                results["pairwise_orders"] = report.pairwise_orders;
            }
            break;
        }
        case StudyKind::regularity: {
            if (h_list.size() != 1)
                throw ConfigParseError("grid.h", "regularity study takes exactly one step");
            auto eps_list =
                require_number_list(require_field(study_block, "study", "epsilon_list"),
                                    "study.epsilon_list");
            for (double e : eps_list)
                if (!(e > 0.0))
                    throw ConfigParseError("study.epsilon_list", "entries must be > 0");
            const double chi =
                require_positive(require_field(study_block, "study", "chi"), "study.chi");
            if (!(chi < 1.0)) throw ConfigParseError("study.chi", "must lie in (0,1)");

            const auto grid =
                build_grid(built.domain, horizon, h_list[0], dirs.radius());
            SolveStats st;
            const auto v = solve_isaacs(built.problem, grid, dirs, solver_cfg, &st);
            record_stats("h=" + render_double(h_list[0]), st);

            csv << "epsilon,seminorm\n";
            std::vector<RateSample> fit_samples;
            json values = json::array();
            for (double e : eps_list) {
                const double s = holder_seminorm(v, e, chi);
                csv << render_double(e) << "," << render_double(s) << "\n";
                values.push_back({{"epsilon", e}, {"seminorm", s}});
                fit_samples.push_back({e, s});
            }
            results["seminorms"] = values;
            results["chi"] = chi;
            // Slope of log seminorm against log epsilon, recorded only.
            std::sort(fit_samples.begin(), fit_samples.end(),
                      [](const RateSample& a, const RateSample& b) {
                          return a.parameter > b.parameter;
                      });
            bool fittable = fit_samples.size() >= 2;
            for (const auto& s : fit_samples) fittable = fittable && s.error > 0.0;
            for (std::size_t i = 0; i + 1 < fit_samples.size(); ++i)
                fittable =
                    fittable && fit_samples[i].parameter > fit_samples[i + 1].parameter;
            if (fittable)
                results["loglog_slope"] = fit_rate(fit_samples).fitted_exponent;
            else
                results["loglog_slope"] = nullptr;
            break;
        }
    }

    csv.close();
    manifest["results"] = std::move(results);
    manifest["solver_stats"] = std::move(stats_list);
    std::ofstream mf(outcome.manifest_path);
    mf << manifest.dump(2) << "\n";
    outcome.manifest = std::move(manifest);
    return outcome;
}

inline nlohmann::json load_config(const std::filesystem::path& config_path) {
    std::ifstream in(config_path);
    if (!in) throw Error("cannot read config file " + config_path.string());
    nlohmann::json config;
    try {
        in >> config;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigParseError("<root>", std::string("invalid JSON: ") + e.what());
    }
    return config;
}

inline RunOutcome run_config(const std::filesystem::path& config_path,
                             const std::filesystem::path& out_dir) {
    return run_config_json(load_config(config_path), out_dir);
}

/// Output directory taken from the config's optional "output" field.
inline RunOutcome run_config(const std::filesystem::path& config_path) {
    const auto config = load_config(config_path);
    const auto out = config.contains("output") && config.at("output").is_string()
                         ? config.at("output").get<std::string>()
                         : std::string("results");
    return run_config_json(config, out);
}

}  // namespace isaacs
