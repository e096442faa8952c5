#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "isaacs/grid.hpp"
#include "isaacs/lattice.hpp"
#include "isaacs/operators.hpp"
#include "isaacs/parallel.hpp"
#include "isaacs/problem.hpp"

namespace isaacs {

enum class SweepMode {
    simultaneous,  // every point updates from the frozen previous iterate; deterministic
    in_place,      // sequential sweep reading freshly updated neighbors
};

enum class Acceleration {
    none,              // plain fixed-point iteration (the baseline)
    policy_iteration,  // freeze the maximizing action, solve, re-improve
};

struct SolverConfig {
    double slice_tolerance = 1e-10;
    int max_slice_iterations = 10000;
    SweepMode sweep = SweepMode::simultaneous;
    DriftMode drift = DriftMode::upwind;
    Acceleration acceleration = Acceleration::none;
    double dominance_floor = kDominanceFloor;
};

enum class TruncationSide {
    upper,  // max(F[u], P[u] - K)
    lower,  // min(F[u], -P[-u] + K)
};

struct TruncationSpec {
    double bound = 1.0;  // K > 0
    TruncationSide side = TruncationSide::upper;
    PucciParams pucci;
};

/// Per-slice solve record: the contraction certificate and the iteration
/// trail the acceptance checks audit.
struct SliceStats {
    double time = 0.0;
    int iterations = 0;         // sweeps performed on this slice
    double contraction = 0.0;   // S/(1+S) with S = h^2 · max row sum
    double first_change = 0.0;  // sup-norm change of the first sweep
    double stop_threshold = 0.0;
    double final_change = 0.0;
};

struct SolveStats {
    std::vector<SliceStats> slices;
    long total_iterations = 0;
    double max_contraction = 0.0;
};

namespace detail {

enum class SchemeKind { plain, upper, lower };

inline constexpr std::size_t kMaxPucciDirections = 16;

struct SliceWorkspace {
    std::vector<StencilEvaluation> stencils;  // one per interior node
    std::vector<double> cur;                  // working slice values, all nodes
    std::vector<double> nxt;                  // staged interior updates
    std::vector<std::size_t> seq;             // 0..num_interior-1
    std::vector<int> policy;                  // frozen maximizer index per point
};

/// Normalized update of one interior point from the frozen slice values.
/// Every branch divides by its own diagonal, so the map is a sup-norm
/// contraction and its fixed point is the root of the sup-inf equation.
struct PointUpdater {
    SchemeKind kind;
    double h2;
    double trunc_bound;           // K (upper/lower only)
    PucciParams pucci;
    std::size_t num_min;

    double operator()(const StencilEvaluation& st, std::span<const double> cur,
                      double vnext) const {
        const std::size_t rows = st.num_branches() / num_min;
        double plain = -std::numeric_limits<double>::infinity();
        for (std::size_t ia = 0; ia < rows; ++ia)
            plain = std::max(plain, frozen_row(st, cur, vnext, static_cast<int>(ia)));
        if (kind == SchemeKind::plain) return plain;
        const double trunc = pucci_value(st, cur, vnext);
        return kind == SchemeKind::upper ? std::max(plain, trunc) : std::min(plain, trunc);
    }

    /// Plain update with the maximizer frozen to one action row.
    double frozen_row(const StencilEvaluation& st, std::span<const double> cur, double vnext,
                      int row) const {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t ib = 0; ib < num_min; ++ib)
            best = std::min(best, branch_value(st, cur, vnext, row * num_min + ib));
        return best;
    }

    /// Full sup-inf together with the first maximizing row.
    double best_row(const StencilEvaluation& st, std::span<const double> cur, double vnext,
                    int& row_out) const {
        const std::size_t rows = st.num_branches() / num_min;
        double best = -std::numeric_limits<double>::infinity();
        row_out = 0;
        for (std::size_t ia = 0; ia < rows; ++ia) {
            const double v = frozen_row(st, cur, vnext, static_cast<int>(ia));
            if (v > best) {
                best = v;
                row_out = static_cast<int>(ia);
            }
        }
        return best;
    }

    double branch_value(const StencilEvaluation& st, std::span<const double> cur,
                        double vnext, std::size_t br) const {
        const std::size_t twoL = st.neighbors.size();
        const double* w = st.weights.data() + br * twoL;
        double acc = 0.0;
        for (std::size_t j = 0; j < twoL; ++j)
            acc += w[j] * cur[static_cast<std::size_t>(st.neighbors[j])];
        return (vnext + h2 * (st.source[br] + acc)) / (1.0 + h2 * st.diagonal[br]);
    }

    /// Extreme Pucci branch: enumerate the per-direction coefficient choices
    /// (each λ_low or λ_high), normalizing every choice by its own diagonal.
    double pucci_value(const StencilEvaluation& st, std::span<const double> cur,
                       double vnext) const {
        const std::size_t L = st.neighbors.size() / 2;
        double pair_sum[kMaxPucciDirections];
        for (std::size_t j = 0; j < L; ++j)
            pair_sum[j] = cur[static_cast<std::size_t>(st.neighbors[2 * j])] +
                          cur[static_cast<std::size_t>(st.neighbors[2 * j + 1])];
        const double shift = (kind == SchemeKind::upper ? -1.0 : 1.0) * h2 * trunc_bound;
        const bool maximize = kind == SchemeKind::upper;
        double best = maximize ? -std::numeric_limits<double>::infinity()
                               : std::numeric_limits<double>::infinity();
        for (std::size_t mask = 0; mask < (std::size_t{1} << L); ++mask) {
            double num = vnext + shift;
            double coef_sum = 0.0;
            for (std::size_t j = 0; j < L; ++j) {
                const double p = (mask >> j) & 1 ? pucci.lambda_high : pucci.lambda_low;
                num += p * pair_sum[j];
                coef_sum += p;
            }
            const double val = num / (1.0 + 2.0 * coef_sum);
            best = maximize ? std::max(best, val) : std::min(best, val);
        }
        return best;
    }
};

/// Defect of the implicit slice equation at one point, in the normalized
/// sign-equivalent form (no division by branch diagonals).
inline double point_defect(const PointUpdater& up, const StencilEvaluation& st,
                           std::span<const double> cur, double vnext, double vc) {
    const double h2 = up.h2;
    const std::size_t twoL = st.neighbors.size();
    auto branch_defect = [&](std::size_t br) {
        const double* w = st.weights.data() + br * twoL;
        double acc = 0.0;
        for (std::size_t j = 0; j < twoL; ++j)
            acc += w[j] * cur[static_cast<std::size_t>(st.neighbors[j])];
        return vnext - vc * (1.0 + h2 * st.diagonal[br]) + h2 * (st.source[br] + acc);
    };
    const std::size_t rows = st.num_branches() / up.num_min;
    double plain = -std::numeric_limits<double>::infinity();
    for (std::size_t ia = 0; ia < rows; ++ia) {
        double rowv = std::numeric_limits<double>::infinity();
        for (std::size_t ib = 0; ib < up.num_min; ++ib)
            rowv = std::min(rowv, branch_defect(ia * up.num_min + ib));
        plain = std::max(plain, rowv);
    }
    if (up.kind == SchemeKind::plain) return plain;

    const std::size_t L = twoL / 2;
    double pair_sum[kMaxPucciDirections];
    for (std::size_t j = 0; j < L; ++j)
        pair_sum[j] = cur[static_cast<std::size_t>(st.neighbors[2 * j])] +
                      cur[static_cast<std::size_t>(st.neighbors[2 * j + 1])];
    const double shift = (up.kind == SchemeKind::upper ? -1.0 : 1.0) * h2 * up.trunc_bound;
    const bool maximize = up.kind == SchemeKind::upper;
    double trunc = maximize ? -std::numeric_limits<double>::infinity()
                            : std::numeric_limits<double>::infinity();
    for (std::size_t mask = 0; mask < (std::size_t{1} << L); ++mask) {
        double num = vnext + shift;
        double coef_sum = 0.0;
        for (std::size_t j = 0; j < L; ++j) {
            const double p = (mask >> j) & 1 ? up.pucci.lambda_high : up.pucci.lambda_low;
            num += p * pair_sum[j];
            coef_sum += p;
        }
        const double def = num - vc * (1.0 + 2.0 * coef_sum);
        trunc = maximize ? std::max(trunc, def) : std::min(trunc, def);
    }
    return maximize ? std::max(plain, trunc) : std::min(plain, trunc);
}

inline GridFunction solve_scheme(const IsaacsProblem& problem, const SpaceTimeGrid& grid,
                                 const DirectionSet& dirs, const SolverConfig& config,
                                 SchemeKind kind, const TruncationSpec* trunc,
                                 SolveStats* stats_out) {
    if (problem.dim != grid.dim() || problem.dim != dirs.dim())
        throw InvalidConfiguration("problem, grid, and direction set dimensions disagree");
    if (problem.actions.maximizer.empty() || problem.actions.minimizer.empty())
        throw InvalidConfiguration("action sets must be nonempty");
    if (!(config.slice_tolerance > 0.0) || config.max_slice_iterations < 1)
        throw InvalidConfiguration("slice tolerance must be positive, iteration budget >= 1");
    if (dirs.radius() > grid.direction_radius() + 1e-12)
        throw InvalidConfiguration("grid was built for a smaller direction radius");
    PucciParams pucci;
    double trunc_bound = 0.0;
    if (kind != SchemeKind::plain) {
        if (!(trunc->bound > 0.0)) throw InvalidConfiguration("truncation bound must be positive");
        pucci = trunc->pucci;
        if (pucci_ellipticity(pucci, dirs) >= problem.ellipticity)
            throw InvalidConfiguration(
                "Pucci band is not strictly inside the problem's ellipticity class");
        if (dirs.size() > kMaxPucciDirections)
            throw InvalidConfiguration("truncated solves support at most 16 directions");
        trunc_bound = trunc->bound;
    }

    ThreadGuard threads;
    const double h = grid.step();
    const double h2 = h * h;
    const std::size_t num_times = grid.num_times();
    const std::size_t num_nodes = grid.num_nodes();
    const auto interior = grid.interior_nodes();
    const std::size_t nI = interior.size();
    const std::size_t num_min = problem.actions.minimizer.size();
    const bool policy_mode =
        config.acceleration == Acceleration::policy_iteration && kind == SchemeKind::plain;

    GridFunction v(grid);
    std::vector<double> x(grid.dim());
    auto boundary_value = [&](double t, std::size_t n) {
        if (!problem.boundary) return 0.0;
        grid.node_coords(n, x);
        return problem.boundary(t, x);
    };

    // Top slice carries boundary data everywhere.
    for (std::size_t n = 0; n < num_nodes; ++n)
        v(num_times - 1, n) = boundary_value(grid.time(num_times - 1), n);

    SliceWorkspace ws;
    ws.stencils.resize(nI);
    ws.cur.resize(num_nodes);
    ws.nxt.resize(nI);
    ws.seq.resize(nI);
    std::iota(ws.seq.begin(), ws.seq.end(), std::size_t{0});
    ws.policy.assign(nI, 0);

    SolveStats stats;
    stats.slices.reserve(num_times - 1);

    PointUpdater update{kind, h2, trunc_bound, pucci, num_min};

    for (std::size_t k = num_times - 1; k-- > 0;) {
        const double t = grid.time(k);
        auto vnext = v.slice(k + 1);

        for (std::size_t n = 0; n < num_nodes; ++n)
            ws.cur[n] = grid.node_interior(n) ? vnext[n] : boundary_value(t, n);

        detail::for_each_index(ws.seq, threads.parallel_enabled, [&](std::size_t i) {
            const auto branches = evaluate_lattice_coefficients(
                problem, dirs, t, grid.node_coords(interior[i]), config.dominance_floor);
            build_stencil(grid, dirs, branches, interior[i], config.drift, ws.stencils[i]);
        });

        // Contraction certificate and the stopping threshold that makes the
        // final defect land under slice_tolerance·(1 + h^-2).
        double max_row = 0.0, max_diag = 0.0;
        for (const auto& st : ws.stencils) {
            for (std::size_t br = 0; br < st.num_branches(); ++br) {
                const double* w = st.weights.data() + br * st.neighbors.size();
                double row = 0.0;
                for (std::size_t j = 0; j < st.neighbors.size(); ++j) row += w[j];
                max_row = std::max(max_row, row);
                max_diag = std::max(max_diag, st.diagonal[br]);
            }
        }
        if (kind != SchemeKind::plain) {
            const double pucci_row = 2.0 * pucci.lambda_high * static_cast<double>(dirs.size());
            max_row = std::max(max_row, pucci_row / h2);
            max_diag = std::max(max_diag, pucci_row / h2);
        }
        const double S = h2 * max_row;
        const double contraction = S / (1.0 + S);
        const double stop =
            config.slice_tolerance * (1.0 + h2) / (1.0 + h2 * max_diag);

        SliceStats slice{t, 0, contraction, 0.0, stop, 0.0};
        auto sweep_simultaneous = [&](auto&& point_value) {
            detail::for_each_index(ws.seq, threads.parallel_enabled, [&](std::size_t i) {
                ws.nxt[i] = point_value(i);
            });
            double change = 0.0;
            for (std::size_t i = 0; i < nI; ++i) {
                change = std::max(change, std::abs(ws.nxt[i] - ws.cur[interior[i]]));
                ws.cur[interior[i]] = ws.nxt[i];
            }
            return change;
        };
        auto sweep_in_place = [&](auto&& point_value) {
            double change = 0.0;
            for (std::size_t i = 0; i < nI; ++i) {
                const double nv = point_value(i);
                change = std::max(change, std::abs(nv - ws.cur[interior[i]]));
                ws.cur[interior[i]] = nv;
            }
            return change;
        };
        auto sweep = [&](auto&& point_value) {
            const double change = config.sweep == SweepMode::simultaneous
                                      ? sweep_simultaneous(point_value)
                                      : sweep_in_place(point_value);
            ++slice.iterations;
            if (slice.iterations == 1) slice.first_change = change;
            if (slice.iterations > config.max_slice_iterations)
                throw NoConvergence("slice fixed point exceeded the iteration budget at t=" +
                                        std::to_string(t),
                                    t, change);
            return change;
        };
        auto full_update = [&](std::size_t i) {
            return update(ws.stencils[i], ws.cur, vnext[interior[i]]);
        };

        if (!policy_mode) {
            double change;
            do {
                change = sweep(full_update);
            } while (change > stop);
            slice.final_change = change;
        } else {
            // Howard iteration: relax with the maximizing action frozen, then
            // re-improve; the closing improvement sweep doubles as the
            // convergence certificate for the full operator.
            for (;;) {
                double change;
                do {
                    change = sweep([&](std::size_t i) {
                        return update.frozen_row(ws.stencils[i], ws.cur, vnext[interior[i]],
                                                 ws.policy[i]);
                    });
                } while (change > stop);
                std::atomic<bool> improved{false};
                const double improve_change = sweep([&](std::size_t i) {
                    int row;
                    const double val =
                        update.best_row(ws.stencils[i], ws.cur, vnext[interior[i]], row);
                    if (row != ws.policy[i]) {
                        ws.policy[i] = row;
                        improved.store(true, std::memory_order_relaxed);
                    }
                    return val;
                });
                if (!improved.load(std::memory_order_relaxed) && improve_change <= stop) {
                    slice.final_change = improve_change;
                    break;
                }
            }
        }

        auto out = v.slice(k);
        for (std::size_t n = 0; n < num_nodes; ++n) out[n] = ws.cur[n];

        stats.total_iterations += slice.iterations;
        stats.max_contraction = std::max(stats.max_contraction, slice.contraction);
        stats.slices.push_back(slice);
    }

    std::reverse(stats.slices.begin(), stats.slices.end());
    if (stats_out) *stats_out = std::move(stats);
    return v;
}

inline double scheme_residual(const GridFunction& v, const IsaacsProblem& problem,
                              const SpaceTimeGrid& grid, const DirectionSet& dirs,
                              std::size_t time_index, SchemeKind kind,
                              const TruncationSpec* trunc, const SolverConfig& config) {
    if (time_index + 1 >= grid.num_times())
        throw OutOfGrid("slice residual needs a later time slice");
    const double t = grid.time(time_index);
    const double h2 = grid.step() * grid.step();
    PointUpdater up{kind, h2, trunc ? trunc->bound : 0.0, trunc ? trunc->pucci : PucciParams{},
                    problem.actions.minimizer.size()};
    StencilEvaluation st;
    double worst = 0.0;
    auto cur = v.slice(time_index);
    auto nxt = v.slice(time_index + 1);
    for (std::size_t n : grid.interior_nodes()) {
        const auto branches = evaluate_lattice_coefficients(problem, dirs, t,
                                                            grid.node_coords(n),
                                                            config.dominance_floor);
        build_stencil(grid, dirs, branches, n, config.drift, st);
        const double defect = point_defect(up, st, cur, nxt[n], cur[n]);
        worst = std::max(worst, std::abs(defect) / h2);
    }
    return worst;
}

}  // namespace detail

/// March the implicit scheme backward from the latest slice, solving each
/// slice's sup-inf fixed point to within the configured tolerance. Boundary
/// data g is honored on the whole discrete parabolic boundary.
inline GridFunction solve_isaacs(const IsaacsProblem& problem, const SpaceTimeGrid& grid,
                                 const DirectionSet& dirs, const SolverConfig& config = {},
                                 SolveStats* stats = nullptr) {
    return detail::solve_scheme(problem, grid, dirs, config, detail::SchemeKind::plain,
                                nullptr, stats);
}

/// Same marching with the slice operator replaced by max(F, P - K) (upper)
/// or min(F, -P[-·] + K) (lower); both stay monotone, so the same fixed-point
/// machinery applies with branch-wise diagonal normalization.
inline GridFunction solve_truncated(const IsaacsProblem& problem, const SpaceTimeGrid& grid,
                                    const DirectionSet& dirs, const TruncationSpec& spec,
                                    const SolverConfig& config = {},
                                    SolveStats* stats = nullptr) {
    return detail::solve_scheme(problem, grid, dirs, config,
                                spec.side == TruncationSide::upper
                                    ? detail::SchemeKind::upper
                                    : detail::SchemeKind::lower,
                                &spec, stats);
}

/// Sup over the interior of one slice of the defect of the implicit equation,
/// in its normalized sign-equivalent form, divided by h^2.
inline double slice_residual(const GridFunction& v, const IsaacsProblem& problem,
                             const SpaceTimeGrid& grid, const DirectionSet& dirs,
                             std::size_t time_index, const SolverConfig& config = {}) {
    return detail::scheme_residual(v, problem, grid, dirs, time_index,
                                   detail::SchemeKind::plain, nullptr, config);
}

/// Residual of the truncated scheme (the operator actually solved by
/// solve_truncated) on one slice.
inline double truncated_slice_residual(const GridFunction& v, const IsaacsProblem& problem,
                                       const SpaceTimeGrid& grid, const DirectionSet& dirs,
                                       const TruncationSpec& spec, std::size_t time_index,
                                       const SolverConfig& config = {}) {
    return detail::scheme_residual(v, problem, grid, dirs, time_index,
                                   spec.side == TruncationSide::upper
                                       ? detail::SchemeKind::upper
                                       : detail::SchemeKind::lower,
                                   &spec, config);
}

}  // namespace isaacs
