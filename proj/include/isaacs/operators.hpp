#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "isaacs/grid.hpp"
#include "isaacs/lattice.hpp"
#include "isaacs/problem.hpp"

namespace isaacs {

enum class DriftMode {
    upwind,   // one-sided difference chosen by the drift sign; monotone for every h
    forward,  // forward difference regardless of sign; monotone only for small h
};

/// (u(t + h^2, x) - u(t, x)) / h^2. The later slice may be boundary.
inline double forward_time_quotient(const GridFunction& u, std::size_t k, std::size_t n) {
    const auto& g = u.grid();
    if (k + 1 >= g.num_times()) throw OutOfGrid("no later time slice");
    const double h2 = g.step() * g.step();
    return (u(k + 1, n) - u(k, n)) / h2;
}

/// (u(t, x + hl) - 2u(t, x) + u(t, x - hl)) / h^2; exact on quadratics.
inline double centered_second_quotient(const GridFunction& u, std::size_t k, std::size_t n,
                                       std::span<const int> l) {
    const auto& g = u.grid();
    const auto np = g.neighbor(n, l, +1);
    const auto nm = g.neighbor(n, l, -1);
    if (np < 0 || nm < 0) throw OutOfGrid("second-difference neighbor off the grid");
    const double h2 = g.step() * g.step();
    return (u(k, static_cast<std::size_t>(np)) - 2.0 * u(k, n) +
            u(k, static_cast<std::size_t>(nm))) / h2;
}

/// (u(t, x + hl) - u(t, x)) / h; exact on affine functions.
inline double forward_space_quotient(const GridFunction& u, std::size_t k, std::size_t n,
                                     std::span<const int> l) {
    const auto np = u.grid().neighbor(n, l, +1);
    if (np < 0) throw OutOfGrid("forward-difference neighbor off the grid");
    return (u(k, static_cast<std::size_t>(np)) - u(k, n)) / u.grid().step();
}

/// Drift term coef·δu with the one-sided difference picked by the sign of
/// coef, so the neighbor always enters with a nonnegative weight.
inline double upwind_drift_term(const GridFunction& u, std::size_t k, std::size_t n,
                                std::span<const int> l, double coef) {
    if (coef == 0.0) return 0.0;
    const auto& g = u.grid();
    const int sign = coef >= 0.0 ? +1 : -1;
    const auto nb = g.neighbor(n, l, sign);
    if (nb < 0) throw OutOfGrid("upwind neighbor off the grid");
    const double q = sign * (u(k, static_cast<std::size_t>(nb)) - u(k, n)) / g.step();
    return coef * q;
}

/// Coefficients of one (alpha, beta) branch in the lattice representation
/// L u = Σ_k a_k Δ_k u + Σ_k b_k δ_k u - c u.
struct LatticeCoefficients {
    std::vector<double> diffusion;  // a_k >= 0, one per direction
    std::vector<double> drift;      // b_k, one per direction (basis-only by default)
    double discount = 0.0;          // c >= 0
    double source = 0.0;            // f
};

/// Evaluate and decompose every branch's coefficients at one point.
inline std::vector<LatticeCoefficients> evaluate_lattice_coefficients(
    const IsaacsProblem& problem, const DirectionSet& dirs, double t,
    std::span<const double> x, double dominance_floor = kDominanceFloor) {
    const int d = problem.dim;
    const std::size_t L = dirs.size();
    std::vector<LatticeCoefficients> out;
    out.reserve(problem.actions.pairs());
    std::vector<double> a(static_cast<std::size_t>(d) * d), b(d);
    for (double alpha : problem.actions.maximizer) {
        for (double beta : problem.actions.minimizer) {
            LatticeCoefficients lc;
            lc.diffusion.resize(L);
            lc.drift.assign(L, 0.0);
            problem.diffusion(alpha, beta, t, x, a);
            decompose_diffusion(a, dirs, lc.diffusion, dominance_floor);
            if (problem.drift) {
                problem.drift(alpha, beta, t, x, b);
                decompose_drift(b, dirs, lc.drift);
            }
            if (problem.discount) lc.discount = problem.discount(alpha, beta, t, x);
            if (problem.source) lc.source = problem.source(alpha, beta, t, x);
            out.push_back(std::move(lc));
        }
    }
    return out;
}

/// Monotone stencil of every branch at one grid point: nonnegative neighbor
/// weights, the diagonal weight (their sum plus the discount), and the
/// source. Neighbor slots come in (+l_k, -l_k) pairs per direction.
struct StencilEvaluation {
    std::size_t node = 0;
    std::vector<std::ptrdiff_t> neighbors;  // 2L slots
    std::vector<double> weights;            // branches × 2L, all >= 0
    std::vector<double> diagonal;           // per branch
    std::vector<double> source;             // per branch

    std::size_t num_branches() const { return diagonal.size(); }
};

/// Build the stencil for an interior point from per-branch lattice
/// coefficients. Throws NonMonotone in forward mode when a weight would go
/// negative.
inline void build_stencil(const SpaceTimeGrid& grid, const DirectionSet& dirs,
                          std::span<const LatticeCoefficients> branches, std::size_t node,
                          DriftMode mode, StencilEvaluation& out) {
    const std::size_t L = dirs.size();
    const double h = grid.step();
    const double inv_h2 = 1.0 / (h * h);
    const double inv_h = 1.0 / h;

    out.node = node;
    out.neighbors.resize(2 * L);
    for (std::size_t k = 0; k < L; ++k) {
        out.neighbors[2 * k] = grid.neighbor(node, dirs.direction(k), +1);
        out.neighbors[2 * k + 1] = grid.neighbor(node, dirs.direction(k), -1);
        if (out.neighbors[2 * k] < 0 || out.neighbors[2 * k + 1] < 0)
            throw OutOfGrid("stencil neighbor off the grid; point is not interior");
    }
    out.weights.assign(branches.size() * 2 * L, 0.0);
    out.diagonal.resize(branches.size());
    out.source.resize(branches.size());

    for (std::size_t br = 0; br < branches.size(); ++br) {
        const auto& lc = branches[br];
        double* w = out.weights.data() + br * 2 * L;
        double neighbor_sum = 0.0;
        for (std::size_t k = 0; k < L; ++k) {
            double wp = lc.diffusion[k] * inv_h2;
            double wm = wp;
            const double bk = lc.drift[k];
            if (mode == DriftMode::upwind) {
                if (bk >= 0.0)
                    wp += bk * inv_h;
                else
                    wm += -bk * inv_h;
            } else {
                wp += bk * inv_h;
                if (wp < 0.0)
                    throw NonMonotone("forward drift mode produced a negative weight (a_k + h b_k = " +
                                      std::to_string(lc.diffusion[k] + h * bk) + ")");
            }
            w[2 * k] = wp;
            w[2 * k + 1] = wm;
            neighbor_sum += wp + wm;
        }
        out.diagonal[br] = neighbor_sum + lc.discount;
        out.source[br] = lc.source;
    }
}

namespace detail {

/// sup over the maximizer of inf over the minimizer of per-branch values,
/// ties broken toward the first declared action.
template <typename BranchValue>
double sup_inf(std::size_t num_max, std::size_t num_min, BranchValue&& value) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t ia = 0; ia < num_max; ++ia) {
        double row = std::numeric_limits<double>::infinity();
        for (std::size_t ib = 0; ib < num_min; ++ib) {
            const double v = value(ia * num_min + ib);
            if (v < row) row = v;
        }
        if (row > best) best = row;
    }
    return best;
}

}  // namespace detail

/// Discrete Bellman-Isaacs operator at one interior point: exhaustive sup-inf
/// over the action pairs of Σ a_k Δ_k u + (drift term) - c u + f.
inline double apply_isaacs_operator(const GridFunction& u, std::size_t k, std::size_t n,
                                    std::span<const LatticeCoefficients> branches,
                                    std::size_t num_min_actions, const DirectionSet& dirs,
                                    DriftMode mode = DriftMode::upwind) {
    const std::size_t L = dirs.size();
    const double h = u.grid().step();
    const std::size_t num_max_actions = branches.size() / num_min_actions;
    return detail::sup_inf(num_max_actions, num_min_actions, [&](std::size_t br) {
        const auto& lc = branches[br];
        double v = lc.source - lc.discount * u(k, n);
        for (std::size_t j = 0; j < L; ++j) {
            const auto l = dirs.direction(j);
            if (lc.diffusion[j] != 0.0)
                v += lc.diffusion[j] * centered_second_quotient(u, k, n, l);
            if (lc.drift[j] != 0.0) {
                if (mode == DriftMode::upwind) {
                    v += upwind_drift_term(u, k, n, l, lc.drift[j]);
                } else {
                    if (lc.diffusion[j] + h * lc.drift[j] < 0.0)
                        throw NonMonotone(
                            "forward drift mode produced a negative stencil weight");
                    v += lc.drift[j] * forward_space_quotient(u, k, n, l);
                }
            }
        }
        return v;
    });
}

/// Coefficient band of the directionwise Pucci operators. The derived
/// ellipticity floor min(λ_low, 1/(λ_high Σ|l_k|²)) must stay below the
/// problem's delta; the solver checks that at configuration time.
struct PucciParams {
    double lambda_low = 0.0;
    double lambda_high = 0.0;
};

inline PucciParams default_pucci(double ellipticity) {
    return {0.5 * ellipticity, 1.0 / ellipticity};
}

inline void check_pucci(const PucciParams& p) {
    if (!(p.lambda_low > 0.0) || !(p.lambda_low <= p.lambda_high))
        throw InvalidConfiguration("Pucci band requires 0 < lambda_low <= lambda_high");
}

inline double pucci_ellipticity(const PucciParams& p, const DirectionSet& dirs) {
    check_pucci(p);
    return std::min(p.lambda_low, 1.0 / (p.lambda_high * dirs.sum_squared_lengths()));
}

/// Maximal directionwise Pucci operator
///   P[u] = Σ_k (λ_high (Δ_k u)^+ - λ_low (Δ_k u)^-),
/// the max over per-direction coefficients in [λ_low, λ_high]. Convex,
/// positively homogeneous of degree one, and monotone in every Δ value.
inline double apply_pucci_maximal(const GridFunction& u, std::size_t k, std::size_t n,
                                  const PucciParams& p, const DirectionSet& dirs) {
    check_pucci(p);
    double v = 0.0;
    for (std::size_t j = 0; j < dirs.size(); ++j) {
        const double d2 = centered_second_quotient(u, k, n, dirs.direction(j));
        v += d2 >= 0.0 ? p.lambda_high * d2 : p.lambda_low * d2;
    }
    return v;
}

/// Minimal companion -P[-u] = Σ_k (λ_low (Δ_k u)^+ - λ_high (Δ_k u)^-).
inline double apply_pucci_minimal(const GridFunction& u, std::size_t k, std::size_t n,
                                  const PucciParams& p, const DirectionSet& dirs) {
    check_pucci(p);
    double v = 0.0;
    for (std::size_t j = 0; j < dirs.size(); ++j) {
        const double d2 = centered_second_quotient(u, k, n, dirs.direction(j));
        v += d2 >= 0.0 ? p.lambda_low * d2 : p.lambda_high * d2;
    }
    return v;
}

}  // namespace isaacs
