#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "isaacs/grid.hpp"
#include "isaacs/solver.hpp"

namespace isaacs {

struct RateSample {
    double parameter = 0.0;
    double error = 0.0;
};

/// Power-law fit of error against parameter: least-squares slope in log-log
/// coordinates plus the pairwise orders for successive halvings.
struct RateReport {
    std::vector<RateSample> samples;
    double fitted_exponent = 0.0;
    std::vector<double> pairwise_orders;
    double residual = 0.0;           // RMS misfit in log space
    bool exact_to_tolerance = false; // errors below tolerance; no fit attempted
};

inline RateReport fit_rate(std::span<const RateSample> samples) {
    if (samples.size() < 2) throw DegenerateData("rate fit needs at least two samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!(samples[i].parameter > 0.0) || !(samples[i].error > 0.0))
            throw DegenerateData("rate fit needs positive parameters and errors");
        if (i > 0 && !(samples[i].parameter < samples[i - 1].parameter))
            throw DegenerateData("rate fit needs strictly decreasing parameters");
    }
    RateReport report;
    report.samples.assign(samples.begin(), samples.end());

    const std::size_t n = samples.size();
    double mp = 0.0, me = 0.0;
    std::vector<double> lp(n), le(n);
    for (std::size_t i = 0; i < n; ++i) {
        lp[i] = std::log(samples[i].parameter);
        le[i] = std::log(samples[i].error);
        mp += lp[i];
        me += le[i];
    }
    mp /= static_cast<double>(n);
    me /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (lp[i] - mp) * (le[i] - me);
        sxx += (lp[i] - mp) * (lp[i] - mp);
    }
    report.fitted_exponent = sxy / sxx;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double fit = me + report.fitted_exponent * (lp[i] - mp);
        ss += (le[i] - fit) * (le[i] - fit);
    }
    report.residual = std::sqrt(ss / static_cast<double>(n));
    for (std::size_t i = 0; i + 1 < n; ++i)
        report.pairwise_orders.push_back(
            std::log(samples[i].error / samples[i + 1].error) /
            std::log(samples[i].parameter / samples[i + 1].parameter));
    return report;
}

/// Max over all grid points of |u - reference|.
inline double sup_error(const GridFunction& u,
                        const std::function<double(double, std::span<const double>)>& reference) {
    const auto& g = u.grid();
    std::vector<double> x(g.dim());
    double worst = 0.0;
    for (std::size_t n = 0; n < g.num_nodes(); ++n) {
        g.node_coords(n, x);
        for (std::size_t k = 0; k < g.num_times(); ++k)
            worst = std::max(worst, std::abs(u(k, n) - reference(g.time(k), x)));
    }
    return worst;
}

/// Brute-force parabolic Hölder seminorm over the shrunken cylinder
/// (0, T - eps^2) × {boundary distance > eps}: the (1+chi)/2 time quotient of
/// u plus the chi space quotient and chi/2 time quotient of the centered
/// difference gradient. A diagnostic estimator, not a certified norm.
inline double holder_seminorm(const GridFunction& u, double eps, double chi) {
    const auto& g = u.grid();
    const int d = g.dim();
    const double h = g.step();

    std::vector<std::size_t> times;
    for (std::size_t k = 0; k < g.num_times(); ++k)
        if (g.time(k) < g.horizon() - eps * eps) times.push_back(k);

    std::vector<std::size_t> nodes;
    std::vector<double> x(d);
    for (std::size_t n = 0; n < g.num_nodes(); ++n) {
        g.node_coords(n, x);
        if (!(g.domain().boundary_distance(x) > eps)) continue;
        bool ok = true;
        for (int i = 0; i < d && ok; ++i) {
            int e[SpaceTimeGrid::kMaxDim] = {};
            e[i] = 1;
            std::span<const int> axis{e, static_cast<std::size_t>(d)};
            ok = g.neighbor(n, axis, +1) >= 0 && g.neighbor(n, axis, -1) >= 0;
        }
        if (ok) nodes.push_back(n);
    }
    if (times.empty() || nodes.size() < 2)
        throw EmptyRegion("seminorm region holds fewer than two usable grid points");

    // Centered-difference gradient per admissible (time, node).
    const std::size_t nt = times.size(), nn = nodes.size();
    std::vector<double> grad(nt * nn * d);
    for (std::size_t a = 0; a < nn; ++a) {
        for (int i = 0; i < d; ++i) {
            int e[SpaceTimeGrid::kMaxDim] = {};
            e[i] = 1;
            std::span<const int> axis{e, static_cast<std::size_t>(d)};
            const auto np = static_cast<std::size_t>(g.neighbor(nodes[a], axis, +1));
            const auto nm = static_cast<std::size_t>(g.neighbor(nodes[a], axis, -1));
            for (std::size_t q = 0; q < nt; ++q)
                grad[(q * nn + a) * d + i] =
                    (u(times[q], np) - u(times[q], nm)) / (2.0 * h);
        }
    }

    double time_quot = 0.0, grad_space_quot = 0.0, grad_time_quot = 0.0;
    for (std::size_t a = 0; a < nn; ++a) {
        for (std::size_t q = 0; q < nt; ++q) {
            for (std::size_t r = q + 1; r < nt; ++r) {
                const double dt = g.time(times[r]) - g.time(times[q]);
                const double du = std::abs(u(times[r], nodes[a]) - u(times[q], nodes[a]));
                time_quot = std::max(time_quot, du / std::pow(dt, 0.5 * (1.0 + chi)));
                double dg = 0.0;
                for (int i = 0; i < d; ++i) {
                    const double diff =
                        grad[(r * nn + a) * d + i] - grad[(q * nn + a) * d + i];
                    dg += diff * diff;
                }
                grad_time_quot =
                    std::max(grad_time_quot, std::sqrt(dg) / std::pow(dt, 0.5 * chi));
            }
        }
    }
    std::vector<double> xa(d), xb(d);
    for (std::size_t a = 0; a < nn; ++a) {
        g.node_coords(nodes[a], xa);
        for (std::size_t b = a + 1; b < nn; ++b) {
            g.node_coords(nodes[b], xb);
            double dx = 0.0;
            for (int i = 0; i < d; ++i) dx += (xa[i] - xb[i]) * (xa[i] - xb[i]);
            dx = std::sqrt(dx);
            for (std::size_t q = 0; q < nt; ++q) {
                double dg = 0.0;
                for (int i = 0; i < d; ++i) {
                    const double diff =
                        grad[(q * nn + a) * d + i] - grad[(q * nn + b) * d + i];
                    dg += diff * diff;
                }
                grad_space_quot =
                    std::max(grad_space_quot, std::sqrt(dg) / std::pow(dx, chi));
            }
        }
    }
    return time_quot + grad_space_quot + grad_time_quot;
}

/// Empirical boundary constant: max over interior points of |v - g| / rho.
inline double barrier_ratio(const GridFunction& v, const BoundaryData& g) {
    const auto& grid = v.grid();
    std::vector<double> x(grid.dim());
    double worst = 0.0;
    for (std::size_t n : grid.interior_nodes()) {
        grid.node_coords(n, x);
        const double rho = grid.domain().boundary_distance(x);
        for (std::size_t k = 0; k < grid.num_times(); ++k) {
            const double data = g ? g(grid.time(k), x) : 0.0;
            worst = std::max(worst, std::abs(v(k, n) - data) / rho);
        }
    }
    return worst;
}

struct BarrierParams {
    double mu = 0.0;
    double radius = 0.0;  // R, at least the enclosing radius plus one
};

struct Barrier {
    BarrierParams params;
    std::function<double(std::span<const double>)> psi;
};

namespace detail {

/// cosh(mu R) - cosh(mu r) in the cancellation-free product form.
inline double barrier_value(double mu, double R, double r) {
    return 2.0 * std::sinh(0.5 * mu * (R + r)) * std::sinh(0.5 * mu * (R - r));
}

/// Sufficient check of a_ij D_ij psi + b_i D_i psi <= -1: everything is
/// factored by cosh(mu r) >= 1, keeping the test overflow-free.
inline bool barrier_form_ok(std::span<const double> x, const Eigen::MatrixXd& a,
                            std::span<const double> b, double mu) {
    const int d = static_cast<int>(x.size());
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    const double r = std::sqrt(r2);
    double aq, bq = 0.0;
    if (r < 1e-14) {
        aq = a.trace() / d;  // any unit direction; the Hessian limit is -mu^2 I
    } else {
        Eigen::VectorXd xi(d);
        for (int i = 0; i < d; ++i) xi(i) = x[i] / r;
        aq = xi.dot(a * xi);
        for (int i = 0; i < d; ++i) bq += b[i] * xi(i);
    }
    const double resid = std::max(a.trace() - aq, 0.0);
    const double tanh_over_r = r < 1e-14 ? mu : std::tanh(mu * r) / r;
    const double bracket =
        -mu * mu * aq - mu * tanh_over_r * resid - mu * std::tanh(mu * r) * bq;
    return bracket <= -1.0;
}

inline Eigen::MatrixXd random_elliptic_matrix(int d, double delta, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> band(delta, 1.0 / delta);
    Eigen::MatrixXd g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = gauss(rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    Eigen::VectorXd eigs(d);
    for (int i = 0; i < d; ++i) eigs(i) = band(rng);
    return q * eigs.asDiagonal() * q.transpose();
}

}  // namespace detail

/// Global barrier psi(x) = cosh(mu R) - cosh(mu |x|) with R = sup_G |x| + 1
/// and mu doubled until 1000 randomized (a, b, x) samples satisfy psi >= 1
/// and the drift-diffusion form bound. Randomized verification, not proof.
inline Barrier build_barrier(const SpatialDomain& domain, double ellipticity, double bound,
                             std::uint64_t seed = 0x5eedba55) {
    const int d = domain.dim();
    const double R = domain.enclosing_radius() + 1.0;
    const int samples = 1000;
    auto lo = domain.bbox_lower();
    auto hi = domain.bbox_upper();

    for (double mu = 1.0; mu <= 0x1p60; mu *= 2.0) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<double> x(d), b(d);
        bool ok = true;
        for (int s = 0; s < samples && ok; ++s) {
            do {
                for (int i = 0; i < d; ++i) x[i] = lo[i] + (hi[i] - lo[i]) * unit(rng);
            } while (!domain.contains(x));
            const auto a = detail::random_elliptic_matrix(d, ellipticity, rng);
            double bn2 = 0.0;
            for (int i = 0; i < d; ++i) {
                b[i] = 2.0 * unit(rng) - 1.0;
                bn2 += b[i] * b[i];
            }
            const double scale = bound * unit(rng) / std::max(std::sqrt(bn2), 1e-300);
            for (int i = 0; i < d; ++i) b[i] *= scale;

            double r2 = 0.0;
            for (double c : x) r2 += c * c;
            ok = detail::barrier_value(mu, R, std::sqrt(r2)) >= 1.0 &&
                 detail::barrier_form_ok(x, a, b, mu);
        }
        if (ok) {
            Barrier out;
            out.params = {mu, R};
            out.psi = [mu, R](std::span<const double> y) {
                double r2 = 0.0;
                for (double c : y) r2 += c * c;
                return detail::barrier_value(mu, R, std::sqrt(r2));
            };
            return out;
        }
    }
    throw BarrierSearchFailed("no barrier parameter up to 2^60 satisfied the form bound");
}

/// Solve the upper and lower truncated problems for every K, record the
/// uniform gaps, check they do not increase, and fit the decay exponent
/// against 1/K (so the report's parameters decrease as K grows).
inline RateReport k_gap_study(const IsaacsProblem& problem, const SpaceTimeGrid& grid,
                              const DirectionSet& dirs, std::span<const double> k_values,
                              const SolverConfig& config = {}, PucciParams pucci = {}) {
    if (k_values.size() < 2)
        throw InvalidConfiguration("K-gap study needs at least two truncation bounds");
    for (std::size_t i = 0; i < k_values.size(); ++i) {
        if (!(k_values[i] > 0.0) || (i > 0 && !(k_values[i] > k_values[i - 1])))
            throw InvalidConfiguration("truncation bounds must be positive and increasing");
    }
    if (pucci.lambda_high == 0.0) pucci = default_pucci(problem.ellipticity);

    const double slack = 10.0 * config.slice_tolerance;
    std::vector<RateSample> samples;
    double previous = std::numeric_limits<double>::infinity();
    for (double K : k_values) {
        const auto upper =
            solve_truncated(problem, grid, dirs, {K, TruncationSide::upper, pucci}, config);
        const auto lower =
            solve_truncated(problem, grid, dirs, {K, TruncationSide::lower, pucci}, config);
        double gap = 0.0;
        for (std::size_t i = 0; i < upper.values().size(); ++i)
            gap = std::max(gap, std::abs(upper.values()[i] - lower.values()[i]));
        if (gap > previous + slack)
            throw MonotonicityViolation("truncation gap grew from " + std::to_string(previous) +
                                        " to " + std::to_string(gap) + " at K = " +
                                        std::to_string(K));
        previous = gap;
        samples.push_back({1.0 / K, gap});
    }

    bool all_tiny = true;
    for (const auto& s : samples) all_tiny = all_tiny && s.error <= slack;
    if (all_tiny) {
        RateReport report;
        report.samples = std::move(samples);
        report.exact_to_tolerance = true;
        return report;
    }
    return fit_rate(samples);
}

}  // namespace isaacs
