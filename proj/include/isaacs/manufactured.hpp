#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <utility>

#include "isaacs/domain.hpp"
#include "isaacs/problem.hpp"

namespace isaacs {

enum class ManufacturedKind { heat_1d, heat_2d, isaacs_game };

struct ManufacturedParams {
    double horizon = 1.0;
    /// Game kernel m(t, x) >= 0 for isaacs_game; constant one when unset.
    std::function<double(double, double)> game_kernel;
};

/// A problem whose exact solution is known in closed form on all of the
/// cylinder; the residual of the continuum equation vanishes analytically.
struct ManufacturedCase {
    IsaacsProblem problem;
    SpatialDomain domain = SpatialDomain::box({0.0}, {1.0});
    double horizon = 1.0;
    std::function<double(double, std::span<const double>)> exact;
};

inline ManufacturedCase make_manufactured(ManufacturedKind kind,
                                          const ManufacturedParams& params = {}) {
    using std::numbers::pi;
    const double T = params.horizon;
    if (!(T > 0.0)) throw Error("manufactured horizon must be positive");

    switch (kind) {
        case ManufacturedKind::heat_1d: {
            ManufacturedCase c;
            c.domain = SpatialDomain::box({0.0}, {1.0});
            c.horizon = T;
            c.exact = [T](double t, std::span<const double> x) {
                return std::exp(-pi * pi * (T - t)) * std::sin(pi * x[0]);
            };
            c.problem.dim = 1;
            c.problem.actions = {{0.0}, {0.0}};
            c.problem.diffusion = [](double, double, double, std::span<const double>,
                                     std::span<double> a) { a[0] = 1.0; };
            c.problem.boundary = [exact = c.exact](double t, std::span<const double> x) {
                return exact(t, x);
            };
            c.problem.ellipticity = 0.5;
            c.problem.bound = 1.0;
            c.problem.moduli = IsaacsProblem::HolderModuli{0.5, 1.0, 1.0};
            return c;
        }
        case ManufacturedKind::heat_2d: {
            ManufacturedCase c;
            c.domain = SpatialDomain::box({0.0, 0.0}, {1.0, 1.0});
            c.horizon = T;
            c.exact = [T](double t, std::span<const double> x) {
                return std::exp(-2.0 * pi * pi * (T - t)) * std::sin(pi * x[0]) *
                       std::sin(pi * x[1]);
            };
            c.problem.dim = 2;
            c.problem.actions = {{0.0}, {0.0}};
            c.problem.diffusion = [](double, double, double, std::span<const double>,
                                     std::span<double> a) {
                a[0] = 1.0;
                a[1] = 0.0;
                a[2] = 0.0;
                a[3] = 1.0;
            };
            c.problem.boundary = [exact = c.exact](double t, std::span<const double> x) {
                return exact(t, x);
            };
            c.problem.ellipticity = 0.5;
            c.problem.bound = 1.0;
            c.problem.moduli = IsaacsProblem::HolderModuli{0.5, 1.0, 1.0};
            return c;
        }
        case ManufacturedKind::isaacs_game: {
            // Genuine 3×2 matrix game at every point: the source is built so
            // each branch reduces to -∂_t u* + αβ·m, whose sup-inf is -∂_t u*
            // because m >= 0, while inf-sup differs wherever m > 0.
            auto kernel = params.game_kernel
                              ? params.game_kernel
                              : [](double, double) { return 1.0; };
            const auto star = [T](double t, double x) {
                return std::exp(-(T - t)) * std::sin(pi * x);
            };
            const auto star_t = star;
            const auto star_xx = [star](double t, double x) {
                return -pi * pi * star(t, x);
            };
            const auto diff = [](double alpha, double beta) {
                return 1.0 + 0.2 * alpha + 0.1 * beta;
            };
            const auto discount = [](double alpha) { return 0.1 * (1.0 + alpha); };

            ManufacturedCase c;
            c.domain = SpatialDomain::box({0.0}, {1.0});
            c.horizon = T;
            c.exact = [star](double t, std::span<const double> x) { return star(t, x[0]); };
            c.problem.dim = 1;
            c.problem.actions = {{-1.0, 0.0, 1.0}, {-1.0, 1.0}};
            c.problem.diffusion = [diff](double alpha, double beta, double,
                                         std::span<const double>, std::span<double> a) {
                a[0] = diff(alpha, beta);
            };
            c.problem.discount = [discount](double alpha, double, double,
                                            std::span<const double>) {
                return discount(alpha);
            };
            c.problem.source = [=](double alpha, double beta, double t,
                                   std::span<const double> x) {
                const double lu = diff(alpha, beta) * star_xx(t, x[0]) -
                                  discount(alpha) * star(t, x[0]);
                return -star_t(t, x[0]) - lu + alpha * beta * kernel(t, x[0]);
            };
            c.problem.boundary = [star](double t, std::span<const double> x) {
                return star(t, x[0]);
            };
            c.problem.ellipticity = 0.7;
            c.problem.bound = 16.0;
            c.problem.moduli = IsaacsProblem::HolderModuli{0.5, 1.0, 1.0};
            return c;
        }
    }
    throw UnknownKind("unknown manufactured kind");
}

}  // namespace isaacs
