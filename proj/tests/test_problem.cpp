#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "isaacs/manufactured.hpp"
#include "isaacs/problem.hpp"

using namespace isaacs;
using std::numbers::pi;

namespace {

IsaacsProblem constant_diffusion_problem(std::vector<double> matrix, int dim, double delta) {
    IsaacsProblem p;
    p.dim = dim;
    p.actions = {{0.0}, {0.0}};
    p.diffusion = [m = std::move(matrix)](double, double, double, std::span<const double>,
                                          std::span<double> a) {
        std::copy(m.begin(), m.end(), a.begin());
    };
    p.ellipticity = delta;
    p.bound = 1.0;
    return p;
}

/// Independent continuum evaluation of sup inf [L u* + f] + du*/dt by finite
/// differences with a tiny step; no lattice machinery involved.
double continuum_residual(const IsaacsProblem& p,
                          const std::function<double(double, std::span<const double>)>& u,
                          double t, std::span<const double> x) {
    const int d = p.dim;
    const double hs = 1e-4, ht = 1e-6;
    std::vector<double> y(x.begin(), x.end());
    auto at = [&](double tt) { return u(tt, y); };
    const double ut = (at(t + ht) - at(t - ht)) / (2.0 * ht);

    std::vector<double> grad(d), hess(static_cast<std::size_t>(d) * d);
    const double center = u(t, y);
    for (int i = 0; i < d; ++i) {
        y[i] = x[i] + hs;
        const double up = u(t, y);
        y[i] = x[i] - hs;
        const double dn = u(t, y);
        y[i] = x[i];
        grad[i] = (up - dn) / (2.0 * hs);
        hess[i * d + i] = (up - 2.0 * center + dn) / (hs * hs);
    }
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            double v = 0.0;
            for (double si : {1.0, -1.0})
                for (double sj : {1.0, -1.0}) {
                    y[i] = x[i] + si * hs;
                    y[j] = x[j] + sj * hs;
                    v += si * sj * u(t, y);
                }
            y[i] = x[i];
            y[j] = x[j];
            hess[i * d + j] = hess[j * d + i] = v / (4.0 * hs * hs);
        }
    }

    std::vector<double> a(static_cast<std::size_t>(d) * d), b(d);
    double best = -1e300;
    for (double alpha : p.actions.maximizer) {
        double row = 1e300;
        for (double beta : p.actions.minimizer) {
            p.diffusion(alpha, beta, t, x, a);
            double v = 0.0;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) v += a[i * d + j] * hess[i * d + j];
            if (p.drift) {
                p.drift(alpha, beta, t, x, b);
                for (int i = 0; i < d; ++i) v += b[i] * grad[i];
            }
            if (p.discount) v -= p.discount(alpha, beta, t, x) * center;
            if (p.source) v += p.source(alpha, beta, t, x);
            row = std::min(row, v);
        }
        best = std::max(best, row);
    }
    return ut + best;
}

}  // namespace

TEST_CASE("derived exponent gamma", "[problem]") {
    CHECK(derived_gamma(0.0) == Catch::Approx(0.5));
    CHECK(derived_gamma(1.0) == Catch::Approx(0.25));
}

TEST_CASE("validation passes the identity diffusion", "[problem]") {
    const auto p = constant_diffusion_problem({1.0, 0.0, 0.0, 1.0}, 2, 0.5);
    const auto domain = SpatialDomain::box({0.0, 0.0}, {1.0, 1.0});
    const auto report = validate_problem(p, domain, 1.0, 200, 42, 0.0);
    CHECK(report.passed());
    CHECK(report.gamma == Catch::Approx(0.5));
}

TEST_CASE("validation rejects an eigenvalue above 1/delta", "[problem]") {
    const auto p = constant_diffusion_problem({3.0, 0.0, 0.0, 1.0}, 2, 0.5);
    const auto domain = SpatialDomain::box({0.0, 0.0}, {1.0, 1.0});
    CHECK_THROWS_AS(validate_problem(p, domain, 1.0, 100, 42), ValidationFailed);
    try {
        validate_problem(p, domain, 1.0, 100, 42);
    } catch (const ValidationFailed& e) {
        REQUIRE(e.report().first_failure() != nullptr);
        CHECK(e.report().first_failure()->name ==
              "diffusion eigenvalues within [delta, 1/delta]");
    }
}

TEST_CASE("validation is deterministic for a fixed seed", "[problem]") {
    auto p = constant_diffusion_problem({1.0}, 1, 0.5);
    p.drift = [](double, double, double, std::span<const double> x, std::span<double> b) {
        b[0] = 0.3 * x[0];
    };
    const auto domain = SpatialDomain::box({0.0}, {1.0});
    const auto r1 = validate_problem(p, domain, 1.0, 300, 987);
    const auto r2 = validate_problem(p, domain, 1.0, 300, 987);
    REQUIRE(r1.checks.size() == r2.checks.size());
    for (std::size_t i = 0; i < r1.checks.size(); ++i) {
        CHECK(r1.checks[i].passed == r2.checks[i].passed);
        CHECK(r1.checks[i].worst == r2.checks[i].worst);
    }
}

TEST_CASE("heat_1d manufactured case", "[problem]") {
    const auto c = make_manufactured(ManufacturedKind::heat_1d);
    const double x[] = {0.5};
    CHECK(c.exact(c.horizon, x) == Catch::Approx(1.0));  // sin(pi/2)

    // Eigenfunction identity du*/dt + d2u*/dx2 = 0 at sampled points.
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int i = 0; i < 50; ++i) {
        const double t = u(rng), xx = u(rng);
        const double val = std::exp(-pi * pi * (1.0 - t)) * std::sin(pi * xx);
        const double ut = pi * pi * val;
        const double uxx = -pi * pi * val;
        CHECK(ut + uxx == Catch::Approx(0.0).margin(1e-14));
    }
}

TEST_CASE("isaacs_game point game has sup-inf 0 and inf-sup m", "[problem]") {
    const std::vector<double> alphas{-1.0, 0.0, 1.0}, betas{-1.0, 1.0};
    const double m = 1.0;
    // Row minima of the alpha*beta*m table are (-m, 0, -m); sup-inf = 0.
    std::vector<double> row_minima;
    for (double a : alphas) {
        double row = 1e300;
        for (double b : betas) row = std::min(row, a * b * m);
        row_minima.push_back(row);
    }
    CHECK(row_minima == std::vector<double>{-m, 0.0, -m});
    CHECK(*std::max_element(row_minima.begin(), row_minima.end()) == 0.0);
    // inf-sup is m > 0: the Isaacs condition fails, the order matters.
    double infsup = 1e300;
    for (double b : betas) {
        double col = -1e300;
        for (double a : alphas) col = std::max(col, a * b * m);
        infsup = std::min(infsup, col);
    }
    CHECK(infsup == m);
}

TEST_CASE("manufactured cases satisfy the continuum equation", "[problem]") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u01(0.1, 0.9);
    for (auto kind : {ManufacturedKind::heat_1d, ManufacturedKind::heat_2d,
                      ManufacturedKind::isaacs_game}) {
        const auto c = make_manufactured(kind);
        for (int s = 0; s < 100; ++s) {
            std::vector<double> x(c.problem.dim);
            for (auto& v : x) v = u01(rng);
            const double t = 0.1 + 0.8 * u01(rng);
            const double r = continuum_residual(c.problem, c.exact, t, x);
            REQUIRE(std::abs(r) <= 1e-6);
        }
    }
}

TEST_CASE("manufactured problems pass validation", "[problem]") {
    for (auto kind : {ManufacturedKind::heat_1d, ManufacturedKind::heat_2d,
                      ManufacturedKind::isaacs_game}) {
        const auto c = make_manufactured(kind);
        CHECK(validate_problem(c.problem, c.domain, c.horizon, 200, 7).passed());
    }
}

TEST_CASE("unknown manufactured kind", "[problem]") {
    CHECK_THROWS_AS(make_manufactured(static_cast<ManufacturedKind>(99)), UnknownKind);
    ManufacturedParams negative;
    negative.horizon = -1.0;
    CHECK_THROWS_AS(make_manufactured(ManufacturedKind::heat_1d, negative), Error);
}
