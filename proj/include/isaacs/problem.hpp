#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "isaacs/domain.hpp"
#include "isaacs/errors.hpp"

namespace isaacs {

/// Finite action sets for the two players; the sup runs over the maximizer's
/// labels in declared order, the inf over the minimizer's.
struct ActionSets {
    std::vector<double> maximizer;
    std::vector<double> minimizer;

    std::size_t pairs() const { return maximizer.size() * minimizer.size(); }
};

/// Coefficient callbacks write into caller-provided buffers so the slice
/// solver can evaluate them without allocating. They must be pure and safe
/// for concurrent invocation; that is part of the API contract.
using DiffusionField = std::function<void(double alpha, double beta, double t,
                                          std::span<const double> x, std::span<double> a)>;
using DriftField = std::function<void(double alpha, double beta, double t,
                                      std::span<const double> x, std::span<double> b)>;
using ScalarField =
    std::function<double(double alpha, double beta, double t, std::span<const double> x)>;
using BoundaryData = std::function<double(double t, std::span<const double> x)>;

/// One Isaacs problem instance: coefficients over finite action sets,
/// boundary data, and the structural constants they are supposed to honor.
/// The Hölder moduli are documentation; only spot sampling checks them.
struct IsaacsProblem {
    int dim = 1;
    ActionSets actions;
    DiffusionField diffusion;   // symmetric d×d, row-major
    DriftField drift;           // null means zero drift
    ScalarField discount;       // c >= 0; null means zero
    ScalarField source;         // f; null means zero
    BoundaryData boundary;      // g; null means zero
    double ellipticity = 0.5;   // delta in (0,1): eigenvalues in [delta, 1/delta]
    double bound = 1.0;         // K0: |b|, c, |f| <= K0

    struct HolderModuli {
        double space = 0.0;   // exponent of the diffusion modulus in x
        double time = 0.0;    // exponent of the shared modulus in t
        double omega = 0.0;   // power of the modulus for b, c, f
    };
    std::optional<HolderModuli> moduli;
};

/// Exponent gamma = (4 - 3χ)/(8 - 4χ) derived from the regularity constant χ.
inline double derived_gamma(double chi) { return (4.0 - 3.0 * chi) / (8.0 - 4.0 * chi); }

struct CheckResult {
    std::string name;
    bool passed = true;
    double worst = 0.0;           // most violating value observed
    double alpha = 0.0, beta = 0.0, t = 0.0;
    std::vector<double> x;        // sample realizing the worst value
    std::string detail;
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    double gamma = 0.0;   // derived exponent for the caller-supplied chi
    double chi = 0.0;
    int samples = 0;
    std::uint64_t seed = 0;

    bool passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
    const CheckResult* first_failure() const {
        for (const auto& c : checks)
            if (!c.passed) return &c;
        return nullptr;
    }
};

/// Structural-assumption violation found by sampling; carries the report.
class ValidationFailed : public Error {
public:
    explicit ValidationFailed(ValidationReport report)
        : Error("problem validation failed: " + report.first_failure()->name + " at (t=" +
                std::to_string(report.first_failure()->t) + ", alpha=" +
                std::to_string(report.first_failure()->alpha) + ", beta=" +
                std::to_string(report.first_failure()->beta) + "): " +
                report.first_failure()->detail),
          report_(std::move(report)) {}
    const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

namespace detail {

inline void record_worst(CheckResult& c, bool ok, double value, double alpha, double beta,
                         double t, std::span<const double> x, const std::string& detail) {
    if (ok) return;
    if (c.passed || value > c.worst) {
        c.passed = false;
        c.worst = value;
        c.alpha = alpha;
        c.beta = beta;
        c.t = t;
        c.x.assign(x.begin(), x.end());
        c.detail = detail;
    }
}

}  // namespace detail

/// Spot-check the structural assumptions on random (alpha, beta, t, x)
/// samples drawn from the cylinder: symmetry and eigenvalue bounds of the
/// diffusion, coefficient bounds against K0, and nonnegativity of the
/// discount. Deterministic for a fixed seed. Throws ValidationFailed when
/// any check fails; the report is attached either way.
inline ValidationReport validate_problem(const IsaacsProblem& problem,
                                         const SpatialDomain& domain, double horizon,
                                         int sample_count, std::uint64_t seed,
                                         double chi = 0.5) {
    if (problem.actions.maximizer.empty() || problem.actions.minimizer.empty())
        throw Error("action sets must be nonempty");
    if (!(problem.ellipticity > 0.0 && problem.ellipticity < 1.0))
        throw Error("ellipticity constant must lie in (0,1)");

    const int d = problem.dim;
    ValidationReport report;
    report.chi = chi;
    report.gamma = derived_gamma(chi);
    report.samples = sample_count;
    report.seed = seed;
    report.checks.resize(5);
    report.checks[0].name = "diffusion symmetric";
    report.checks[1].name = "diffusion eigenvalues within [delta, 1/delta]";
    report.checks[2].name = "drift bounded by K0";
    report.checks[3].name = "discount in [0, K0]";
    report.checks[4].name = "source bounded by K0";
    auto& symmetric = report.checks[0];
    auto& spectrum = report.checks[1];
    auto& drift_bound = report.checks[2];
    auto& discount_range = report.checks[3];
    auto& source_bound = report.checks[4];

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto lo = domain.bbox_lower();
    auto hi = domain.bbox_upper();

    std::vector<double> x(d), a(static_cast<std::size_t>(d) * d), b(d);
    Eigen::MatrixXd m(d, d);
    const double eig_slack = 1e-9;

    for (int s = 0; s < sample_count; ++s) {
        // Rejection-sample x into G; the bounding box keeps this cheap.
        do {
            for (int i = 0; i < d; ++i) x[i] = lo[i] + (hi[i] - lo[i]) * unit(rng);
        } while (!domain.contains(x));
        const double t = horizon * unit(rng);
        const double alpha = problem.actions.maximizer[rng() % problem.actions.maximizer.size()];
        const double beta = problem.actions.minimizer[rng() % problem.actions.minimizer.size()];

        problem.diffusion(alpha, beta, t, x, a);
        double asym = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                m(i, j) = a[i * d + j];
                asym = std::max(asym, std::abs(a[i * d + j] - a[j * d + i]));
            }
        detail::record_worst(symmetric, asym <= 1e-12, asym, alpha, beta, t, x,
                             "asymmetry " + std::to_string(asym));

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()),
                                                           Eigen::EigenvaluesOnly);
        const double lo_eig = eig.eigenvalues().minCoeff();
        const double hi_eig = eig.eigenvalues().maxCoeff();
        const bool in_band = lo_eig >= problem.ellipticity - eig_slack &&
                             hi_eig <= 1.0 / problem.ellipticity + eig_slack;
        detail::record_worst(spectrum, in_band, std::max(hi_eig, 1.0 / std::max(lo_eig, 1e-300)),
                             alpha, beta, t, x,
                             "eigenvalues in [" + std::to_string(lo_eig) + ", " +
                                 std::to_string(hi_eig) + "]");

        if (problem.drift) {
            problem.drift(alpha, beta, t, x, b);
            double norm = 0.0;
            for (double v : b) norm += v * v;
            norm = std::sqrt(norm);
            detail::record_worst(drift_bound, norm <= problem.bound + eig_slack, norm, alpha,
                                 beta, t, x, "|b| = " + std::to_string(norm));
        }
        if (problem.discount) {
            const double c = problem.discount(alpha, beta, t, x);
            detail::record_worst(discount_range,
                                 c >= 0.0 && c <= problem.bound + eig_slack, c, alpha, beta, t,
                                 x, "c = " + std::to_string(c));
        }
        if (problem.source) {
            const double f = problem.source(alpha, beta, t, x);
            detail::record_worst(source_bound, std::abs(f) <= problem.bound + eig_slack,
                                 std::abs(f), alpha, beta, t, x, "|f| = " + std::to_string(f));
        }
    }

    if (!report.passed()) throw ValidationFailed(std::move(report));
    return report;
}

}  // namespace isaacs
