#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "isaacs/errors.hpp"

namespace isaacs {

/// Open bounded spatial domain G with exact membership and exact distance to
/// the complement. Boxes and balls are built in; other domains can be plugged
/// in as a membership/distance callback pair together with a bounding box for
/// lattice enumeration.
class SpatialDomain {
public:
    enum class Kind { box, ball, custom };

    using MemberFn = std::function<bool(std::span<const double>)>;
    using DistanceFn = std::function<double(std::span<const double>)>;

    /// Axis-aligned open box with per-axis bounds (strictly ordered).
    static SpatialDomain box(std::vector<double> lower, std::vector<double> upper) {
        if (lower.empty() || lower.size() != upper.size())
            throw Error("box bounds must be nonempty and of equal dimension");
        for (std::size_t i = 0; i < lower.size(); ++i)
            if (!(lower[i] < upper[i]))
                throw Error("box bounds must be strictly ordered on every axis");
        SpatialDomain d;
        d.kind_ = Kind::box;
        d.dim_ = static_cast<int>(lower.size());
        d.lower_ = std::move(lower);
        d.upper_ = std::move(upper);
        return d;
    }

    /// Open Euclidean ball.
    static SpatialDomain ball(std::vector<double> center, double radius) {
        if (center.empty()) throw Error("ball center must be nonempty");
        if (!(radius > 0.0)) throw Error("ball radius must be positive");
        SpatialDomain d;
        d.kind_ = Kind::ball;
        d.dim_ = static_cast<int>(center.size());
        d.center_ = std::move(center);
        d.radius_ = radius;
        d.lower_.resize(d.center_.size());
        d.upper_.resize(d.center_.size());
        for (std::size_t i = 0; i < d.center_.size(); ++i) {
            d.lower_[i] = d.center_[i] - radius;
            d.upper_[i] = d.center_[i] + radius;
        }
        return d;
    }

    /// Extension point: user-supplied open domain. `distance` must return the
    /// exact Euclidean distance to the complement (0 outside) or the barrier
    /// and interior classifications lose their guarantees.
    static SpatialDomain custom(int dim, MemberFn member, DistanceFn distance,
                                std::vector<double> bbox_lower,
                                std::vector<double> bbox_upper) {
        if (dim < 1) throw Error("domain dimension must be positive");
        if (bbox_lower.size() != static_cast<std::size_t>(dim) ||
            bbox_upper.size() != static_cast<std::size_t>(dim))
            throw Error("bounding box dimension mismatch");
        SpatialDomain d;
        d.kind_ = Kind::custom;
        d.dim_ = dim;
        d.member_ = std::move(member);
        d.distance_ = std::move(distance);
        d.lower_ = std::move(bbox_lower);
        d.upper_ = std::move(bbox_upper);
        return d;
    }

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }

    /// Open-set membership test (boundary points are outside).
    bool contains(std::span<const double> x) const {
        switch (kind_) {
            case Kind::box:
                for (int i = 0; i < dim_; ++i)
                    if (!(lower_[i] < x[i] && x[i] < upper_[i])) return false;
                return true;
            case Kind::ball:
                return radial(x) < radius_;
            case Kind::custom:
                return member_(x);
        }
        return false;
    }

    /// Euclidean distance from x to the complement of G; zero iff x is not in
    /// the open interior.
    double boundary_distance(std::span<const double> x) const {
        switch (kind_) {
            case Kind::box: {
                double rho = upper_[0] - lower_[0];
                for (int i = 0; i < dim_; ++i) {
                    rho = std::min(rho, std::min(x[i] - lower_[i], upper_[i] - x[i]));
                }
                return std::max(rho, 0.0);
            }
            case Kind::ball:
                return std::max(radius_ - radial(x), 0.0);
            case Kind::custom:
                return distance_(x);
        }
        return 0.0;
    }

    /// sup over G of |x|, used by the global barrier construction.
    double enclosing_radius() const {
        if (kind_ == Kind::ball) {
            double c2 = 0.0;
            for (double c : center_) c2 += c * c;
            return std::sqrt(c2) + radius_;
        }
        // Box/custom: farthest corner of the bounding box.
        double r2 = 0.0;
        for (int i = 0; i < dim_; ++i) {
            double m = std::max(std::abs(lower_[i]), std::abs(upper_[i]));
            r2 += m * m;
        }
        return std::sqrt(r2);
    }

    std::span<const double> bbox_lower() const { return lower_; }
    std::span<const double> bbox_upper() const { return upper_; }

private:
    SpatialDomain() = default;

    double radial(std::span<const double> x) const {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) {
            double d = x[i] - center_[i];
            s += d * d;
        }
        return std::sqrt(s);
    }

    Kind kind_ = Kind::box;
    int dim_ = 0;
    std::vector<double> lower_, upper_;    // box bounds, or bounding box otherwise
    std::vector<double> center_;           // ball only
    double radius_ = 0.0;                  // ball only
    MemberFn member_;                      // custom only
    DistanceFn distance_;                  // custom only
};

}  // namespace isaacs
