#pragma once

#include <cstdint>
#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "isaacs/domain.hpp"
#include "isaacs/errors.hpp"

namespace isaacs {

/// Discrete space-time cylinder: spatial lattice hZ^d ∩ G crossed with the
/// time slices {k·h^2 : k >= 1, k·h^2 < T}. A point is interior when its
/// boundary distance exceeds h times the stencil radius and the next time
/// slice is still below the horizon; everything else carries boundary data.
///
/// Nodes are stored as integer multi-indices and realized as h·i on demand,
/// so membership and neighbor lookups never drift with floating point.
class SpaceTimeGrid {
public:
    static SpaceTimeGrid build(SpatialDomain domain, double horizon, double step,
                               double direction_radius) {
        if (!(step > 0.0) || !(horizon > step * step))
            throw InvalidStep("need h > 0 and T > h^2");
        if (!(direction_radius > 0.0))
            throw Error("direction radius must be positive");

        SpaceTimeGrid g;
        g.domain_ = std::move(domain);
        g.dim_ = g.domain_.dim();
        g.h_ = step;
        g.horizon_ = horizon;
        g.dir_radius_ = direction_radius;

        const double h2 = step * step;
        for (long k = 1; static_cast<double>(k) * h2 < horizon; ++k)
            g.times_.push_back(static_cast<double>(k) * h2);

        g.enumerate_nodes();

        const bool has_time_interior = g.times_.size() >= 2;
        if (g.interior_nodes_.empty() || !has_time_interior)
            throw EmptyGrid("no interior space-time point at this step");
        return g;
    }

    int dim() const { return dim_; }
    double step() const { return h_; }
    double horizon() const { return horizon_; }
    double direction_radius() const { return dir_radius_; }
    const SpatialDomain& domain() const { return domain_; }

    std::size_t num_times() const { return times_.size(); }
    double time(std::size_t k) const { return times_[k]; }
    std::span<const double> times() const { return times_; }

    std::size_t num_nodes() const { return node_index_.size() / dim_; }
    std::span<const int> node_index(std::size_t n) const {
        return {node_index_.data() + n * dim_, static_cast<std::size_t>(dim_)};
    }
    void node_coords(std::size_t n, std::span<double> x) const {
        auto idx = node_index(n);
        for (int i = 0; i < dim_; ++i) x[i] = h_ * idx[i];
    }
    std::vector<double> node_coords(std::size_t n) const {
        std::vector<double> x(dim_);
        node_coords(n, x);
        return x;
    }

    /// Spatial interiority: boundary distance strictly exceeds h·r_Λ.
    bool node_interior(std::size_t n) const { return node_interior_[n] != 0; }

    /// Full interiority of the space-time point (t_k, x_n).
    bool interior(std::size_t k, std::size_t n) const {
        return node_interior_[n] != 0 && k + 1 < times_.size();
    }

    std::span<const std::size_t> interior_nodes() const { return interior_nodes_; }

    /// Node id of the given integer multi-index, or -1 if not on the grid.
    std::ptrdiff_t find_node(std::span<const int> idx) const {
        std::int64_t off = 0;
        for (int i = 0; i < dim_; ++i) {
            if (idx[i] < box_lo_[i] || idx[i] > box_hi_[i]) return -1;
            off += static_cast<std::int64_t>(idx[i] - box_lo_[i]) * raster_stride_[i];
        }
        return raster_[static_cast<std::size_t>(off)];
    }

    /// Node id of x_n + sign·h·l, or -1 if that lattice point is off the grid.
    std::ptrdiff_t neighbor(std::size_t n, std::span<const int> l, int sign) const {
        int idx[kMaxDim];
        auto base = node_index(n);
        for (int i = 0; i < dim_; ++i) idx[i] = base[i] + sign * l[i];
        return find_node({idx, static_cast<std::size_t>(dim_)});
    }

    static constexpr int kMaxDim = 8;

private:
    SpaceTimeGrid() = default;

    void enumerate_nodes() {
        auto lo = domain_.bbox_lower();
        auto hi = domain_.bbox_upper();
        box_lo_.resize(dim_);
        box_hi_.resize(dim_);
        for (int i = 0; i < dim_; ++i) {
            box_lo_[i] = static_cast<int>(std::ceil(lo[i] / h_)) - 1;
            box_hi_[i] = static_cast<int>(std::floor(hi[i] / h_)) + 1;
        }
        raster_stride_.resize(dim_);
        std::int64_t total = 1;
        for (int i = dim_ - 1; i >= 0; --i) {
            raster_stride_[i] = total;
            total *= box_hi_[i] - box_lo_[i] + 1;
        }
        raster_.assign(static_cast<std::size_t>(total), -1);

        std::vector<int> idx(box_lo_.begin(), box_lo_.end());
        std::vector<double> x(dim_);
        const double interior_clearance = h_ * dir_radius_;
        for (;;) {
            for (int i = 0; i < dim_; ++i) x[i] = h_ * idx[i];
            if (domain_.contains(x)) {
                std::int64_t off = 0;
                for (int i = 0; i < dim_; ++i)
                    off += static_cast<std::int64_t>(idx[i] - box_lo_[i]) * raster_stride_[i];
                const auto id = static_cast<std::int32_t>(num_nodes());
                raster_[static_cast<std::size_t>(off)] = id;
                node_index_.insert(node_index_.end(), idx.begin(), idx.end());
                const bool inner = domain_.boundary_distance(x) > interior_clearance;
                node_interior_.push_back(inner ? 1 : 0);
                if (inner) interior_nodes_.push_back(static_cast<std::size_t>(id));
            }
            int axis = dim_ - 1;
            while (axis >= 0 && ++idx[axis] > box_hi_[axis]) {
                idx[axis] = box_lo_[axis];
                --axis;
            }
            if (axis < 0) break;
        }
    }

    SpatialDomain domain_ = SpatialDomain::box({0.0}, {1.0});
    int dim_ = 1;
    double h_ = 0.0, horizon_ = 0.0, dir_radius_ = 0.0;
    std::vector<double> times_;
    std::vector<int> node_index_;              // num_nodes × dim, flattened
    std::vector<std::uint8_t> node_interior_;  // spatial interiority per node
    std::vector<std::size_t> interior_nodes_;
    std::vector<int> box_lo_, box_hi_;
    std::vector<std::int64_t> raster_stride_;
    std::vector<std::int32_t> raster_;         // node id per bounding-box cell, -1 if absent
};

inline SpaceTimeGrid build_grid(SpatialDomain domain, double horizon, double step,
                                double direction_radius) {
    return SpaceTimeGrid::build(std::move(domain), horizon, step, direction_radius);
}

/// Real values on every grid point, stored slice-major. The referenced grid
/// must outlive the function.
class GridFunction {
public:
    explicit GridFunction(const SpaceTimeGrid& grid, double fill = 0.0)
        : grid_(&grid), values_(grid.num_times() * grid.num_nodes(), fill) {}

    const SpaceTimeGrid& grid() const { return *grid_; }

    double operator()(std::size_t k, std::size_t n) const {
        return values_[k * grid_->num_nodes() + n];
    }
    double& operator()(std::size_t k, std::size_t n) {
        return values_[k * grid_->num_nodes() + n];
    }

    std::span<const double> slice(std::size_t k) const {
        return {values_.data() + k * grid_->num_nodes(), grid_->num_nodes()};
    }
    std::span<double> slice(std::size_t k) {
        return {values_.data() + k * grid_->num_nodes(), grid_->num_nodes()};
    }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

private:
    const SpaceTimeGrid* grid_;
    std::vector<double> values_;
};

/// Fill a grid function by sampling fn(t, x) at every grid point.
inline GridFunction sample(const SpaceTimeGrid& grid,
                           const std::function<double(double, std::span<const double>)>& fn) {
    GridFunction u(grid);
    std::vector<double> x(grid.dim());
    for (std::size_t n = 0; n < grid.num_nodes(); ++n) {
        grid.node_coords(n, x);
        for (std::size_t k = 0; k < grid.num_times(); ++k) u(k, n) = fn(grid.time(k), x);
    }
    return u;
}

}  // namespace isaacs
