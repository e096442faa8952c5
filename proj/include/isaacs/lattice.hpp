#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "isaacs/errors.hpp"

namespace isaacs {

class DirectionSet;

/// Extension point for diffusion matrices the built-in rule cannot handle:
/// writes one nonnegative coefficient per direction into `out` such that
/// Σ_k out[k]·l_k·l_kᵀ reproduces the input matrix.
using DiffusionDecomposer =
    std::function<void(std::span<const double> matrix, const DirectionSet& directions,
                       std::span<double> out)>;

/// Finite set of integer stencil directions containing the standard basis.
/// Directions are stored up to sign (first nonzero component positive): the
/// second difference is even in l and drift upwinding resolves the sign, so
/// one representative per line suffices.
class DirectionSet {
public:
    DirectionSet(int dim, std::vector<std::vector<int>> directions,
                 DiffusionDecomposer decomposer = {})
        : dim_(dim), decomposer_(std::move(decomposer)) {
        if (dim < 1) throw Error("direction set dimension must be positive");
        if (directions.empty()) throw Error("direction set must be nonempty");
        for (auto& l : directions) {
            if (l.size() != static_cast<std::size_t>(dim))
                throw Error("direction dimension mismatch");
            normalize_sign(l);
            bool zero = true;
            for (int c : l) zero = zero && c == 0;
            if (zero) throw Error("zero vector is not a valid direction");
            flat_.insert(flat_.end(), l.begin(), l.end());
        }
        const std::size_t m = size();
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = a + 1; b < m; ++b)
                if (parallel(direction(a), direction(b)))
                    throw Error("directions must be pairwise non-parallel");

        basis_pos_.assign(dim, -1);
        pair_plus_.assign(static_cast<std::size_t>(dim) * dim, -1);
        pair_minus_.assign(static_cast<std::size_t>(dim) * dim, -1);
        radius_ = 0.0;
        sum_sq_ = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            auto l = direction(k);
            double len2 = 0.0;
            for (int c : l) len2 += static_cast<double>(c) * c;
            radius_ = std::max(radius_, std::sqrt(len2));
            sum_sq_ += len2;
            classify(k, l);
        }
        for (int i = 0; i < dim; ++i)
            if (basis_pos_[i] < 0)
                throw Error("direction set must contain every standard basis vector");
    }

    int dim() const { return dim_; }
    std::size_t size() const { return flat_.size() / dim_; }
    std::span<const int> direction(std::size_t k) const {
        return {flat_.data() + k * dim_, static_cast<std::size_t>(dim_)};
    }
    /// Radius of the smallest origin-centered closed ball containing the set.
    double radius() const { return radius_; }
    /// Σ_k |l_k|², used to derive the Pucci ellipticity floor.
    double sum_squared_lengths() const { return sum_sq_; }

    int basis_position(int axis) const { return basis_pos_[axis]; }
    int pair_position(int i, int j, bool plus) const {
        return plus ? pair_plus_[i * dim_ + j] : pair_minus_[i * dim_ + j];
    }
    const DiffusionDecomposer& decomposer() const { return decomposer_; }

private:
    static void normalize_sign(std::vector<int>& l) {
        for (int c : l) {
            if (c > 0) return;
            if (c < 0) break;
        }
        for (int& c : l) c = -c;
    }

    static bool parallel(std::span<const int> a, std::span<const int> b) {
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = i + 1; j < a.size(); ++j)
                if (static_cast<long>(a[i]) * b[j] != static_cast<long>(a[j]) * b[i])
                    return false;
        return true;
    }

    void classify(std::size_t k, std::span<const int> l) {
        int nonzero = 0, first = -1, second = -1;
        for (int i = 0; i < dim_; ++i) {
            if (l[i] != 0) {
                ++nonzero;
                (first < 0 ? first : second) = i;
            }
        }
        if (nonzero == 1 && l[first] == 1) {
            basis_pos_[first] = static_cast<int>(k);
        } else if (nonzero == 2 && l[first] == 1 && (l[second] == 1 || l[second] == -1)) {
            (l[second] == 1 ? pair_plus_ : pair_minus_)[first * dim_ + second] =
                static_cast<int>(k);
        }
    }

    int dim_;
    std::vector<int> flat_;
    double radius_ = 0.0;
    double sum_sq_ = 0.0;
    std::vector<int> basis_pos_;
    std::vector<int> pair_plus_, pair_minus_;  // e_i ± e_j lookup, i < j
    DiffusionDecomposer decomposer_;
};

/// Built-in direction sets: the basis plus, in d = 2 and 3, the signed
/// two-axis diagonals needed to absorb off-diagonal diffusion terms.
inline DirectionSet standard_directions(int dim) {
    if (dim < 1 || dim > 3)
        throw UnsupportedDimension("built-in direction sets cover d in {1,2,3}; supply a custom set otherwise");
    std::vector<std::vector<int>> dirs;
    for (int i = 0; i < dim; ++i) {
        std::vector<int> e(dim, 0);
        e[i] = 1;
        dirs.push_back(std::move(e));
    }
    for (int i = 0; i < dim; ++i) {
        for (int j = i + 1; j < dim; ++j) {
            std::vector<int> p(dim, 0), m(dim, 0);
            p[i] = 1;
            p[j] = 1;
            m[i] = 1;
            m[j] = -1;
            dirs.push_back(std::move(p));
            dirs.push_back(std::move(m));
        }
    }
    return DirectionSet(dim, std::move(dirs));
}

inline constexpr double kDominanceFloor = 1e-10;

/// Decompose a symmetric diffusion matrix over the direction set:
/// off-diagonal mass goes to the signed diagonals, the remainder to the
/// basis directions. Requires strict diagonal dominance (up to the floor);
/// a custom decomposer attached to the set overrides this rule.
inline void decompose_diffusion(std::span<const double> matrix, const DirectionSet& dirs,
                                std::span<double> out,
                                double dominance_floor = kDominanceFloor) {
    const int d = dirs.dim();
    if (dirs.decomposer()) {
        dirs.decomposer()(matrix, dirs, out);
        return;
    }
    for (auto& v : out) v = 0.0;
    for (int i = 0; i < d; ++i) {
        double off = 0.0;
        for (int j = 0; j < d; ++j) {
            if (j == i) continue;
            const double aij = 0.5 * (matrix[i * d + j] + matrix[j * d + i]);
            off += std::abs(aij);
            if (j < i || aij == 0.0) continue;
            const int pos = dirs.pair_position(i, j, aij > 0.0);
            if (pos < 0)
                throw DecompositionInfeasible(
                    "direction set lacks the signed diagonal for entry (" +
                        std::to_string(i) + "," + std::to_string(j) + ")",
                    i);
            out[pos] += std::abs(aij);
        }
        const double basis_coef = matrix[i * d + i] - off;
        if (basis_coef < dominance_floor)
            throw DecompositionInfeasible(
                "diagonal dominance fails on row " + std::to_string(i) +
                    " (margin " + std::to_string(basis_coef) + ")",
                i);
        out[dirs.basis_position(i)] = basis_coef;
    }
}

inline std::vector<double> decompose_diffusion(std::span<const double> matrix,
                                               const DirectionSet& dirs,
                                               double dominance_floor = kDominanceFloor) {
    std::vector<double> out(dirs.size());
    decompose_diffusion(matrix, dirs, out, dominance_floor);
    return out;
}

/// Drift decomposes along the basis directions only; the representation is
/// exact for every input.
inline void decompose_drift(std::span<const double> drift, const DirectionSet& dirs,
                            std::span<double> out) {
    for (auto& v : out) v = 0.0;
    for (int i = 0; i < dirs.dim(); ++i) out[dirs.basis_position(i)] = drift[i];
}

inline std::vector<double> decompose_drift(std::span<const double> drift,
                                           const DirectionSet& dirs) {
    std::vector<double> out(dirs.size());
    decompose_drift(drift, dirs, out);
    return out;
}

}  // namespace isaacs
