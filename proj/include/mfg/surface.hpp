// SPDX-License-Identifier: MIT
/**
 * @file surface.hpp
 * @brief Boundary surface b(t_i, y_j) and mean-field curve m(t_i)
 */

#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mfg/model.hpp"

namespace mfg {

/// Row-major (l1+1) x (l2+1) table of the free boundary in log-price units.
class BoundarySurface {
public:
    BoundarySurface() = default;

    BoundarySurface(const Grid& grid, double fill)
        : grid_(grid), values_(static_cast<std::size_t>(grid.nt() * grid.ny()), fill) {}

    /// Every row equal to x̄(y_j); the cold start of the Picard scheme.
    static BoundarySurface terminal(const Grid& grid, const ModelParams& params, const Payoff& payoff) {
        BoundarySurface b(grid, 0.0);
        for (int j = 0; j < grid.ny(); ++j) {
            const double xb = terminal_boundary(params, payoff, grid.y(j));
            for (int i = 0; i < grid.nt(); ++i) b(i, j) = xb;
        }
        return b;
    }

    double operator()(int i, int j) const { return values_[index(i, j)]; }
    double& operator()(int i, int j) { return values_[index(i, j)]; }

    std::span<const double> row(int i) const {
        return {values_.data() + index(i, 0), static_cast<std::size_t>(grid_.ny())};
    }
    std::span<double> row(int i) {
        return {values_.data() + index(i, 0), static_cast<std::size_t>(grid_.ny())};
    }

    const Grid& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    bool all_finite() const {
        for (double v : values_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    int game_index = 0;    ///< n
    int picard_index = 0;  ///< k

private:
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(grid_.ny()) +
               static_cast<std::size_t>(j);
    }

    Grid grid_;
    std::vector<double> values_;
};

/// Unweighted Frobenius distance over every grid node.
inline double frobenius_distance(const BoundarySurface& a, const BoundarySurface& b) {
    const auto va = a.values();
    const auto vb = b.values();
    if (va.size() != vb.size()) throw ConfigError("surface size mismatch");
    double sum = 0.0;
    for (std::size_t n = 0; n < va.size(); ++n) {
        const double d = va[n] - vb[n];
        sum += d * d;
    }
    return std::sqrt(sum);
}

/// Trapezoid running integral M_i of m over the time grid, M_0 = 0.
inline std::vector<double> cumulative_drift(std::span<const double> m, double dt) {
    std::vector<double> M(m.size(), 0.0);
    for (std::size_t i = 1; i < m.size(); ++i) M[i] = M[i - 1] + 0.5 * (m[i] + m[i - 1]) * dt;
    return M;
}

/// m(t_i) in [0,1] together with its cumulative integral.
class MeanField {
public:
    MeanField() = default;

    MeanField(std::vector<double> values, const Grid& grid) : values_(std::move(values)), dt_(grid.dt()) {
        if (values_.size() != static_cast<std::size_t>(grid.nt()))
            throw ConfigError("mean field length " + std::to_string(values_.size()) +
                              " does not match the time grid (" + std::to_string(grid.nt()) + ")");
        for (double v : values_)
            if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("mean field values must lie in [0, 1]");
        cumulative_ = cumulative_drift(values_, dt_);
    }

    static MeanField constant(const Grid& grid, double value) {
        return MeanField(std::vector<double>(static_cast<std::size_t>(grid.nt()), value), grid);
    }

    std::span<const double> values() const noexcept { return values_; }
    std::span<const double> cumulative() const noexcept { return cumulative_; }
    double operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
    std::size_t size() const noexcept { return values_.size(); }

    /// Piecewise-linear value at fractional row position p in [0, l1].
    double at_position(double p) const {
        const auto last = static_cast<double>(values_.size() - 1);
        if (p <= 0.0) return values_.front();
        if (p >= last) return values_.back();
        const auto i = static_cast<std::size_t>(p);
        const double w = p - static_cast<double>(i);
        return w == 0.0 ? values_[i] : (1.0 - w) * values_[i] + w * values_[i + 1];
    }

private:
    std::vector<double> values_;
    std::vector<double> cumulative_;
    double dt_ = 0.0;
};

}  // namespace mfg
