// SPDX-License-Identifier: MIT
/**
 * @file meanfield.hpp
 * @brief Boundary inversion, reflected path simulation and the Monte Carlo
 *        mean-field update
 *
 * The target capacity c(t, x) = inf{y : b(t, y) > x} drives the minimal
 * (Skorokhod) control ξ_t = sup_{s<=t} (c(s, X_s) - Y_{0-})^+. Each path
 * keeps its capacity Y = Y_{0-} + ξ, and the next mean field is the sample
 * mean of Y over paths started from the uniform law on the (x, y) grid.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mfg/model.hpp"
#include "mfg/parallel.hpp"
#include "mfg/rng.hpp"
#include "mfg/surface.hpp"

namespace mfg {

/// c(t_i, x_k) on the (t, x) grid, row-major (l1+1) x (l3+1).
class InverseSurface {
public:
    InverseSurface() = default;

    InverseSurface(const Grid& grid, double fill)
        : grid_(grid), values_(static_cast<std::size_t>(grid.nt() * grid.nx()), fill) {}

    double operator()(int i, int k) const { return values_[index(i, k)]; }
    double& operator()(int i, int k) { return values_[index(i, k)]; }

    const Grid& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }

    /// Linear in x between grid nodes, held at the end values outside
    /// [x_min, x_max].
    double at(int i, double x) const {
        const int last = grid_.l3();
        if (x <= grid_.x(0)) return (*this)(i, 0);
        if (x >= grid_.x(last)) return (*this)(i, last);
        const double p = (x - grid_.x(0)) / grid_.dx();
        const int k = std::min(static_cast<int>(p), last - 1);
        const double w = p - k;
        return (1.0 - w) * (*this)(i, k) + w * (*this)(i, k + 1);
    }

    /// Linear in t between rows; `position` is the fractional row index.
    double at_position(double position, double x) const {
        const int last = grid_.l1();
        if (position <= 0.0) return at(0, x);
        if (position >= last) return at(last, x);
        const int i = static_cast<int>(position);
        const double w = position - i;
        if (w == 0.0) return at(i, x);
        return (1.0 - w) * at(i, x) + w * at(i + 1, x);
    }

private:
    std::size_t index(int i, int k) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(grid_.nx()) + static_cast<std::size_t>(k);
    }

    Grid grid_;
    std::vector<double> values_;
};

/// Generalised right-continuous inverse of one monotone row b(y), piecewise
/// linear between the y-nodes: 1 above the row, 0 below it.
inline double invert_row(std::span<const double> row, std::span<const double> ys, double x) {
    if (x >= row.back()) return 1.0;
    if (x < row.front()) return 0.0;
    // first node strictly above x; row.front() <= x guarantees j >= 1
    const auto it = std::upper_bound(row.begin(), row.end(), x);
    const auto j = static_cast<std::size_t>(it - row.begin());
    const double lo = row[j - 1];
    const double hi = row[j];
    return ys[j - 1] + (x - lo) / (hi - lo) * (ys[j] - ys[j - 1]);
}

struct InversionResult {
    InverseSurface surface;
    double max_y_violation = 0.0;       ///< largest decrease of b along y before regularisation
    std::vector<int> regularized_rows;  ///< rows whose violation exceeded the tolerance
    std::vector<std::string> warnings;
};

/// c_n(t_i, x_k) for every grid node. Rows are made non-decreasing by a
/// running max before the search; a warning is recorded if any row needed
/// more than `tolerance` of correction.
inline InversionResult invert_boundary(const BoundarySurface& b, double tolerance = 5e-3) {
    const Grid& grid = b.grid();
    InversionResult out{InverseSurface(grid, 0.0), 0.0, {}, {}};
    const auto ys = grid.y_nodes();
    std::vector<double> row(static_cast<std::size_t>(grid.ny()));
    for (int i = 0; i < grid.nt(); ++i) {
        const auto src = b.row(i);
        double running = src[0];
        double violation = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            violation = std::max(violation, running - src[j]);
            running = std::max(running, src[j]);
            row[j] = running;
        }
        out.max_y_violation = std::max(out.max_y_violation, violation);
        if (violation > tolerance) {
            out.regularized_rows.push_back(i);
            out.warnings.push_back("boundary row " + std::to_string(i) + " decreases in y by " +
                                   std::to_string(violation) + "; running max applied before inversion");
        }
        for (int k = 0; k < grid.nx(); ++k) out.surface(i, k) = invert_row(row, ys, grid.x(k));
    }
    return out;
}

/// Euler step of dX = m dt + σ dW.
inline double euler_step(double x, double m, double dt, double z, double sigma) noexcept {
    return x + m * dt + sigma * std::sqrt(dt) * z;
}

struct Reflection {
    std::vector<double> Y;
    std::vector<double> xi;
};

/// Minimal non-decreasing control keeping Y >= c along a target sequence.
inline Reflection reflect(std::span<const double> c_along, double y0_minus) {
    Reflection out;
    out.Y.resize(c_along.size());
    out.xi.resize(c_along.size());
    double S = 0.0;
    for (std::size_t i = 0; i < c_along.size(); ++i) {
        S = std::max(S, std::max(c_along[i] - y0_minus, 0.0));
        out.xi[i] = S;
        out.Y[i] = y0_minus + S;
    }
    return out;
}

/// One controlled trajectory on a uniform grid of `steps` steps over [0, T].
struct ControlledPath {
    double x0 = 0.0;
    double y0_minus = 0.0;
    std::vector<double> t;
    std::vector<double> X;
    std::vector<double> Y;
    std::vector<double> xi;
    std::vector<double> c_along;

    std::size_t size() const noexcept { return t.size(); }
};

/// Simulates X with drift taken from `drift` and reflects Y against c.
/// c and the drift are read at the current X before the Euler move. With
/// steps == l1 the coarse rows are used exactly; finer grids interpolate
/// linearly in t.
inline ControlledPath simulate_path(const InverseSurface& c, const MeanField& drift, const ModelParams& params,
                                    double x0, double y0_minus, int steps, PathRng& rng) {
    const Grid& grid = c.grid();
    const auto n = static_cast<std::size_t>(steps + 1);
    ControlledPath path;
    path.x0 = x0;
    path.y0_minus = y0_minus;
    path.t.resize(n);
    path.X.resize(n);
    path.c_along.resize(n);

    const double h = params.T / steps;
    const auto l1 = static_cast<std::int64_t>(grid.l1());
    double x = x0;
    for (int s = 0; s <= steps; ++s) {
        // row position s * l1 / steps, with the integer part computed exactly
        const std::int64_t num = static_cast<std::int64_t>(s) * l1;
        const double position = static_cast<double>(num / steps) +
                                static_cast<double>(num % steps) / static_cast<double>(steps);
        const auto u = static_cast<std::size_t>(s);
        path.t[u] = s == steps ? params.T : s * h;
        path.X[u] = x;
        path.c_along[u] = c.at_position(position, x);
        if (s < steps) x = euler_step(x, drift.at_position(position), h, rng.normal(), params.sigma);
    }
    Reflection ref = reflect(path.c_along, y0_minus);
    path.Y = std::move(ref.Y);
    path.xi = std::move(ref.xi);
    return path;
}

/// Draws (X_0, Y_{0-}) uniformly from the product grid Π_x × Π_y.
inline std::pair<double, double> sample_initial_condition(const Grid& grid, PathRng& rng) {
    const auto k = static_cast<int>(rng.index(static_cast<std::uint64_t>(grid.nx())));
    const auto j = static_cast<int>(rng.index(static_cast<std::uint64_t>(grid.ny())));
    return {grid.x(k), grid.y(j)};
}

/// Batch of paths from the uniform grid law, path p using stream p.
inline std::vector<ControlledPath> simulate_batch(const InverseSurface& c, const MeanField& drift,
                                                  const ModelParams& params, std::size_t n_paths, int steps,
                                                  std::uint64_t seed, unsigned threads = 1) {
    std::vector<ControlledPath> paths(n_paths);
    parallel_for(n_paths, threads, [&](std::size_t p) {
        PathRng rng(seed, p);
        const auto [x0, y0] = sample_initial_condition(c.grid(), rng);
        paths[p] = simulate_path(c, drift, params, x0, y0, steps, rng);
    });
    return paths;
}

struct MeanFieldEstimate {
    MeanField m;
    std::vector<double> std_error;  ///< per time node, sample standard error
};

/// Next mean field m^[n](t_i) = sample mean of Y_{t_i}. Each path fills its
/// own buffer row; the fold over paths runs in path order, so the result is
/// bit-identical for any thread count.
inline MeanFieldEstimate estimate_mean_field(const InverseSurface& c, const MeanField& drift,
                                             const ModelParams& params, std::size_t n_paths, std::uint64_t seed,
                                             unsigned threads = 1) {
    if (n_paths < 1) throw ConfigError("mc_paths must be >= 1");
    const Grid& grid = c.grid();
    const auto nt = static_cast<std::size_t>(grid.nt());
    std::vector<double> buffer(n_paths * nt);
    parallel_for(n_paths, threads, [&](std::size_t p) {
        PathRng rng(seed, p);
        const auto [x0, y0] = sample_initial_condition(grid, rng);
        const ControlledPath path = simulate_path(c, drift, params, x0, y0, grid.l1(), rng);
        std::copy(path.Y.begin(), path.Y.end(), buffer.begin() + static_cast<std::ptrdiff_t>(p * nt));
    });

    std::vector<double> sum(nt, 0.0), sum_sq(nt, 0.0);
    for (std::size_t p = 0; p < n_paths; ++p)
        for (std::size_t i = 0; i < nt; ++i) {
            const double v = buffer[p * nt + i];
            sum[i] += v;
            sum_sq[i] += v * v;
        }
    const auto n = static_cast<double>(n_paths);
    std::vector<double> mean(nt), se(nt, 0.0);
    for (std::size_t i = 0; i < nt; ++i) {
        mean[i] = std::clamp(sum[i] / n, 0.0, 1.0);
        if (n_paths > 1) {
            const double var = std::max(0.0, (sum_sq[i] - n * mean[i] * mean[i]) / (n - 1.0));
            se[i] = std::sqrt(var / n);
        }
    }
    return {MeanField(std::move(mean), grid), std::move(se)};
}

/// Convenience overload: inverts b first.
inline MeanFieldEstimate estimate_mean_field(const BoundarySurface& b, const MeanField& drift,
                                             const ModelParams& params, std::size_t n_paths, std::uint64_t seed,
                                             unsigned threads = 1) {
    return estimate_mean_field(invert_boundary(b).surface, drift, params, n_paths, seed, threads);
}

}  // namespace mfg
