// SPDX-License-Identifier: MIT
/**
 * @file diagnostics.hpp
 * @brief Validation of an equilibrium candidate (b*, m†)
 *
 * - residual: distance between b* and one more application of the
 *   boundary map driven by m† (terminal row excluded, it is pinned)
 * - skorokhod_check: feasibility G = Y - c(t, X) >= 0 along paths and
 *   complementarity (G = 0 wherever the control moves)
 * - monotonicity_audit: how far b departs from non-increasing in t and
 *   non-decreasing in y
 * - smooth_fit_probe: u(t, b, y) = c0 and the slope of u just below b
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "mfg/meanfield.hpp"
#include "mfg/surface.hpp"
#include "mfg/volterra.hpp"

namespace mfg {

struct ResidualReport {
    int rows = 0;                 ///< interior time nodes (l1)
    int cols = 0;                 ///< capacity nodes (l2 + 1)
    std::vector<double> values;   ///< R(t_i, y_j), row-major, i < l1
    double norm_inf = 0.0;
    double norm_2 = 0.0;
    double min_A = std::numeric_limits<double>::infinity();
    std::size_t clamped_nodes = 0;

    double operator()(int i, int j) const {
        return values[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(j)];
    }
};

/// Norms of a residual table: max entry and Euclidean norm.
inline void residual_norms(std::span<const double> values, double& norm_inf, double& norm_2) {
    norm_inf = 0.0;
    double sum = 0.0;
    for (double v : values) {
        norm_inf = std::max(norm_inf, v);
        sum += v * v;
    }
    norm_2 = std::sqrt(sum);
}

inline ResidualReport residual(const BoundarySurface& b_star, const MeanField& m_dag, const ModelParams& params,
                               const Payoff& payoff, const SolverOptions& options = {}) {
    const PicardStep step = picard_update(b_star, m_dag, params, payoff, options);
    const Grid& grid = b_star.grid();
    ResidualReport out;
    out.rows = grid.l1();
    out.cols = grid.ny();
    out.values.resize(static_cast<std::size_t>(out.rows * out.cols));
    for (int i = 0; i < out.rows; ++i)
        for (int j = 0; j < out.cols; ++j)
            out.values[static_cast<std::size_t>(i * out.cols + j)] = std::abs(step.surface(i, j) - b_star(i, j));
    residual_norms(out.values, out.norm_inf, out.norm_2);
    out.min_A = step.min_A;
    out.clamped_nodes = step.clamped.size();
    return out;
}

struct ActivePoint {
    std::size_t path = 0;
    std::size_t step = 0;
    double t = 0.0;
    double G = 0.0;
};

struct SkorokhodStats {
    double max_abs_G_active = 0.0;  ///< 0 by convention when nothing is active
    double min_G = std::numeric_limits<double>::infinity();
    std::size_t n_active = 0;
    std::size_t n_steps = 0;
    bool empty_active_set = true;
    bool feasible = true;        ///< min_G >= -tol_feas
    bool complementary = true;   ///< max_abs_G_active <= tol_active_G
    std::vector<ActivePoint> active;
};

/// A step is active when Δξ > active_threshold (ξ_{0-} = 0).
inline SkorokhodStats skorokhod_check(std::span<const ControlledPath> paths, double tol_active_G = 1e-8,
                                      double tol_feas = 1e-10, double active_threshold = 1e-14) {
    SkorokhodStats out;
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const ControlledPath& path = paths[p];
        double prev_xi = 0.0;
        for (std::size_t s = 0; s < path.size(); ++s) {
            const double G = path.Y[s] - path.c_along[s];
            out.min_G = std::min(out.min_G, G);
            ++out.n_steps;
            if (path.xi[s] - prev_xi > active_threshold) {
                ++out.n_active;
                out.max_abs_G_active = std::max(out.max_abs_G_active, std::abs(G));
                out.active.push_back({p, s, path.t[s], G});
            }
            prev_xi = path.xi[s];
        }
    }
    out.empty_active_set = out.n_active == 0;
    out.feasible = out.min_G >= -tol_feas;
    out.complementary = out.max_abs_G_active <= tol_active_G;
    return out;
}

struct MonotonicityStats {
    double max_t_violation = 0.0;  ///< max (b(t_{i+1}, y) - b(t_i, y))^+
    double max_y_violation = 0.0;  ///< max (b(t, y_j) - b(t, y_{j+1}))^+
};

inline MonotonicityStats monotonicity_audit(const BoundarySurface& b) {
    const Grid& grid = b.grid();
    MonotonicityStats out;
    for (int i = 0; i < grid.nt(); ++i)
        for (int j = 0; j < grid.ny(); ++j) {
            if (i + 1 < grid.nt()) out.max_t_violation = std::max(out.max_t_violation, b(i + 1, j) - b(i, j));
            if (j + 1 < grid.ny()) out.max_y_violation = std::max(out.max_y_violation, b(i, j) - b(i, j + 1));
        }
    return out;
}

struct SmoothFitStats {
    double max_value_gap = 0.0;    ///< max |u(t, b(t,y), y) - c0|
    double max_slope_below = 0.0;  ///< max |u(b) - u(b - h)| / h over probe offsets
    double max_u = -std::numeric_limits<double>::infinity();
    double min_u = std::numeric_limits<double>::infinity();
};

/// Evaluates u at x = b(t_i, y_j) and b ± h for every interior node.
inline SmoothFitStats smooth_fit_probe(const BoundarySurface& b_star, const MeanField& m_dag,
                                       const ModelParams& params, const Payoff& payoff,
                                       std::span<const double> probe_offsets,
                                       Quadrature rule = Quadrature::trapezoid) {
    const Grid& grid = b_star.grid();
    SmoothFitStats out;
    auto track = [&out](double u) {
        out.max_u = std::max(out.max_u, u);
        out.min_u = std::min(out.min_u, u);
    };
    for (int i = 0; i < grid.l1(); ++i)
        for (int j = 0; j < grid.ny(); ++j) {
            const double xb = b_star(i, j);
            const double ub = eval_value_function(i, xb, j, b_star, m_dag, params, payoff, rule);
            track(ub);
            out.max_value_gap = std::max(out.max_value_gap, std::abs(ub - params.c0));
            for (double h : probe_offsets) {
                const double below = eval_value_function(i, xb - h, j, b_star, m_dag, params, payoff, rule);
                const double above = eval_value_function(i, xb + h, j, b_star, m_dag, params, payoff, rule);
                track(below);
                track(above);
                out.max_slope_below = std::max(out.max_slope_below, std::abs(ub - below) / h);
            }
        }
    return out;
}

struct DiagnosticsReport {
    ResidualReport residual;
    SkorokhodStats skorokhod;
    MonotonicityStats monotonicity;
    SmoothFitStats smooth_fit;
};

}  // namespace mfg
