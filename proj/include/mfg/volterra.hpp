// SPDX-License-Identifier: MIT
/**
 * @file volterra.hpp
 * @brief Gaussian kernels and Picard iteration for the boundary integral equation
 *
 * With drift m(t) and constant volatility the state is Gaussian, and the
 * boundary equation reduces to
 *
 *   c0 (1 - e^{-r(T-t)}) = r c0 I1(t) + g'(y) e^{b(t,y)} I2(t)
 *
 *   I1 = ∫_0^{T-t} e^{-rs} [1 - Φ(β(s))] ds
 *   I2 = ∫_0^{T-t} exp(ΔM(s) + σ²s/2 - rs) Φ(β(s) - σ√s) ds
 *   β(s) = (b(t+s,y) - b(t,y) - ΔM(s)) / (σ√s),   β(0) = 0
 *
 * where ΔM(s) is the integral of m over [t, t+s]. The Picard map solves the
 * equation for b(t,y) in log form with the kernels frozen at the previous
 * iterate. Updates are Jacobi-style: every node reads the old surface only.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfg/model.hpp"
#include "mfg/parallel.hpp"
#include "mfg/surface.hpp"

namespace mfg {

/// Time-quadrature weights for the kernel sums over q = 0..L.
enum class Quadrature {
    trapezoid,  ///< half weight at q = 0 and q = L
    rectangle,  ///< full weight Δt on every node, q = 0..L inclusive
};

inline double quadrature_weight(Quadrature rule, int q, int last) noexcept {
    if (rule == Quadrature::rectangle) return 1.0;
    return (q == 0 || q == last) ? 0.5 : 1.0;
}

/// Raised when too many nodes have a non-positive A term.
class DegenerateKernelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// β for time node i, lag q and capacity node j. β(0) = 0.
inline double beta(const BoundarySurface& b, int i, int q, int j, std::span<const double> M, double sigma) {
    if (q == 0) return 0.0;
    const double s = q * b.grid().dt();
    const auto iq = static_cast<std::size_t>(i + q);
    const auto ii = static_cast<std::size_t>(i);
    return (b(i + q, j) - b(i, j) - (M[iq] - M[ii])) / (sigma * std::sqrt(s));
}

struct KernelSums {
    double I1 = 0.0;
    double I2 = 0.0;
};

/// Quadrature of both kernels from a β sequence over lags q = 0..L and the
/// matching drift increments ΔM_q. An empty horizon (L = 0) integrates to 0.
inline KernelSums integrate_kernels(std::span<const double> betas, std::span<const double> dM, double dt,
                                    const ModelParams& params, Quadrature rule) {
    KernelSums out;
    const int last = static_cast<int>(betas.size()) - 1;
    if (last <= 0) return out;
    const double sig2 = params.sigma * params.sigma;
    for (int q = 0; q <= last; ++q) {
        const double s = q * dt;
        const double w = quadrature_weight(rule, q, last) * dt;
        const double bq = betas[static_cast<std::size_t>(q)];
        out.I1 += w * std::exp(-params.r * s) * normal_cdf(-bq);
        out.I2 += w * std::exp(dM[static_cast<std::size_t>(q)] + 0.5 * sig2 * s - params.r * s) *
                  normal_cdf(bq - params.sigma * std::sqrt(s));
    }
    return out;
}

namespace detail {

inline void node_betas(const BoundarySurface& b, int i, int j, std::span<const double> M, double sigma,
                       std::vector<double>& betas, std::vector<double>& dM) {
    const int last = b.grid().l1() - i;
    betas.resize(static_cast<std::size_t>(last + 1));
    dM.resize(static_cast<std::size_t>(last + 1));
    for (int q = 0; q <= last; ++q) {
        betas[static_cast<std::size_t>(q)] = beta(b, i, q, j, M, sigma);
        dM[static_cast<std::size_t>(q)] = M[static_cast<std::size_t>(i + q)] - M[static_cast<std::size_t>(i)];
    }
}

}  // namespace detail

inline double kernel_I1(const BoundarySurface& b, int i, int j, std::span<const double> M,
                        const ModelParams& params, Quadrature rule = Quadrature::trapezoid) {
    std::vector<double> betas, dM;
    detail::node_betas(b, i, j, M, params.sigma, betas, dM);
    return integrate_kernels(betas, dM, b.grid().dt(), params, rule).I1;
}

inline double kernel_I2(const BoundarySurface& b, int i, int j, std::span<const double> M,
                        const ModelParams& params, Quadrature rule = Quadrature::trapezoid) {
    std::vector<double> betas, dM;
    detail::node_betas(b, i, j, M, params.sigma, betas, dM);
    return integrate_kernels(betas, dM, b.grid().dt(), params, rule).I2;
}

/// A = (1 - e^{-r(T-t)}) - r I1. Positive in the continuum.
inline double a_term(double r, double horizon, double I1) noexcept {
    return -std::expm1(-r * horizon) - r * I1;
}

struct SolverOptions {
    Quadrature quadrature = Quadrature::trapezoid;
    unsigned threads = 1;
    double clamp_floor = 1e-12;          ///< A is clamped here when non-positive
    double max_clamped_fraction = 0.01;  ///< of interior nodes, per update
    bool keep_iterates = false;
};

struct DegenerateNode {
    int i = 0;
    int j = 0;
    double A = 0.0;
};

struct PicardStep {
    BoundarySurface surface;
    double min_A = std::numeric_limits<double>::infinity();
    std::vector<DegenerateNode> clamped;
};

/// One application of the log-form map. Row l1 keeps x̄(y) untouched.
inline PicardStep picard_update(const BoundarySurface& b, const MeanField& m, const ModelParams& params,
                                const Payoff& payoff, const SolverOptions& options = {}) {
    const Grid& grid = b.grid();
    if (!(params.r > 0.0)) throw ConfigError("the boundary equation needs r > 0");
    if (m.size() != static_cast<std::size_t>(grid.nt()))
        throw ConfigError("mean field does not match the time grid");

    PicardStep out{b, std::numeric_limits<double>::infinity(), {}};
    const auto M = m.cumulative();
    const int rows = grid.l1();
    std::vector<double> row_min(static_cast<std::size_t>(rows), std::numeric_limits<double>::infinity());
    std::vector<std::vector<DegenerateNode>> row_clamped(static_cast<std::size_t>(rows));
    const double log_c0 = std::log(params.c0);

    parallel_for(static_cast<std::size_t>(rows), options.threads, [&](std::size_t row) {
        const int i = static_cast<int>(row);
        std::vector<double> betas, dM;
        const double horizon = grid.T() - grid.t(i);
        for (int j = 0; j < grid.ny(); ++j) {
            detail::node_betas(b, i, j, M, params.sigma, betas, dM);
            const KernelSums k = integrate_kernels(betas, dM, grid.dt(), params, options.quadrature);
            double A = a_term(params.r, horizon, k.I1);
            row_min[row] = std::min(row_min[row], A);
            if (!(A > 0.0)) {
                row_clamped[row].push_back({i, j, A});
                A = options.clamp_floor;
            }
            out.surface(i, j) = log_c0 + std::log(A) - std::log(payoff.g_prime(grid.y(j))) - std::log(k.I2);
        }
    });

    for (std::size_t row = 0; row < row_min.size(); ++row) {
        out.min_A = std::min(out.min_A, row_min[row]);
        out.clamped.insert(out.clamped.end(), row_clamped[row].begin(), row_clamped[row].end());
    }
    out.surface.picard_index = b.picard_index + 1;
    return out;
}

struct PicardResult {
    BoundarySurface surface;
    std::vector<double> errors;              ///< ‖b^(k+1) - b^(k)‖₂ per iteration
    std::vector<BoundarySurface> iterates;   ///< b^(0..K) when requested
    double min_A = std::numeric_limits<double>::infinity();
    std::size_t clamped_nodes = 0;
    bool degenerate = false;
    bool converged = false;

    int iterations() const noexcept { return static_cast<int>(errors.size()); }
};

/// Picard iteration up to k_max updates. With early_stop the loop ends as
/// soon as the Frobenius step is below eta; otherwise all k_max updates run
/// and convergence is only reported.
inline PicardResult solve_picard(const BoundarySurface& init, const MeanField& m, const ModelParams& params,
                                 const Payoff& payoff, double eta, int k_max, bool early_stop = true,
                                 const SolverOptions& options = {}) {
    if (!(eta > 0.0)) throw ConfigError("eta must be > 0");
    if (k_max < 1) throw ConfigError("k_max must be >= 1");

    PicardResult result;
    result.surface = init;
    if (options.keep_iterates) result.iterates.push_back(init);
    const auto interior = static_cast<double>(init.grid().l1()) * init.grid().ny();

    for (int k = 0; k < k_max; ++k) {
        PicardStep step = picard_update(result.surface, m, params, payoff, options);
        result.min_A = std::min(result.min_A, step.min_A);
        if (!step.clamped.empty()) {
            result.degenerate = true;
            result.clamped_nodes += step.clamped.size();
            if (static_cast<double>(step.clamped.size()) > options.max_clamped_fraction * interior) {
                const auto& first = step.clamped.front();
                throw DegenerateKernelError(
                    "A <= 0 at " + std::to_string(step.clamped.size()) + " nodes in Picard iteration " +
                    std::to_string(k + 1) + "; first at (i=" + std::to_string(first.i) +
                    ", j=" + std::to_string(first.j) + ") with A = " + std::to_string(first.A));
            }
        }
        if (!step.surface.all_finite()) throw DegenerateKernelError("non-finite boundary value after update");
        const double err = frobenius_distance(step.surface, result.surface);
        result.errors.push_back(err);
        step.surface.game_index = init.game_index;
        result.surface = std::move(step.surface);
        if (options.keep_iterates) result.iterates.push_back(result.surface);
        if (early_stop && err < eta) break;
    }
    result.converged = !result.errors.empty() && result.errors.back() < eta;
    return result;
}

/// u(t_i, x, y_j) from the integral representation with the same Gaussian
/// kernels, the lag variable measured from x instead of b(t_i, y_j).
inline double eval_value_function(int i, double x, int j, const BoundarySurface& b, const MeanField& m,
                                  const ModelParams& params, const Payoff& payoff,
                                  Quadrature rule = Quadrature::trapezoid) {
    const Grid& grid = b.grid();
    const int last = grid.l1() - i;
    if (last == 0) return params.c0;

    const auto M = m.cumulative();
    std::vector<double> betas(static_cast<std::size_t>(last + 1));
    std::vector<double> dM(static_cast<std::size_t>(last + 1));
    const double inf = std::numeric_limits<double>::infinity();
    const double here = b(i, j);
    betas[0] = x < here ? inf : (x > here ? -inf : 0.0);
    dM[0] = 0.0;
    for (int q = 1; q <= last; ++q) {
        const double s = q * grid.dt();
        const double inc = M[static_cast<std::size_t>(i + q)] - M[static_cast<std::size_t>(i)];
        dM[static_cast<std::size_t>(q)] = inc;
        betas[static_cast<std::size_t>(q)] = (b(i + q, j) - x - inc) / (params.sigma * std::sqrt(s));
    }
    const KernelSums k = integrate_kernels(betas, dM, grid.dt(), params, rule);
    const double horizon = grid.T() - grid.t(i);
    return std::exp(-params.r * horizon) * params.c0 + params.r * params.c0 * k.I1 +
           payoff.g_prime(grid.y(j)) * std::exp(x) * k.I2;
}

/// Monotone regularisation: running max over y, then running max from T
/// backwards in t. Row l1 is left as is.
inline void isotonic_projection(BoundarySurface& b) {
    const Grid& grid = b.grid();
    for (int i = 0; i < grid.nt(); ++i)
        for (int j = 1; j < grid.ny(); ++j) b(i, j) = std::max(b(i, j), b(i, j - 1));
    for (int i = grid.l1() - 1; i >= 0; --i)
        for (int j = 0; j < grid.ny(); ++j) b(i, j) = std::max(b(i, j), b(i + 1, j));
}

}  // namespace mfg
