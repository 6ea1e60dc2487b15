// SPDX-License-Identifier: MIT
/**
 * @file oracle.hpp
 * @brief Independent optimal-stopping solver for a single capacity slice
 *
 * Solves u(t, x) = inf_τ E[∫_0^τ e^{-rs} e^{X_s} g'(y) ds + c0 e^{-rτ}]
 * by explicit backward induction on a fine (t, x) lattice:
 *
 *   u(T, x) = c0
 *   u(t, x) = min(c0, e^x g'(y) h + e^{-rh} E_Z[u(t+h, x + m(t) h + σ√h Z)])
 *
 * The expectation uses Gauss–Hermite nodes with linear interpolation in x.
 * Nothing here shares code with the integral-equation solver, which is the
 * point: it is used to cross-check the Picard boundary.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfg/model.hpp"
#include "mfg/surface.hpp"

namespace mfg {

/// Nodes and weights for E[f(Z)], Z ~ N(0, 1).
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Probabilists' rule of the given order, weights normalised to sum to 1.
/// Roots of the physicists' Hermite polynomial by Newton iteration on the
/// orthonormal recurrence, then rescaled by √2.
inline GaussHermiteRule gauss_hermite(int order) {
    if (order < 1) throw ConfigError("Gauss-Hermite order must be >= 1");
    const int n = order;
    std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
    const double pim4 = 1.0 / std::pow(std::numbers::pi, 0.25);
    const int half = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < half; ++i) {
        if (i == 0)
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
        else if (i == 1)
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * x[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * x[1];
        else
            z = 2.0 * z - x[static_cast<std::size_t>(i - 2)];

        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = pim4, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double prev = z;
            z = prev - p1 / pp;
            if (std::abs(z - prev) <= 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        x[static_cast<std::size_t>(i)] = z;
        x[static_cast<std::size_t>(n - 1 - i)] = -z;
        w[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(n - 1 - i)] = 2.0 / (pp * pp);
    }

    GaussHermiteRule rule;
    double total = 0.0;
    for (int i = n - 1; i >= 0; --i) {
        rule.nodes.push_back(std::numbers::sqrt2 * x[static_cast<std::size_t>(i)]);
        rule.weights.push_back(w[static_cast<std::size_t>(i)] / std::sqrt(std::numbers::pi));
        total += rule.weights.back();
    }
    for (double& wk : rule.weights) wk /= total;
    return rule;
}

/// Raised when the stopping boundary leaves the lattice.
class OracleRangeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct OracleGrid {
    double y = 1.0;                   ///< capacity level (a parameter, not a state)
    MeanField drift;                  ///< on the coarse time grid
    int coarse_steps = 75;            ///< l1 of the grid `drift` lives on
    int nt = 300;
    int nx = 600;
    double half_width_sigmas = 6.0;   ///< lattice spans x̄(y) ± this many σ√T
    double margin_sigmas = 3.0;       ///< required gap between b̂ and the lattice edges
    int gh_order = 7;
};

struct OracleSolution {
    std::vector<double> t;         ///< nt + 1 nodes
    std::vector<double> x;         ///< nx + 1 nodes
    std::vector<double> u;         ///< row-major (nt + 1) x (nx + 1)
    std::vector<double> boundary;  ///< b̂(t_n)
    double x_bar = 0.0;
    double dx = 0.0;

    double value(int n, int k) const {
        return u[static_cast<std::size_t>(n) * x.size() + static_cast<std::size_t>(k)];
    }
};

namespace detail {

/// Linear interpolation on a uniform lattice, flat outside.
inline double lattice_interp(std::span<const double> v, double x0, double dx, double x) {
    const double p = (x - x0) / dx;
    const auto last = static_cast<double>(v.size() - 1);
    if (p <= 0.0) return v.front();
    if (p >= last) return v.back();
    const auto k = static_cast<std::size_t>(p);
    const double w = p - static_cast<double>(k);
    return (1.0 - w) * v[k] + w * v[k + 1];
}

}  // namespace detail

/// Backward induction for one y-slice. b̂(t) is the first lattice point
/// where the continuation value reaches c0, refined linearly between the
/// bracketing nodes; b̂(T) = x̄(y).
inline OracleSolution solve_os_backward(const OracleGrid& og, const ModelParams& params, const Payoff& payoff) {
    if (og.nt < 1 || og.nx < 2) throw ConfigError("oracle grid needs nt >= 1 and nx >= 2");
    if (og.drift.size() != static_cast<std::size_t>(og.coarse_steps + 1))
        throw ConfigError("oracle drift does not match coarse_steps");
    const double gp = payoff.g_prime(og.y);
    if (!(gp > 0.0)) throw ConfigError("oracle needs g'(y) > 0");

    OracleSolution sol;
    sol.x_bar = terminal_boundary(params, payoff, og.y);
    const double half = og.half_width_sigmas * params.sigma * std::sqrt(params.T);
    const double x0 = sol.x_bar - half;
    sol.dx = 2.0 * half / og.nx;
    const auto nxp = static_cast<std::size_t>(og.nx + 1);
    const auto ntp = static_cast<std::size_t>(og.nt + 1);
    sol.x.resize(nxp);
    for (std::size_t k = 0; k < nxp; ++k) sol.x[k] = x0 + static_cast<double>(k) * sol.dx;
    sol.t.resize(ntp);
    const double h = params.T / og.nt;
    for (std::size_t n = 0; n < ntp; ++n) sol.t[n] = n + 1 == ntp ? params.T : static_cast<double>(n) * h;
    sol.u.assign(ntp * nxp, params.c0);
    sol.boundary.assign(ntp, sol.x_bar);

    const GaussHermiteRule gh = gauss_hermite(og.gh_order);
    const double margin = og.margin_sigmas * params.sigma * std::sqrt(params.T);
    const double disc = std::exp(-params.r * h);
    const double vol = params.sigma * std::sqrt(h);
    std::vector<double> cont(nxp);

    for (int n = og.nt - 1; n >= 0; --n) {
        const std::int64_t num = static_cast<std::int64_t>(n) * og.coarse_steps;
        const double position = static_cast<double>(num / og.nt) +
                                static_cast<double>(num % og.nt) / static_cast<double>(og.nt);
        const double shift = og.drift.at_position(position) * h;
        const std::span<const double> next(sol.u.data() + static_cast<std::size_t>(n + 1) * nxp, nxp);
        double* now = sol.u.data() + static_cast<std::size_t>(n) * nxp;

        for (std::size_t k = 0; k < nxp; ++k) {
            double expectation = 0.0;
            for (std::size_t q = 0; q < gh.nodes.size(); ++q)
                expectation += gh.weights[q] * detail::lattice_interp(next, x0, sol.dx, sol.x[k] + shift + vol * gh.nodes[q]);
            cont[k] = std::exp(sol.x[k]) * gp * h + disc * expectation;
            now[k] = std::min(params.c0, cont[k]);
        }

        const auto it = std::find_if(cont.begin(), cont.end(), [&](double v) { return v >= params.c0; });
        if (it == cont.end())
            throw OracleRangeError("oracle: no stopping point on the lattice at t = " + std::to_string(sol.t[static_cast<std::size_t>(n)]) +
                                   "; enlarge half_width_sigmas");
        const auto k = static_cast<std::size_t>(it - cont.begin());
        if (k == 0)
            throw OracleRangeError("oracle: boundary at or below the lattice floor at t = " +
                                   std::to_string(sol.t[static_cast<std::size_t>(n)]) + "; enlarge half_width_sigmas");
        const double lo = cont[k - 1], hi = cont[k];
        const double bn = sol.x[k - 1] + (params.c0 - lo) / (hi - lo) * sol.dx;
        // flat extrapolation past the lattice edges acts like a stopping layer at the top
        if (bn > sol.x.back() - margin || bn < sol.x.front() + margin)
            throw OracleRangeError("oracle: boundary " + std::to_string(bn) + " at t = " +
                                   std::to_string(sol.t[static_cast<std::size_t>(n)]) +
                                   " is within the edge margin of the lattice; enlarge half_width_sigmas");
        sol.boundary[static_cast<std::size_t>(n)] = bn;
    }
    return sol;
}

/// Picard boundary along y, linear between capacity nodes.
inline std::vector<double> boundary_slice(const BoundarySurface& b, double y) {
    const Grid& grid = b.grid();
    if (!(y >= grid.y(0) && y <= 1.0)) throw ConfigError("slice level outside [y0, 1]");
    int j = std::min(static_cast<int>((y - grid.y(0)) / grid.dy()), grid.l2() - 1);
    const double w = std::clamp((y - grid.y(j)) / grid.dy(), 0.0, 1.0);
    std::vector<double> out(static_cast<std::size_t>(grid.nt()));
    for (int i = 0; i < grid.nt(); ++i)
        out[static_cast<std::size_t>(i)] = w == 1.0 ? b(i, j + 1) : (1.0 - w) * b(i, j) + w * b(i, j + 1);
    return out;
}

struct BoundaryComparison {
    double max_deviation = 0.0;
    int worst_index = -1;
    bool pass = false;
};

/// Sup-norm gap between a Picard slice on the coarse times and the oracle
/// curve (interpolated onto them), over t_0 .. t_{l1-2}.
inline BoundaryComparison compare_boundaries(std::span<const double> picard_slice, std::span<const double> coarse_t,
                                             std::span<const double> oracle_t, std::span<const double> oracle_b,
                                             double tol) {
    if (picard_slice.size() != coarse_t.size() || oracle_t.size() != oracle_b.size() || oracle_t.size() < 2)
        throw ConfigError("boundary comparison size mismatch");
    BoundaryComparison out;
    const std::size_t stop = coarse_t.size() >= 2 ? coarse_t.size() - 2 : 0;
    for (std::size_t i = 0; i < stop; ++i) {
        const double t = coarse_t[i];
        const auto it = std::upper_bound(oracle_t.begin(), oracle_t.end(), t);
        std::size_t hi = std::clamp<std::size_t>(static_cast<std::size_t>(it - oracle_t.begin()), 1, oracle_t.size() - 1);
        const std::size_t lo = hi - 1;
        const double w = (t - oracle_t[lo]) / (oracle_t[hi] - oracle_t[lo]);
        const double ob = (1.0 - w) * oracle_b[lo] + w * oracle_b[hi];
        const double dev = std::abs(picard_slice[i] - ob);
        if (dev > out.max_deviation || out.worst_index < 0) {
            out.max_deviation = dev;
            out.worst_index = static_cast<int>(i);
        }
    }
    out.pass = out.max_deviation <= tol;
    return out;
}

}  // namespace mfg
