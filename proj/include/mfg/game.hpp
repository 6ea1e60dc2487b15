// SPDX-License-Identifier: MIT
/**
 * @file game.hpp
 * @brief Outer learning loop of the capacity-expansion mean-field game
 *
 * Game iteration n takes the previous mean field m^[n-1] (m^[-1] ≡ 1),
 * solves the boundary equation for b_n by Picard iteration (cold start
 * from x̄ at n = 0, warm start from b_{n-1} afterwards), inverts b_n to the
 * target capacity c_n and simulates reflected paths to get m^[n]. The loop
 * stops when ‖b_n - b_{n-1}‖₂ < η (if early stopping is on) or at n_max.
 */

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "mfg/diagnostics.hpp"
#include "mfg/meanfield.hpp"
#include "mfg/model.hpp"
#include "mfg/oracle.hpp"
#include "mfg/surface.hpp"
#include "mfg/volterra.hpp"

namespace mfg {

struct RunConfig {
    ModelParams model;
    GridSpec grid;
    double eta = 1e-3;
    int k_max = 5;
    int n_max = 5;
    std::size_t mc_paths = 10000;
    std::uint64_t seed = 42;
    std::string payoff = "sqrt";        ///< "sqrt" or "power"
    double payoff_exponent = 0.5;       ///< used by "power"
    std::string quadrature = "trapezoid";
    bool early_stop = true;
    bool isotonic_projection = false;
    bool dump_iterations = false;
    bool oracle_check = false;
    std::size_t diag_paths = 96;
    int diag_steps = 700;
    int path_steps = 500;
    double path_x0 = -5.0;
    double path_y0 = 0.2;
    unsigned threads = 1;
    std::string out_dir = "mfg_out";
    std::vector<double> oracle_slices{0.25, 0.5, 1.0};
    int oracle_nt = 300;
    int oracle_nx = 600;
    int oracle_gh_order = 7;

    void validate() const {
        model.validate();
        Grid(grid, model.T);
        if (!(eta > 0.0)) throw ConfigError("eta must be > 0");
        if (k_max < 1) throw ConfigError("k_max must be >= 1");
        if (n_max < 0) throw ConfigError("n_max must be >= 0");
        if (mc_paths < 1) throw ConfigError("mc_paths must be >= 1");
        if (diag_paths < 1) throw ConfigError("diag_paths must be >= 1");
        if (diag_steps < 1) throw ConfigError("diag_steps must be >= 1");
        if (path_steps < 1) throw ConfigError("path_steps must be >= 1");
        if (!(path_y0 >= 0.0 && path_y0 <= 1.0)) throw ConfigError("path_y0 must lie in [0, 1]");
        if (oracle_nt < 1 || oracle_nx < 2 || oracle_gh_order < 1)
            throw ConfigError("oracle_nt >= 1, oracle_nx >= 2 and oracle_gh_order >= 1 required");
        for (double y : oracle_slices)
            if (!(y >= grid.y0 && y <= 1.0)) throw ConfigError("oracle_slices must lie in [y0, 1]");
        if (!(model.r > 0.0)) throw ConfigError("r must be > 0 for the boundary equation");
        if (payoff != "sqrt" && payoff != "power") throw ConfigError("payoff must be \"sqrt\" or \"power\"");
        if (quadrature != "trapezoid" && quadrature != "rectangle")
            throw ConfigError("quadrature must be \"trapezoid\" or \"rectangle\"");
        make_payoff();
    }

    Payoff make_payoff() const {
        return payoff == "power" ? Payoff::power(payoff_exponent) : Payoff::square_root();
    }

    Quadrature quadrature_rule() const {
        return quadrature == "rectangle" ? Quadrature::rectangle : Quadrature::trapezoid;
    }

    SolverOptions solver_options() const {
        SolverOptions o;
        o.quadrature = quadrature_rule();
        o.threads = threads;
        return o;
    }

    /// Stream seed of the diagnostic batch, disjoint from the mean-field paths.
    std::uint64_t diagnostic_seed() const noexcept { return seed ^ 0x5DEECE66DULL; }
};

struct GameIteration {
    int n = 0;
    PicardResult picard;                 ///< iterates kept only with dump_iterations
    std::vector<double> dist_to_final;   ///< ‖b_n^(K) - b_n^(k)‖₂, k = 0..K
    InverseSurface c;
    MeanField m_driver;                  ///< m^[n-1]
    MeanFieldEstimate m_next;            ///< m^[n]
    double game_err = std::numeric_limits<double>::quiet_NaN();  ///< ‖b_n - b_{n-1}‖₂, NaN at n = 0
    std::vector<std::string> warnings;
};

struct GameState {
    int n = 0;
    BoundarySurface b_initial;   ///< x̄ surface, b_0^(0)
    BoundarySurface b_current;   ///< b* = b_N
    MeanField m_current;         ///< m^[N]
    MeanField m_dagger;          ///< m^[N-1], the driver of b*
    std::vector<GameIteration> history;
    bool converged = false;
    std::vector<std::string> warnings;
};

struct GameResult {
    GameState state;
    DiagnosticsReport report;
    std::vector<ControlledPath> diagnostic_paths;
    ControlledPath representative;
    InverseSurface c_star;
    std::map<std::string, double> seconds;  ///< wall-clock per stage
};

namespace detail {

class StageTimer {
public:
    StageTimer(std::map<std::string, double>& sink, std::string name)
        : sink_(sink), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
    ~StageTimer() {
        sink_[name_] += std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::map<std::string, double>& sink_;
    std::string name_;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

/// Runs the game iteration and the diagnostic suite on (b*, m†).
inline GameResult run_game(const RunConfig& cfg) {
    cfg.validate();
    const Grid grid(cfg.grid, cfg.model.T);
    const Payoff payoff = cfg.make_payoff();
    payoff.validate_on(grid.y_nodes());
    SolverOptions solver = cfg.solver_options();
    solver.keep_iterates = true;

    GameResult result;
    GameState& st = result.state;
    st.b_initial = BoundarySurface::terminal(grid, cfg.model, payoff);
    MeanField m_prev = MeanField::constant(grid, 1.0);
    BoundarySurface b_prev = st.b_initial;

    for (int n = 0; n <= cfg.n_max; ++n) {
        GameIteration it;
        it.n = n;
        it.m_driver = m_prev;
        {
            detail::StageTimer timer(result.seconds, "picard");
            BoundarySurface init = b_prev;
            init.game_index = n;
            init.picard_index = 0;
            it.picard = solve_picard(init, m_prev, cfg.model, payoff, cfg.eta, cfg.k_max, cfg.early_stop, solver);
        }
        if (cfg.isotonic_projection) isotonic_projection(it.picard.surface);
        for (const auto& iterate : it.picard.iterates)
            it.dist_to_final.push_back(frobenius_distance(it.picard.surface, iterate));
        if (!cfg.dump_iterations) it.picard.iterates.clear();
        if (it.picard.degenerate)
            it.warnings.push_back("game iteration " + std::to_string(n) + ": A <= 0 clamped at " +
                                  std::to_string(it.picard.clamped_nodes) + " node updates");
        if (n > 0) it.game_err = frobenius_distance(it.picard.surface, b_prev);

        {
            detail::StageTimer timer(result.seconds, "inversion");
            InversionResult inv = invert_boundary(it.picard.surface);
            it.c = std::move(inv.surface);
            it.warnings.insert(it.warnings.end(), inv.warnings.begin(), inv.warnings.end());
        }
        {
            detail::StageTimer timer(result.seconds, "monte_carlo");
            it.m_next = estimate_mean_field(it.c, m_prev, cfg.model, cfg.mc_paths, cfg.seed, cfg.threads);
        }

        st.warnings.insert(st.warnings.end(), it.warnings.begin(), it.warnings.end());
        b_prev = it.picard.surface;
        m_prev = it.m_next.m;
        const bool stop = n >= 1 && it.game_err < cfg.eta;
        st.history.push_back(std::move(it));
        if (stop) {
            st.converged = true;
            if (cfg.early_stop) break;
        }
    }

    const GameIteration& last = st.history.back();
    st.n = last.n;
    st.b_current = last.picard.surface;
    st.m_current = last.m_next.m;
    st.m_dagger = last.m_driver;
    st.converged = last.n >= 1 && last.game_err < cfg.eta;
    if (!st.converged)
        st.warnings.push_back("game iteration reached n_max = " + std::to_string(cfg.n_max) +
                              " without ‖b_n - b_{n-1}‖₂ < eta");
    result.c_star = last.c;

    detail::StageTimer timer(result.seconds, "diagnostics");
    DiagnosticsReport& rep = result.report;
    rep.residual = residual(st.b_current, st.m_dagger, cfg.model, payoff, cfg.solver_options());
    result.diagnostic_paths = simulate_batch(result.c_star, st.m_dagger, cfg.model, cfg.diag_paths, cfg.diag_steps,
                                             cfg.diagnostic_seed(), cfg.threads);
    rep.skorokhod = skorokhod_check(result.diagnostic_paths);
    rep.monotonicity = monotonicity_audit(st.b_current);
    const double offsets[] = {grid.dx()};
    rep.smooth_fit = smooth_fit_probe(st.b_current, st.m_dagger, cfg.model, payoff, offsets, cfg.quadrature_rule());

    PathRng rng(cfg.diagnostic_seed(), cfg.diag_paths);
    result.representative =
        simulate_path(result.c_star, st.m_dagger, cfg.model, cfg.path_x0, cfg.path_y0, cfg.path_steps, rng);
    return result;
}

struct OracleSlice {
    double y = 0.0;
    OracleSolution solution;
    std::vector<double> picard;  ///< b_0 along the slice on the coarse times
    BoundaryComparison comparison;
    double tolerance = 0.0;
};

/// Cross-checks the n = 0 boundary (driven by m ≡ 1) against the backward
/// DP oracle on each configured y-slice. Tolerance is two fine x-steps.
inline std::vector<OracleSlice> oracle_check(const GameResult& result, const RunConfig& cfg) {
    const GameIteration& first = result.state.history.front();
    const BoundarySurface& b0 = first.picard.surface;
    const Grid& grid = b0.grid();
    const Payoff payoff = cfg.make_payoff();
    std::vector<OracleSlice> out(cfg.oracle_slices.size());
    parallel_for(out.size(), cfg.threads, [&](std::size_t s) {
        OracleSlice& slice = out[s];
        slice.y = cfg.oracle_slices[s];
        OracleGrid og;
        og.y = slice.y;
        og.drift = first.m_driver;
        og.coarse_steps = grid.l1();
        og.nt = cfg.oracle_nt;
        og.nx = cfg.oracle_nx;
        og.gh_order = cfg.oracle_gh_order;
        slice.solution = solve_os_backward(og, cfg.model, payoff);
        slice.picard = boundary_slice(b0, slice.y);
        slice.tolerance = 2.0 * slice.solution.dx;
        slice.comparison = compare_boundaries(slice.picard, grid.t_nodes(), slice.solution.t,
                                              slice.solution.boundary, slice.tolerance);
    });
    return out;
}

}  // namespace mfg
