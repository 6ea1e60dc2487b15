// SPDX-License-Identifier: MIT
#pragma once

#include "mfg/config.hpp"
#include "mfg/game.hpp"

namespace mfg::test {

inline const RunConfig& preset_config() {
    static const RunConfig cfg = paper_preset();
    return cfg;
}

inline Grid default_grid() { return Grid(GridSpec{}, 1.0); }

/// One shared run of the published experiment, computed on first use.
inline const GameResult& preset_run() {
    static const GameResult result = run_game(preset_config());
    return result;
}

/// n = 0 boundary from the cold start with m ≡ 1, 5 Picard updates.
inline const PicardResult& cold_start_picard() {
    static const PicardResult result = [] {
        const Grid grid = default_grid();
        const ModelParams params;
        const Payoff payoff = Payoff::square_root();
        SolverOptions opt;
        opt.keep_iterates = true;
        return solve_picard(BoundarySurface::terminal(grid, params, payoff), MeanField::constant(grid, 1.0), params,
                            payoff, 1e-3, 5, false, opt);
    }();
    return result;
}

}  // namespace mfg::test
