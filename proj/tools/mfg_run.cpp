// SPDX-License-Identifier: MIT
// mfg_run: solve the capacity-expansion mean-field game and write artifacts.
//
// Exit status: 0 all gates pass, 1 a diagnostic gate failed, 2 bad config or
// a stage error (the stage is named on stderr).

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mfg/config.hpp"
#include "mfg/game.hpp"
#include "mfg/io.hpp"

namespace {

struct Gate {
    const char* name;
    double value;
    double published;
    const char* bound;
    bool pass;
};

void print_table(const mfg::GameResult& r, const std::vector<mfg::OracleSlice>* oracle, bool& all_pass) {
    const auto& res = r.report.residual;
    const auto& sk = r.report.skorokhod;
    const Gate gates[] = {
        {"||R||_inf", res.norm_inf, 2.69e-4, "<= 1e-3", res.norm_inf <= 1e-3},
        {"||R||_2", res.norm_2, 8.82e-5, "<= 5e-4", res.norm_2 <= 5e-4},
        {"max_active |G|", sk.max_abs_G_active, 1e-9, "<= 1e-8", sk.max_abs_G_active <= 1e-8},
        {"min G", sk.min_G, 1e-12, ">= -1e-10", sk.min_G >= -1e-10},
    };
    std::printf("%-18s %-14s %-10s %-10s %s\n", "diagnostic", "computed", "published", "bound", "status");
    for (const Gate& g : gates) {
        std::printf("%-18s %-14.4e %-10.2e %-10s %s\n", g.name, g.value, g.published, g.bound, g.pass ? "PASS" : "FAIL");
        all_pass = all_pass && g.pass;
    }
    if (sk.empty_active_set) std::printf("note: active set is empty, max_active |G| reported as 0\n");
    if (oracle != nullptr)
        for (const auto& s : *oracle) {
            char name[32];
            std::snprintf(name, sizeof name, "oracle y=%g", s.y);
            std::printf("%-18s %-14.4e %-10s <= %-7.4f %s\n", name, s.comparison.max_deviation, "-", s.tolerance,
                        s.comparison.pass ? "PASS" : "FAIL");
            all_pass = all_pass && s.comparison.pass;
        }
}

void print_convergence(const mfg::GameResult& r, double eta) {
    std::printf("\n%-3s %-7s %-14s %-14s %s\n", "n", "picard", "final err", "game err", "||b^(K)-b^(K-1)|| < eta");
    for (const auto& it : r.state.history) {
        const double last = it.picard.errors.empty() ? 0.0 : it.picard.errors.back();
        std::printf("%-3d %-7d %-14.4e %-14.4e %s\n", it.n, it.picard.iterations(), last, it.game_err,
                    last < eta ? "yes" : "no");
    }
    std::printf("\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mean-field game of finite-fuel capacity expansion"};
    mfg::CliOverrides o;
    std::string config_path;
    bool quiet = false;

    app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--out", o.out_dir, "output directory");
    app.add_option("--seed", o.seed, "64-bit Monte Carlo seed (overrides MFG_SEED)");
    app.add_option("--mc-paths", o.mc_paths, "paths per mean-field update");
    app.add_option("--eta", o.eta, "Picard and game tolerance");
    app.add_option("--preset", o.preset, "named preset")->check(CLI::IsMember({"paper"}));
    app.add_flag("--oracle-check", o.oracle_check, "cross-check b_0 against the backward DP oracle");
    app.add_flag("--dump-iterations", o.dump_iterations, "write every Picard iterate");
    app.add_flag("--isotonic-projection", o.isotonic_projection, "project each boundary onto monotone surfaces");
    app.add_option("--diag-paths", o.diag_paths, "paths in the Skorokhod diagnostic batch");
    app.add_option("--diag-steps", o.diag_steps, "time steps of the diagnostic batch");
    app.add_option("--threads", o.threads, "worker threads");
    app.add_flag("--quiet", quiet, "suppress the summary table");
    CLI11_PARSE(app, argc, argv);
    o.config_path = config_path;

    const char* stage = "config";
    try {
        const mfg::RunConfig cfg = mfg::resolve_config(o);

        stage = "game";
        const mfg::GameResult result = mfg::run_game(cfg);

        std::optional<std::vector<mfg::OracleSlice>> oracle;
        if (cfg.oracle_check) {
            stage = "oracle";
            oracle = mfg::oracle_check(result, cfg);
        }

        stage = "emit";
        const auto files = mfg::emit_artifacts(result, cfg, cfg.out_dir, oracle ? &*oracle : nullptr);

        bool pass = true;
        if (!quiet) {
            print_convergence(result, cfg.eta);
            for (const auto& w : result.state.warnings) std::printf("warning: %s\n", w.c_str());
        }
        print_table(result, oracle ? &*oracle : nullptr, pass);
        if (!quiet) std::printf("\n%zu files written to %s\n", files.size() + 1, cfg.out_dir.c_str());
        return pass ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "mfg_run: %s stage failed: %s\n", stage, e.what());
        return 2;
    }
}
