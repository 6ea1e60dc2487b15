// SPDX-License-Identifier: MIT
/**
 * @file config.hpp
 * @brief JSON ingestion and echo of RunConfig
 *
 * Precedence, lowest first: built-in defaults, config file, MFG_SEED
 * environment variable, command-line flags (applied by the caller).
 */

#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfg/game.hpp"

namespace mfg {

using json = nlohmann::json;

inline json to_json(const RunConfig& c) {
    return json{
        {"r", c.model.r},
        {"c0", c.model.c0},
        {"sigma", c.model.sigma},
        {"T", c.model.T},
        {"l1", c.grid.l1},
        {"l2", c.grid.l2},
        {"l3", c.grid.l3},
        {"y0", c.grid.y0},
        {"x_min", c.grid.x_min},
        {"x_max", c.grid.x_max},
        {"eta", c.eta},
        {"k_max", c.k_max},
        {"n_max", c.n_max},
        {"mc_paths", c.mc_paths},
        {"seed", c.seed},
        {"payoff", c.payoff},
        {"payoff_exponent", c.payoff_exponent},
        {"quadrature", c.quadrature},
        {"early_stop", c.early_stop},
        {"isotonic_projection", c.isotonic_projection},
        {"dump_iterations", c.dump_iterations},
        {"oracle_check", c.oracle_check},
        {"diag_paths", c.diag_paths},
        {"diag_steps", c.diag_steps},
        {"path_steps", c.path_steps},
        {"path_x0", c.path_x0},
        {"path_y0", c.path_y0},
        {"threads", c.threads},
        {"out_dir", c.out_dir},
        {"oracle_slices", c.oracle_slices},
        {"oracle_nt", c.oracle_nt},
        {"oracle_nx", c.oracle_nx},
        {"oracle_gh_order", c.oracle_gh_order},
    };
}

inline std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    const json defaults = to_json(RunConfig{});
    for (const auto& item : defaults.items()) keys.push_back(item.key());
    return keys;
}

namespace detail {

template <class T>
void read_key(const json& j, const char* key, T& out) {
    const auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key \"") + key + "\": " + e.what());
    }
}

}  // namespace detail

/// Overlays the keys present in `j` on `base`. Unknown keys are rejected
/// with the list of valid ones; the result is validated.
inline RunConfig config_from_json(const json& j, RunConfig base = {}) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    const auto keys = config_keys();
    for (const auto& item : j.items()) {
        if (std::find(keys.begin(), keys.end(), item.key()) != keys.end()) continue;
        std::string valid;
        for (const auto& k : keys) valid += (valid.empty() ? "" : ", ") + k;
        throw ConfigError("unknown config key \"" + item.key() + "\"; valid keys: " + valid);
    }
    RunConfig& c = base;
    detail::read_key(j, "r", c.model.r);
    detail::read_key(j, "c0", c.model.c0);
    detail::read_key(j, "sigma", c.model.sigma);
    detail::read_key(j, "T", c.model.T);
    detail::read_key(j, "l1", c.grid.l1);
    detail::read_key(j, "l2", c.grid.l2);
    detail::read_key(j, "l3", c.grid.l3);
    detail::read_key(j, "y0", c.grid.y0);
    detail::read_key(j, "x_min", c.grid.x_min);
    detail::read_key(j, "x_max", c.grid.x_max);
    detail::read_key(j, "eta", c.eta);
    detail::read_key(j, "k_max", c.k_max);
    detail::read_key(j, "n_max", c.n_max);
    detail::read_key(j, "mc_paths", c.mc_paths);
    detail::read_key(j, "seed", c.seed);
    detail::read_key(j, "payoff", c.payoff);
    detail::read_key(j, "payoff_exponent", c.payoff_exponent);
    detail::read_key(j, "quadrature", c.quadrature);
    detail::read_key(j, "early_stop", c.early_stop);
    detail::read_key(j, "isotonic_projection", c.isotonic_projection);
    detail::read_key(j, "dump_iterations", c.dump_iterations);
    detail::read_key(j, "oracle_check", c.oracle_check);
    detail::read_key(j, "diag_paths", c.diag_paths);
    detail::read_key(j, "diag_steps", c.diag_steps);
    detail::read_key(j, "path_steps", c.path_steps);
    detail::read_key(j, "path_x0", c.path_x0);
    detail::read_key(j, "path_y0", c.path_y0);
    detail::read_key(j, "threads", c.threads);
    detail::read_key(j, "out_dir", c.out_dir);
    detail::read_key(j, "oracle_slices", c.oracle_slices);
    detail::read_key(j, "oracle_nt", c.oracle_nt);
    detail::read_key(j, "oracle_nx", c.oracle_nx);
    detail::read_key(j, "oracle_gh_order", c.oracle_gh_order);
    c.validate();
    return c;
}

/// Reads a JSON config file over `base`; an empty object gives `base`.
inline RunConfig load_config(const std::filesystem::path& path, const RunConfig& base = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path.string() + ": " + e.what());
    }
    return config_from_json(j, base);
}

/// Applies MFG_SEED if set. Flags are applied after this by the caller.
inline void apply_environment(RunConfig& c, const char* name = "MFG_SEED") {
    const char* value = std::getenv(name);
    if (value == nullptr || *value == '\0') return;
    try {
        std::size_t used = 0;
        const unsigned long long seed = std::stoull(value, &used, 10);
        if (used != std::string(value).size()) throw std::invalid_argument("trailing characters");
        c.seed = seed;
    } catch (const std::exception&) {
        throw ConfigError(std::string(name) + " is not an unsigned 64-bit integer: " + value);
    }
}

/// Settings of the published experiment: default grid, fixed 5 x 5 iterations.
inline RunConfig paper_preset() {
    RunConfig c;
    c.early_stop = false;
    return c;
}

/// Command-line values; unset options leave the lower layers alone.
struct CliOverrides {
    std::string preset;
    std::filesystem::path config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> mc_paths, diag_paths;
    std::optional<double> eta;
    std::optional<int> diag_steps;
    std::optional<unsigned> threads;
    std::optional<std::string> out_dir;
    bool oracle_check = false;
    bool dump_iterations = false;
    bool isotonic_projection = false;
};

/// preset or defaults, then the config file, then MFG_SEED, then flags.
inline RunConfig resolve_config(const CliOverrides& o) {
    if (!o.preset.empty() && o.preset != "paper") throw ConfigError("unknown preset \"" + o.preset + "\"");
    RunConfig cfg = o.preset == "paper" ? paper_preset() : RunConfig{};
    if (!o.config_path.empty()) cfg = load_config(o.config_path, cfg);
    apply_environment(cfg);
    if (o.seed) cfg.seed = *o.seed;
    if (o.mc_paths) cfg.mc_paths = *o.mc_paths;
    if (o.eta) cfg.eta = *o.eta;
    if (o.diag_paths) cfg.diag_paths = *o.diag_paths;
    if (o.diag_steps) cfg.diag_steps = *o.diag_steps;
    if (o.threads) cfg.threads = *o.threads;
    if (o.out_dir) cfg.out_dir = *o.out_dir;
    cfg.oracle_check = cfg.oracle_check || o.oracle_check;
    cfg.dump_iterations = cfg.dump_iterations || o.dump_iterations;
    cfg.isotonic_projection = cfg.isotonic_projection || o.isotonic_projection;
    cfg.validate();
    return cfg;
}

}  // namespace mfg
