// SPDX-License-Identifier: MIT
/**
 * @file io.hpp
 * @brief CSV / JSON artifact emission and the hashed file manifest
 *
 * Every float is written with 17 significant digits. report.json holds only
 * seed-determined content (thread count and output path are left out of its
 * config echo), so reruns with the same seed hash identically whatever the
 * parallelism. Timings and the full config go to manifest.json.
 * Link mfg::io (OpenSSL).
 */

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "mfg/config.hpp"
#include "mfg/game.hpp"

namespace mfg {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// 17 significant digits, enough to round-trip any double.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Lower-case hex SHA-256 of a byte string.
inline std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw IoError("SHA-256 computation failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

/// Accumulates a CSV in memory. Cells are doubles or integers.
class CsvTable {
public:
    explicit CsvTable(std::initializer_list<const char*> header) {
        bool first = true;
        for (const char* h : header) {
            if (!first) text_ += ',';
            text_ += h;
            first = false;
            ++columns_;
        }
        text_ += '\n';
    }

    template <class... Cells>
    void row(const Cells&... cells) {
        static_assert(sizeof...(Cells) > 0);
        bool first = true;
        ((append(cells, first)), ...);
        text_ += '\n';
    }

    const std::string& text() const noexcept { return text_; }
    std::size_t columns() const noexcept { return columns_; }

private:
    template <class T>
    void append(const T& v, bool& first) {
        if (!first) text_ += ',';
        first = false;
        if constexpr (std::is_floating_point_v<T>)
            text_ += format_double(static_cast<double>(v));
        else
            text_ += std::to_string(v);
    }

    std::string text_;
    std::size_t columns_ = 0;
};

struct ManifestEntry {
    std::string path;  ///< relative to the output directory
    std::string sha256;
    std::size_t bytes = 0;
};

/// Writes files under one root and records their hashes.
class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path root) : root_(std::move(root)) {
        std::error_code ec;
        std::filesystem::create_directories(root_, ec);
        if (ec) throw IoError("cannot create output directory " + root_.string() + ": " + ec.message());
    }

    void write(const std::string& relative, const std::string& content) {
        const std::filesystem::path path = root_ / relative;
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + path.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.close();
        if (!out) throw IoError("write failed for " + path.string());
        entries_.push_back({relative, sha256_hex(content), content.size()});
    }

    void write(const std::string& relative, const CsvTable& table) { write(relative, table.text()); }

    const std::vector<ManifestEntry>& entries() const noexcept { return entries_; }
    const std::filesystem::path& root() const noexcept { return root_; }

private:
    std::filesystem::path root_;
    std::vector<ManifestEntry> entries_;
};

inline CsvTable boundary_table(const BoundarySurface& b) {
    const Grid& grid = b.grid();
    CsvTable t({"t", "y", "b"});
    for (int i = 0; i < grid.nt(); ++i)
        for (int j = 0; j < grid.ny(); ++j) t.row(grid.t(i), grid.y(j), b(i, j));
    return t;
}

inline CsvTable inverse_table(const InverseSurface& c) {
    const Grid& grid = c.grid();
    CsvTable t({"t", "x", "c"});
    for (int i = 0; i < grid.nt(); ++i)
        for (int k = 0; k < grid.nx(); ++k) t.row(grid.t(i), grid.x(k), c(i, k));
    return t;
}

inline CsvTable path_table(const ControlledPath& p) {
    CsvTable t({"step", "t", "X", "Y", "xi", "c_along"});
    for (std::size_t s = 0; s < p.size(); ++s) t.row(s, p.t[s], p.X[s], p.Y[s], p.xi[s], p.c_along[s]);
    return t;
}

/// Seed-determined summary: game history, diagnostics and oracle results.
inline json report_json(const GameResult& result, const RunConfig& cfg, const std::vector<OracleSlice>* oracle) {
    const GameState& st = result.state;
    const DiagnosticsReport& rep = result.report;
    json history = json::array();
    for (const GameIteration& it : st.history) {
        json h{{"n", it.n},
               {"picard_errors", it.picard.errors},
               {"picard_iterations", it.picard.iterations()},
               {"picard_converged", it.picard.converged},
               {"min_A", it.picard.min_A},
               {"clamped_nodes", it.picard.clamped_nodes},
               {"distance_to_final", it.dist_to_final}};
        h["game_err"] = std::isnan(it.game_err) ? json(nullptr) : json(it.game_err);
        history.push_back(std::move(h));
    }
    json echo = to_json(cfg);
    echo.erase("threads");  // execution settings do not change results
    echo.erase("out_dir");
    json report{
        {"config", echo},
        {"seed", cfg.seed},
        {"game_iterations", st.n},
        {"converged", st.converged},
        {"history", history},
        {"residual",
         {{"norm_inf", rep.residual.norm_inf},
          {"norm_2", rep.residual.norm_2},
          {"min_A", rep.residual.min_A},
          {"clamped_nodes", rep.residual.clamped_nodes}}},
        {"skorokhod",
         {{"max_abs_G_active", rep.skorokhod.max_abs_G_active},
          {"min_G", rep.skorokhod.min_G},
          {"n_active", rep.skorokhod.n_active},
          {"n_steps", rep.skorokhod.n_steps},
          {"empty_active_set", rep.skorokhod.empty_active_set},
          {"feasible", rep.skorokhod.feasible},
          {"complementary", rep.skorokhod.complementary}}},
        {"monotonicity",
         {{"max_t_violation", rep.monotonicity.max_t_violation},
          {"max_y_violation", rep.monotonicity.max_y_violation}}},
        {"smooth_fit",
         {{"max_value_gap", rep.smooth_fit.max_value_gap},
          {"max_slope_below", rep.smooth_fit.max_slope_below},
          {"max_u", rep.smooth_fit.max_u},
          {"min_u", rep.smooth_fit.min_u}}},
        {"warnings", st.warnings},
    };
    if (oracle != nullptr) {
        json slices = json::array();
        for (const OracleSlice& s : *oracle)
            slices.push_back({{"y", s.y},
                              {"max_deviation", s.comparison.max_deviation},
                              {"worst_index", s.comparison.worst_index},
                              {"tolerance", s.tolerance},
                              {"pass", s.comparison.pass}});
        report["oracle"] = slices;
    }
    return report;
}

inline std::string oracle_file_name(double y) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "oracle_y%g.csv", y);
    return buf;
}

/// Writes every artifact plus manifest.json and returns the manifest
/// entries (manifest.json itself excluded).
inline std::vector<ManifestEntry> emit_artifacts(const GameResult& result, const RunConfig& cfg,
                                                 const std::filesystem::path& dir,
                                                 const std::vector<OracleSlice>* oracle = nullptr) {
    ArtifactWriter w(dir);
    const GameState& st = result.state;
    const Grid& grid = st.b_current.grid();

    w.write("boundary_initial.csv", boundary_table(st.b_initial));
    CsvTable meanfield({"n", "t", "m"});
    CsvTable meanfield_se({"n", "t", "se"});
    CsvTable convergence({"n", "k", "err"});
    CsvTable picard_distance({"n", "k", "dist"});
    CsvTable game_error({"n", "err"});
    CsvTable summary({"n", "picard_iters_used", "picard_final_err", "game_err"});

    for (const GameIteration& it : st.history) {
        const std::string n = std::to_string(it.n);
        w.write("boundary_n" + n + ".csv", boundary_table(it.picard.surface));
        w.write("inverse_n" + n + ".csv", inverse_table(it.c));
        for (int i = 0; i < grid.nt(); ++i) {
            meanfield.row(it.n, grid.t(i), it.m_next.m[static_cast<std::size_t>(i)]);
            meanfield_se.row(it.n, grid.t(i), it.m_next.std_error[static_cast<std::size_t>(i)]);
        }
        for (std::size_t k = 0; k < it.picard.errors.size(); ++k)
            convergence.row(it.n, k + 1, it.picard.errors[k]);
        for (std::size_t k = 0; k < it.dist_to_final.size(); ++k)
            picard_distance.row(it.n, k, it.dist_to_final[k]);
        if (it.n > 0) game_error.row(it.n, it.game_err);
        const double final_err = it.picard.errors.empty() ? 0.0 : it.picard.errors.back();
        summary.row(it.n, it.picard.iterations(), final_err,
                    std::isnan(it.game_err) ? std::numeric_limits<double>::quiet_NaN() : it.game_err);
        if (cfg.dump_iterations)
            for (const BoundarySurface& b : it.picard.iterates)
                w.write("iterations/boundary_n" + n + "_k" + std::to_string(b.picard_index) + ".csv",
                        boundary_table(b));
    }
    w.write("meanfield.csv", meanfield);
    w.write("meanfield_se.csv", meanfield_se);
    w.write("convergence.csv", convergence);
    w.write("picard_distance.csv", picard_distance);
    w.write("game_error.csv", game_error);
    w.write("game_summary.csv", summary);

    const ResidualReport& res = result.report.residual;
    CsvTable residual({"t", "y", "R"});
    for (int i = 0; i < res.rows; ++i)
        for (int j = 0; j < res.cols; ++j) residual.row(grid.t(i), grid.y(j), res(i, j));
    w.write("residual.csv", residual);

    CsvTable active({"path", "step", "t", "G", "abs_G"});
    for (const ActivePoint& a : result.report.skorokhod.active) active.row(a.path, a.step, a.t, a.G, std::abs(a.G));
    w.write("active_set.csv", active);

    w.write("paths/representative.csv", path_table(result.representative));

    if (oracle != nullptr)
        for (const OracleSlice& s : *oracle) {
            CsvTable t({"t", "b_hat"});
            for (std::size_t n = 0; n < s.solution.t.size(); ++n) t.row(s.solution.t[n], s.solution.boundary[n]);
            w.write(oracle_file_name(s.y), t);
        }

    w.write("report.json", report_json(result, cfg, oracle).dump(2) + "\n");

    json files = json::array();
    for (const ManifestEntry& e : w.entries())
        files.push_back({{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
    const json manifest{{"config", to_json(cfg)}, {"seed", cfg.seed}, {"seconds", result.seconds}, {"files", files}};
    const std::vector<ManifestEntry> entries = w.entries();
    w.write("manifest.json", manifest.dump(2) + "\n");
    return entries;
}

}  // namespace mfg
