// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <unistd.h>

#include "mfg/config.hpp"
#include "mfg/io.hpp"

using namespace mfg;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("mfg_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_file(const fs::path& path, const std::string& text) {
    std::ofstream(path) << text;
    return path;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Small problem so the emit tests run in about a second.
RunConfig small_config() {
    RunConfig c;
    c.grid.l1 = 20;
    c.grid.l2 = 10;
    c.grid.l3 = 12;
    c.n_max = 1;
    c.k_max = 3;
    c.mc_paths = 400;
    c.diag_paths = 8;
    c.diag_steps = 40;
    c.path_steps = 30;
    c.early_stop = false;
    return c;
}

std::map<std::string, std::string> hashes(const std::vector<ManifestEntry>& entries) {
    std::map<std::string, std::string> out;
    for (const auto& e : entries) out[e.path] = e.sha256;
    return out;
}

class ScopedEnv {
public:
    ScopedEnv(const char* name, const char* value) : name_(name) { ::setenv(name, value, 1); }
    ~ScopedEnv() { ::unsetenv(name_); }

private:
    const char* name_;
};

}  // namespace

TEST(Config, EmptyObjectGivesDefaults) {
    const fs::path file = write_file(scratch("empty") / "c.json", "{}");
    const RunConfig c = load_config(file);
    EXPECT_EQ(c.grid.l1, 75);
    EXPECT_EQ(c.grid.l2, 50);
    EXPECT_EQ(c.grid.l3, 25);
    EXPECT_EQ(c.grid.y0, 1e-3);
    EXPECT_EQ(c.grid.x_min, -5.0);
    EXPECT_EQ(c.grid.x_max, 0.5);
    EXPECT_EQ(c.model.r, 0.01);
    EXPECT_EQ(c.model.c0, 0.5);
    EXPECT_EQ(c.model.sigma, 1.0);
    EXPECT_EQ(c.model.T, 1.0);
    EXPECT_EQ(c.eta, 1e-3);
    EXPECT_EQ(c.k_max, 5);
    EXPECT_EQ(c.n_max, 5);
    EXPECT_EQ(c.mc_paths, 10000u);
    EXPECT_EQ(c.seed, 42u);
    EXPECT_EQ(c.diag_paths, 96u);
    EXPECT_EQ(c.diag_steps, 700);
    EXPECT_EQ(c.path_steps, 500);
}

TEST(Config, RejectsInvariantViolations) {
    EXPECT_THROW(config_from_json(json{{"eta", 0.0}}), ConfigError);
    EXPECT_THROW(config_from_json(json{{"k_max", 0}}), ConfigError);
    EXPECT_THROW(config_from_json(json{{"n_max", -1}}), ConfigError);
    EXPECT_THROW(config_from_json(json{{"mc_paths", 0}}), ConfigError);
    EXPECT_THROW(config_from_json(json{{"r", 0.0}}), ConfigError);
    EXPECT_THROW(config_from_json(json{{"quadrature", "simpson"}}), ConfigError);
    EXPECT_THROW(config_from_json(json{{"l1", "many"}}), ConfigError);
    EXPECT_THROW(config_from_json(json::array()), ConfigError);
    try {
        config_from_json(json{{"eta", -1.0}});
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("eta"), std::string::npos);
    }
}

TEST(Config, UnknownKeyListsValidKeys) {
    try {
        config_from_json(json{{"etta", 1e-3}});
        FAIL();
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("etta"), std::string::npos);
        for (const std::string& k : config_keys()) EXPECT_NE(msg.find(k), std::string::npos) << k;
    }
}

TEST(Config, MalformedFileNamesThePath) {
    const fs::path file = write_file(scratch("bad") / "c.json", "{ \"eta\": ");
    try {
        load_config(file);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find(file.string()), std::string::npos);
    }
    EXPECT_THROW(load_config(scratch("missing") / "nope.json"), ConfigError);
}

TEST(Config, RoundTripThroughEcho) {
    RunConfig c = small_config();
    c.eta = 0.1 + 0.2;
    c.seed = 18446744073709551557ULL;
    c.payoff = "power";
    c.payoff_exponent = 0.3;
    c.oracle_slices = {0.125, 0.75};
    const fs::path file = write_file(scratch("roundtrip") / "c.json", to_json(c).dump(2));
    const RunConfig back = load_config(file);
    EXPECT_EQ(to_json(back), to_json(c));
    EXPECT_EQ(back.eta, c.eta);
    EXPECT_EQ(back.seed, c.seed);
}

TEST(Config, FlagBeatsFileBeatsPreset) {
    const fs::path file = write_file(scratch("prec") / "c.json", R"({"eta": 0.002, "mc_paths": 77, "seed": 5})");
    CliOverrides o;
    o.preset = "paper";
    o.config_path = file;
    RunConfig c = resolve_config(o);
    EXPECT_EQ(c.eta, 0.002);
    EXPECT_EQ(c.mc_paths, 77u);
    EXPECT_EQ(c.seed, 5u);
    EXPECT_FALSE(c.early_stop);
    o.eta = 0.004;
    c = resolve_config(o);
    EXPECT_EQ(c.eta, 0.004);
    EXPECT_EQ(c.mc_paths, 77u);
    o.eta = 0.0;
    EXPECT_THROW(resolve_config(o), ConfigError);
}

TEST(Config, EnvironmentSeedSitsBetweenFileAndFlag) {
    const fs::path file = write_file(scratch("env") / "c.json", R"({"seed": 5})");
    ScopedEnv env("MFG_SEED", "1234");
    CliOverrides o;
    o.config_path = file;
    EXPECT_EQ(resolve_config(o).seed, 1234u);
    o.seed = 99;
    EXPECT_EQ(resolve_config(o).seed, 99u);
}

TEST(Config, EnvironmentSeedMustBeAnInteger) {
    ScopedEnv env("MFG_SEED", "12abc");
    RunConfig c;
    EXPECT_THROW(apply_environment(c), ConfigError);
}

TEST(Io, FloatsUseSeventeenDigits) {
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(format_double(-4.5), "-4.5");
    for (double v : {0.1, 1.0 / 3.0, -7.7123456789012345e-5, 6.02214076e23})
        EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
    CsvTable t({"a", "b"});
    t.row(3, 0.1);
    EXPECT_EQ(t.text(), "a,b\n3,0.10000000000000001\n");
}

TEST(Io, Sha256KnownVectors) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Io, WriteFailureNamesThePath) {
    const fs::path dir = scratch("blocked");
    write_file(dir / "file", "x");
    ArtifactWriter w(dir);
    try {
        w.write("file/inner.csv", "y");
        FAIL();
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("file"), std::string::npos);
    }
}

TEST(Emit, ZeroGameIterationsWritesOneBoundary) {
    RunConfig cfg = small_config();
    cfg.n_max = 0;
    const fs::path dir = scratch("n0");
    emit_artifacts(run_game(cfg), cfg, dir);
    int boundaries = 0;
    for (const auto& e : fs::directory_iterator(dir))
        boundaries += e.path().filename().string().rfind("boundary_n", 0) == 0 ? 1 : 0;
    EXPECT_EQ(boundaries, 1);
    EXPECT_TRUE(fs::exists(dir / "boundary_n0.csv"));
    EXPECT_EQ(slurp(dir / "game_error.csv"), "n,err\n");
}

TEST(Emit, ManifestListsEveryFileWithItsHash) {
    const RunConfig cfg = small_config();
    const fs::path dir = scratch("manifest");
    const auto entries = emit_artifacts(run_game(cfg), cfg, dir);
    const json manifest = json::parse(slurp(dir / "manifest.json"));
    ASSERT_EQ(manifest["files"].size(), entries.size());
    std::size_t on_disk = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir)) on_disk += e.is_regular_file() ? 1 : 0;
    EXPECT_EQ(on_disk, entries.size() + 1);
    for (const auto& f : manifest["files"]) {
        const std::string content = slurp(dir / f["path"].get<std::string>());
        EXPECT_EQ(sha256_hex(content), f["sha256"].get<std::string>());
        EXPECT_EQ(content.size(), f["bytes"].get<std::size_t>());
    }
    EXPECT_EQ(config_from_json(manifest["config"]).seed, cfg.seed);
    EXPECT_TRUE(manifest["seconds"].contains("picard"));
}

TEST(Emit, BoundaryCsvRoundTripsExactly) {
    const RunConfig cfg = small_config();
    const fs::path dir = scratch("csv");
    const GameResult r = run_game(cfg);
    emit_artifacts(r, cfg, dir);
    std::ifstream in(dir / "boundary_n1.csv");
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,y,b");
    const Grid& grid = r.state.b_current.grid();
    for (int i = 0; i < grid.nt(); ++i)
        for (int j = 0; j < grid.ny(); ++j) {
            ASSERT_TRUE(std::getline(in, line));
            double t = 0, y = 0, b = 0;
            ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &y, &b), 3);
            EXPECT_EQ(t, grid.t(i));
            EXPECT_EQ(y, grid.y(j));
            EXPECT_EQ(b, r.state.b_current(i, j));
        }
    EXPECT_FALSE(std::getline(in, line));
}

TEST(Emit, HashesDependOnSeedOnly) {
    RunConfig cfg = small_config();
    const auto base = hashes(emit_artifacts(run_game(cfg), cfg, scratch("h1")));
    const auto again = hashes(emit_artifacts(run_game(cfg), cfg, scratch("h2")));
    EXPECT_EQ(base, again);

    cfg.threads = 4;
    const auto threaded = hashes(emit_artifacts(run_game(cfg), cfg, scratch("h3")));
    EXPECT_EQ(base, threaded);

    cfg.threads = 1;
    cfg.seed = 43;
    const auto reseeded = hashes(emit_artifacts(run_game(cfg), cfg, scratch("h4")));
    EXPECT_NE(base.at("meanfield.csv"), reseeded.at("meanfield.csv"));
    EXPECT_NE(base.at("report.json"), reseeded.at("report.json"));
    EXPECT_EQ(base.at("boundary_n0.csv"), reseeded.at("boundary_n0.csv"));
}
