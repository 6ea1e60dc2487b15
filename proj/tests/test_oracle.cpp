// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "mfg/oracle.hpp"
#include "support.hpp"

using namespace mfg;

namespace {

OracleSolution solve_slice(double y, double m) {
    const Grid grid = test::default_grid();
    OracleGrid og;
    og.y = y;
    og.drift = MeanField::constant(grid, m);
    og.coarse_steps = grid.l1();
    return solve_os_backward(og, ModelParams{}, Payoff::square_root());
}

const OracleSolution& half_slice() {
    static const OracleSolution sol = solve_slice(0.5, 1.0);
    return sol;
}

}  // namespace

TEST(GaussHermite, WeightsSumToOne) {
    for (int order = 1; order <= 20; ++order) {
        const GaussHermiteRule r = gauss_hermite(order);
        ASSERT_EQ(r.nodes.size(), static_cast<std::size_t>(order));
        EXPECT_NEAR(std::accumulate(r.weights.begin(), r.weights.end(), 0.0), 1.0, 1e-14) << order;
    }
}

TEST(GaussHermite, LowOrderClosedForms) {
    const GaussHermiteRule one = gauss_hermite(1);
    EXPECT_NEAR(one.nodes[0], 0.0, 1e-15);
    EXPECT_EQ(one.weights[0], 1.0);
    const GaussHermiteRule three = gauss_hermite(3);
    EXPECT_NEAR(three.nodes[0], -std::sqrt(3.0), 1e-14);
    EXPECT_NEAR(three.nodes[1], 0.0, 1e-14);
    EXPECT_NEAR(three.nodes[2], std::sqrt(3.0), 1e-14);
    EXPECT_NEAR(three.weights[0], 1.0 / 6.0, 1e-14);
    EXPECT_NEAR(three.weights[1], 2.0 / 3.0, 1e-14);
}

TEST(GaussHermite, OrderSevenMatchesReference) {
    // probabilists' rule from an independent library implementation
    const double nodes[] = {-3.7504397177257425, -2.366759410734541, -1.1544053947399682, 0.0,
                            1.1544053947399682,  2.366759410734541,  3.7504397177257425};
    const double weights[] = {0.000548268855972217, 0.03075712396758652, 0.2401231786050127, 0.45714285714285724,
                              0.2401231786050127,   0.03075712396758652, 0.000548268855972217};
    const GaussHermiteRule r = gauss_hermite(7);
    for (int k = 0; k < 7; ++k) {
        EXPECT_NEAR(r.nodes[static_cast<std::size_t>(k)], nodes[k], 1e-13);
        EXPECT_NEAR(r.weights[static_cast<std::size_t>(k)], weights[k], 1e-14);
    }
}

TEST(GaussHermite, NormalMoments) {
    const GaussHermiteRule r = gauss_hermite(7);
    double m2 = 0.0, m4 = 0.0, m6 = 0.0;
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
        const double z2 = r.nodes[k] * r.nodes[k];
        m2 += r.weights[k] * z2;
        m4 += r.weights[k] * z2 * z2;
        m6 += r.weights[k] * z2 * z2 * z2;
    }
    EXPECT_NEAR(m2, 1.0, 1e-13);
    EXPECT_NEAR(m4, 3.0, 1e-12);
    EXPECT_NEAR(m6, 15.0, 1e-11);
}

TEST(OracleSolve, TerminalLayer) {
    const OracleSolution& s = half_slice();
    const std::size_t last = s.t.size() - 1;
    EXPECT_EQ(s.t[last], 1.0);
    for (std::size_t k = 0; k < s.x.size(); ++k) EXPECT_EQ(s.value(static_cast<int>(last), static_cast<int>(k)), 0.5);
    EXPECT_EQ(s.boundary[last], s.x_bar);
    EXPECT_NEAR(s.x_bar, terminal_boundary(ModelParams{}, Payoff::square_root(), 0.5), 1e-15);
    EXPECT_NEAR(s.dx, 0.02, 1e-15);
}

TEST(OracleSolve, ValueBoundsAndMonotonicity) {
    const OracleSolution& s = half_slice();
    const int nt = static_cast<int>(s.t.size());
    const int nx = static_cast<int>(s.x.size());
    for (int n = 0; n < nt; ++n)
        for (int k = 0; k < nx; ++k) {
            const double u = s.value(n, k);
            ASSERT_GE(u, 0.0);
            ASSERT_LE(u, 0.5);
            if (k > 0) {
                ASSERT_GE(u, s.value(n, k - 1)) << n << ' ' << k;
            }
            if (n + 1 < nt) {
                ASSERT_LE(u, s.value(n + 1, k)) << n << ' ' << k;
            }
        }
}

TEST(OracleSolve, BoundaryClass) {
    const OracleSolution& s = half_slice();
    // b̂(T) is set to x̄; the lattice boundary just before T sits within a fine step below it
    EXPECT_GE(s.boundary[s.boundary.size() - 2], s.x_bar - s.dx);
    for (std::size_t n = 0; n + 1 < s.boundary.size(); ++n) {
        EXPECT_GE(s.boundary[n], s.x_bar - s.dx);
        if (n > 0) {
            EXPECT_LE(s.boundary[n], s.boundary[n - 1] + 1e-12) << n;
        }
    }
}

TEST(OracleSolve, ZeroDriftBoundaryAboveUnitDrift) {
    const OracleSolution zero = solve_slice(0.5, 0.0);
    const OracleSolution& one = half_slice();
    for (std::size_t n = 0; n + 1 < one.boundary.size(); ++n) EXPECT_GE(zero.boundary[n], one.boundary[n] - 1e-12);
    EXPECT_GT(zero.boundary[0] - one.boundary[0], 0.1);
}

TEST(OracleSolve, BoundaryOutsideLatticeIsReported) {
    const Grid grid = test::default_grid();
    OracleGrid og;
    og.y = 0.5;
    og.drift = MeanField::constant(grid, 1.0);
    og.half_width_sigmas = 0.1;
    EXPECT_THROW(solve_os_backward(og, ModelParams{}, Payoff::square_root()), OracleRangeError);
}

TEST(OracleSolve, RejectsMismatchedDrift) {
    OracleGrid og;
    og.drift = MeanField::constant(test::default_grid(), 1.0);
    og.coarse_steps = 10;
    EXPECT_THROW(solve_os_backward(og, ModelParams{}, Payoff::square_root()), ConfigError);
}

TEST(CompareBoundaries, IdenticalAndOffsetCurves) {
    const std::vector<double> t{0.0, 0.25, 0.5, 0.75, 1.0};
    const std::vector<double> b{-3.0, -3.2, -3.5, -3.9, -4.6};
    EXPECT_EQ(compare_boundaries(b, t, t, b, 0.0).max_deviation, 0.0);
    std::vector<double> shifted = b;
    for (double& v : shifted) v += 0.125;
    const BoundaryComparison c = compare_boundaries(shifted, t, t, b, 0.2);
    EXPECT_EQ(c.max_deviation, 0.125);
    EXPECT_TRUE(c.pass);
    EXPECT_FALSE(compare_boundaries(shifted, t, t, b, 0.1).pass);
}

TEST(CompareBoundaries, ExcludesTheLastCoarseStep) {
    const std::vector<double> t{0.0, 0.25, 0.5, 0.75, 1.0};
    const std::vector<double> b{-3.0, -3.2, -3.5, -3.9, -4.6};
    std::vector<double> p = b;
    p[3] += 5.0;
    p[4] += 5.0;
    EXPECT_EQ(compare_boundaries(p, t, t, b, 1e-12).max_deviation, 0.0);
}

TEST(CompareBoundaries, InterpolatesOracleOntoCoarseTimes) {
    const std::vector<double> coarse{0.0, 0.5, 1.0};
    const std::vector<double> fine{0.0, 0.25, 0.5, 0.75, 1.0};
    const std::vector<double> line{1.0, 0.75, 0.5, 0.25, 0.0};
    const std::vector<double> picard{1.0, 0.5, 0.0};
    EXPECT_EQ(compare_boundaries(picard, coarse, fine, line, 0.0).max_deviation, 0.0);
}

TEST(OracleCheck, PresetSlicesWithinTwoFineSteps) {
    const GameResult& run = test::preset_run();
    const auto slices = oracle_check(run, test::preset_config());
    ASSERT_EQ(slices.size(), 3u);
    // regression values of the n = 0 problem
    const double pinned[] = {0.030901685765705622, 0.03128737401408088, 0.03129736794040738};
    for (std::size_t s = 0; s < slices.size(); ++s) {
        EXPECT_NEAR(slices[s].tolerance, 0.04, 1e-15);
        EXPECT_TRUE(slices[s].comparison.pass) << slices[s].y;
        EXPECT_NEAR(slices[s].comparison.max_deviation, pinned[s], 1e-9);
    }
}
