// SPDX-License-Identifier: MIT
/**
 * @file model.hpp
 * @brief Model parameters, payoff, discretisation grid and terminal boundary
 *
 * The running profit is f(x, y) = e^x g(y), so the marginal profit of
 * capacity is d/dy f = e^x g'(y). Every kernel downstream only needs g',
 * which is why the payoff carries it explicitly.
 */

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mfg {

/// Raised for any invalid configuration value.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ModelParams {
    double r = 0.01;     ///< discount rate
    double c0 = 0.5;     ///< unit investment cost
    double sigma = 1.0;  ///< volatility of the log-price
    double T = 1.0;      ///< horizon

    void validate() const {
        if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("r must be finite and >= 0");
        if (!(c0 > 0.0) || !std::isfinite(c0)) throw ConfigError("c0 must be finite and > 0");
        if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be finite and > 0");
        if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("T must be finite and > 0");
    }
};

/// Capacity payoff g and its derivative g'. f(x, y) = e^x g(y).
struct Payoff {
    std::string name;
    std::function<double(double)> g;
    std::function<double(double)> g_prime;

    static Payoff square_root() {
        return {"sqrt",
                [](double y) { return std::sqrt(y); },
                [](double y) { return 0.5 / std::sqrt(y); }};
    }

    /// g(y) = y^a with 0 < a < 1.
    static Payoff power(double a) {
        if (!(a > 0.0 && a < 1.0)) throw ConfigError("payoff exponent must lie in (0, 1)");
        return {"power",
                [a](double y) { return std::pow(y, a); },
                [a](double y) { return a * std::pow(y, a - 1.0); }};
    }

    /// g' > 0 and strictly decreasing on the sampled levels.
    void validate_on(std::span<const double> ys) const {
        if (!g_prime) throw ConfigError("payoff has no derivative");
        double prev = std::numeric_limits<double>::infinity();
        for (double y : ys) {
            const double d = g_prime(y);
            if (!(d > 0.0) || !std::isfinite(d))
                throw ConfigError("payoff derivative must be positive and finite at y = " +
                                  std::to_string(y));
            if (!(d < prev))
                throw ConfigError("payoff derivative must be strictly decreasing (concave g) at y = " +
                                  std::to_string(y));
            prev = d;
        }
    }
};

/// Standard normal CDF. Total on the extended reals.
inline double normal_cdf(double z) noexcept {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

struct GridSpec {
    int l1 = 75;          ///< time steps
    int l2 = 50;          ///< capacity steps
    int l3 = 25;          ///< log-price steps
    double y0 = 1e-3;     ///< lower capacity cut-off
    double x_min = -5.0;
    double x_max = 0.5;
};

/// Uniform partitions of [0,T] x [y0,1] x [x_min,x_max].
/// Endpoint nodes are reproduced exactly.
class Grid {
public:
    Grid() : Grid(GridSpec{}, 1.0) {}

    Grid(const GridSpec& spec, double T) : spec_(spec), T_(T) {
        if (spec.l1 < 1 || spec.l2 < 1 || spec.l3 < 1)
            throw ConfigError("grid partition counts l1, l2, l3 must be positive");
        if (!(spec.y0 > 0.0 && spec.y0 < 1.0)) throw ConfigError("y0 must lie in (0, 1)");
        if (!(spec.x_min < spec.x_max) || !std::isfinite(spec.x_min) || !std::isfinite(spec.x_max))
            throw ConfigError("x_min must be below x_max");
        if (!(T > 0.0)) throw ConfigError("T must be > 0");
        dt_ = T / spec.l1;
        dy_ = (1.0 - spec.y0) / spec.l2;
        dx_ = (spec.x_max - spec.x_min) / spec.l3;
    }

    int l1() const noexcept { return spec_.l1; }
    int l2() const noexcept { return spec_.l2; }
    int l3() const noexcept { return spec_.l3; }
    int nt() const noexcept { return spec_.l1 + 1; }
    int ny() const noexcept { return spec_.l2 + 1; }
    int nx() const noexcept { return spec_.l3 + 1; }

    double T() const noexcept { return T_; }
    double dt() const noexcept { return dt_; }
    double dy() const noexcept { return dy_; }
    double dx() const noexcept { return dx_; }
    const GridSpec& spec() const noexcept { return spec_; }

    double t(int i) const noexcept { return i == spec_.l1 ? T_ : i * dt_; }
    double y(int j) const noexcept { return j == spec_.l2 ? 1.0 : spec_.y0 + j * dy_; }
    double x(int k) const noexcept { return k == spec_.l3 ? spec_.x_max : spec_.x_min + k * dx_; }

    std::vector<double> t_nodes() const { return nodes(nt(), [this](int i) { return t(i); }); }
    std::vector<double> y_nodes() const { return nodes(ny(), [this](int j) { return y(j); }); }
    std::vector<double> x_nodes() const { return nodes(nx(), [this](int k) { return x(k); }); }

private:
    template <class F>
    static std::vector<double> nodes(int n, F&& f) {
        std::vector<double> v(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = f(i);
        return v;
    }

    GridSpec spec_;
    double T_;
    double dt_ = 0.0;
    double dy_ = 0.0;
    double dx_ = 0.0;
};

/// x̄(y): the level where d/dy f(x̄, y) = r c0, i.e. log(r c0) - log g'(y).
inline double terminal_boundary(const ModelParams& params, const Payoff& payoff, double y) {
    if (!(params.r > 0.0))
        throw ConfigError("terminal boundary undefined for r = 0 (x̄ = -inf)");
    if (!(y > 0.0 && y <= 1.0)) throw ConfigError("terminal boundary needs y in (0, 1]");
    const double gp = payoff.g_prime(y);
    if (!(gp > 0.0)) throw ConfigError("terminal boundary needs g'(y) > 0");
    return std::log(params.r * params.c0) - std::log(gp);
}

}  // namespace mfg
