#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "mpk/models.hpp"

namespace mpk {

struct PdeGrid {
    int n_space = 1200;
    int n_time = 400;
    std::optional<double> x_lo, x_hi;  // override the automatic truncation
    double center_hint = 0;            // used by the fallback domain heuristics
};

struct PdeResult {
    std::vector<double> grid;
    std::vector<double> values;
    double error_estimate = 0;  // Richardson step-doubling, max over the interior

    double value_at(double x) const;  // linear interpolation
};

// stationary mean/sd of the named families (used for domain truncation)
std::optional<std::pair<double, double>> stationary_moments(const Diffusion1D& model);

// tridiagonal rows of the pricing generator 1/2 sigma^2 d_xx + mu d_x - r on
// a uniform grid, zero-flux rows at reflecting/truncated ends, frozen rows at
// absorbing ends; drift is upwinded where the cell Peclet number exceeds 1
struct TridiagOperator {
    std::vector<double> lower, diag, upper;
};
TridiagOperator discretize_generator(const Diffusion1D& model, const std::vector<double>& x);

// [x_lo, x_hi] for truncating an unbounded domain: mean +- 8 stationary
// standard deviations under the eigen-measure when a closed form exists,
// quantile-style fallbacks otherwise; clamped to the model domain.
std::pair<double, double> default_truncation(const Diffusion1D& model, double T,
                                             double center_hint);

// Crank-Nicolson solve of f_t = 1/2 sigma^2 f_xx + mu f_x - r f from the
// payoff at maturity T back to 0, reflecting (zero-flux) boundary rows on
// truncated or reflecting ends and frozen rows on absorbing ends.
PdeResult pde_price_1d(const Diffusion1D& model, const std::function<double(double)>& payoff,
                       double T, const PdeGrid& cfg = {});

}  // namespace mpk
