#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "mpk/closed_form.hpp"
#include "mpk/models.hpp"

namespace mpk {

struct McConfig {
    std::uint64_t seed = 0;
    std::size_t n_paths = 100'000;
    int steps_per_year = 252;       // Euler schemes
    int exact_steps_per_year = 32;  // exact-transition schemes (controls the int-r grid)
    int workers = 0;                // 0: hardware count capped by MPK_THREADS
};

enum class Measure { risk_neutral, eigen };

// States and accumulated short-rate integrals at the requested checkpoint
// times. Per-path draws come from a stream keyed by (seed, path index), so
// the ensemble is identical for any worker count.
struct PathEnsemble {
    std::string model;
    Measure measure = Measure::risk_neutral;
    double T = 0;
    std::size_t n_paths = 0;
    int n_checkpoints = 0;
    int dim = 1;
    std::vector<double> checkpoint_times;
    std::vector<double> state;  // n_paths * n_checkpoints * dim
    std::vector<double> int_r;  // n_paths * n_checkpoints

    double x_at(std::size_t path, int cp, int coord = 0) const {
        return state[(path * n_checkpoints + cp) * dim + coord];
    }
    Eigen::VectorXd state_at(std::size_t path, int cp) const {
        Eigen::VectorXd v(dim);
        for (int k = 0; k < dim; ++k) v(k) = x_at(path, cp, k);
        return v;
    }
    double int_r_at(std::size_t path, int cp) const { return int_r[path * n_checkpoints + cp]; }
};

PathEnsemble simulate_paths(const ModelSpec& model, const Eigen::VectorXd& x0,
                            const std::vector<double>& checkpoints, const McConfig& cfg);
PathEnsemble simulate_paths(const ModelSpec& model, double x0,
                            const std::vector<double>& checkpoints, const McConfig& cfg);

struct VerificationReport {
    std::string check;
    double estimate = 0;
    double target = 0;
    double se = 0;
    double z = 0;
    bool pass = false;
    double bias_allowance = 0;  // step-halving bound, Euler schemes only
};

struct MeanSe {
    double mean, se;
};
// order-insensitive pairwise summation
MeanSe mean_se(const std::vector<double>& v);

// E[e^{-int r} pi(X_t)] / pi(x0) against e^{-lambda t} under the risk-neutral
// measure; |z| <= 3 plus a step-halving bias allowance for Euler schemes.
VerificationReport verify_eigen_identity(const ValidatedModel& model, const EigenSolution& eigen,
                                         const Eigen::VectorXd& x0, double t,
                                         const McConfig& cfg);

// unit mean of the eigen-martingale at t plus the multiplicative restart
// test on the increment over [t/2, t]
std::vector<VerificationReport> verify_martingale(const ValidatedModel& model,
                                                  const EigenSolution& eigen,
                                                  const Eigen::VectorXd& x0, double t,
                                                  const McConfig& cfg);

// expected log return of candidate assets (money market, T-maturity bond)
// never beats the eigen-security under the eigen-measure; paired differences
struct GrowthConfig {
    double bond_maturity = 30.0;
    bool include_bond = true;
};
std::vector<VerificationReport> verify_growth_optimality(const ValidatedModel& model,
                                                         const EigenSolution& eigen,
                                                         const Eigen::VectorXd& x0, double t,
                                                         const McConfig& cfg,
                                                         const GrowthConfig& gc = {});

int resolve_workers(int requested);

}  // namespace mpk
