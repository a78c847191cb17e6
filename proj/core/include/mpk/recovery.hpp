#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "mpk/models.hpp"

namespace mpk {

// Dense one-period Arrow-Debreu price matrix over a state grid.
struct DiscretePricingOperator {
    Eigen::MatrixXd A;  // non-negative, irreducible
    double dt = 0;      // period length (years)
    std::vector<double> grid;
    double clipped_mass = 0;  // negative mass removed, relative to row mass
};

struct RecoveryResult {
    Eigen::VectorXd pi;  // positive, max entry 1
    double lambda = 0;
    Eigen::MatrixXd P;  // recovered stochastic matrix
    double perron_gap = 0;  // |theta_1| - |theta_2| modulus gap
};

// Crank-Nicolson step of the pricing PDE over dt with reflecting rows;
// negative entries are clipped with the removed mass reported. Throws
// GridTooCoarse when the clipped mass passes 1e-6 of the row mass.
DiscretePricingOperator discretize_pricing_operator(const Diffusion1D& model,
                                                    const std::vector<double>& grid, double dt);
// grid helper: n uniform points over the default truncation window
std::vector<double> make_grid(const Diffusion1D& model, int n);

// A_ij = e^{-lambda dt} P_ij pi_i / pi_j (transition-independent state prices)
DiscretePricingOperator build_state_prices(const Eigen::MatrixXd& P, const Eigen::VectorXd& pi,
                                           double lambda, double dt);

bool is_irreducible(const Eigen::MatrixXd& A);

// dominant eigenpair by power iteration with Rayleigh-shifted inverse
// acceleration; P_ij = e^{lambda dt} A_ij pi_j / pi_i
RecoveryResult perron_recover(const DiscretePricingOperator& op);

struct AsymptoticsReport {
    double lambda_hat = 0;           // yield slope over the two largest maturities
    Eigen::MatrixXd pi_ratio;        // P(x_i,T)/P(x_j,T) at the largest maturity
    std::optional<double> alpha_hat; // decay-rate fit when a closed-form lambda exists
    bool converged = false;
    std::string note;
};

AsymptoticsReport long_term_asymptotics(const ModelSpec& model, const std::vector<double>& x_list,
                                        const std::vector<double>& maturities);

}  // namespace mpk
