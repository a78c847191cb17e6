#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mpk/closed_form.hpp"
#include "mpk/models.hpp"
#include "mpk/qve.hpp"

namespace mpk {

struct RiccatiSolution {
    std::vector<double> t;
    std::vector<double> Phi;
    std::vector<Eigen::VectorXd> Psi;
    Eigen::VectorXd terminal_u;

    double phi_at(double s) const;
    Eigen::VectorXd psi_at(double s) const;
};

// Integrates the affine transform ODEs
//   Phi' = 1/2 Psi_J . a_JJ Psi_J + b . Psi - gamma,  Phi(0) = 0
//   Psi_i' = 1/2 Psi . alpha_i Psi + (B^T Psi)_i - delta_i   (CIR block)
//   Psi_J' = B_JJ^T Psi_J - delta_J,                  Psi(0) = u
// with an adaptive embedded Runge-Kutta pair (rel 1e-10 / abs 1e-12).
// Throws BlowUp when |Psi| passes 1e8 before tau.
RiccatiSolution integrate_riccati(const AffineSpec& spec, const Eigen::VectorXd& u, double tau,
                                  int report_points = 101);

double bond_price_affine(const AffineSpec& spec, const Eigen::VectorXd& x, double T);

// QVE data (M, c) for the CIR block of the eigen-exponent
QveProblem affine_qve_problem(const AffineSpec& spec, const Eigen::VectorXd& u_J);

// Recurrent exponential-affine eigenfunction e^{u.x}. Conditions: B_JJ stable
// (when n > 0) and the QVE minimal solution certified by a non-singular
// M-matrix Jacobian (when m > 0).
EigenAnalysis affine_recurrent_eigen(const AffineSpec& spec);

// market price of risk: Lambda_i = u_i sqrt(x_i) on the CIR block,
// Lambda_J = rho_JJ(x)^T u_J with the symmetric square root of a_JJ(x)
Eigen::VectorXd market_price_of_risk(const AffineSpec& spec, const Eigen::VectorXd& u,
                                     const Eigen::VectorXd& x);

}  // namespace mpk
