#pragma once

#include <Eigen/Dense>

#include "mpk/models.hpp"

namespace mpk {

// log zero-coupon bond prices; the CIR/Vasicek forms are evaluated in log
// space so very long maturities stay finite
double log_bond_cir(double a, double kappa, double sigma, double x, double T);
double log_bond_vasicek(double kappa, double theta, double sigma, double x, double T);
double log_bond_jcir(const JcirSpec& spec, double x, double T);
double log_bond_qtsm(const QtsmSpec& spec, const Eigen::VectorXd& x, double T);

// dispatch: closed form when available, Riccati for affine/QTSM, and the
// Crank-Nicolson PDE engine otherwise (1D models)
double bond_price(const ModelSpec& model, const Eigen::VectorXd& x, double T);
double bond_price(const ModelSpec& model, double x, double T);

// log P(x, tau) = A + B.x + x.N.x for the affine/quadratic term structures
// (N zero except for QTSM); used to price bonds along simulated paths
struct BondCoefficients {
    double A = 0;
    Eigen::VectorXd B;
    Eigen::MatrixXd N;

    double log_price(const Eigen::VectorXd& x) const { return A + B.dot(x) + x.dot(N * x); }
    double log_price(double x) const { return A + B(0) * x + N(0, 0) * x * x; }
};
// throws UnsupportedScheme for models without an exponential-affine or
// exponential-quadratic bond formula
BondCoefficients log_bond_coefficients(const ModelSpec& model, double tau);

}  // namespace mpk
