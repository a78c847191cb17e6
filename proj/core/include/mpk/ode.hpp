#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace mpk {

struct OdeOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_norm = 1e8;  // throws BlowUp past this
    int max_steps = 2'000'000;
};

struct OdePath {
    std::vector<double> t;
    std::vector<Eigen::VectorXd> y;
    std::vector<Eigen::VectorXd> f;  // derivatives at the nodes

    // cubic Hermite interpolation between accepted steps
    Eigen::VectorXd at(double s) const;
};

// Dormand-Prince 5(4) embedded pair, adaptive steps from 0 to tau (tau > 0).
OdePath integrate_ode(const std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>& rhs,
                      const Eigen::VectorXd& y0, double tau, const OdeOptions& opt = {});

}  // namespace mpk
