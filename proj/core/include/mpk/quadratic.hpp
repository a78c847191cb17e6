#pragma once

#include <Eigen/Dense>

#include "mpk/closed_form.hpp"
#include "mpk/models.hpp"

namespace mpk {

struct CtareSolution {
    Eigen::MatrixXd V;           // symmetric PSD stabilizing solution
    double residual = 0;         // inf-norm of 2VaV - B^T V - V B - Phi
    Eigen::MatrixXd closed_loop;  // B - 2 a V
    bool stable = false;
};

// Stabilizing solution of 2VaV - B^T V - V B - Phi = 0 from the stable
// invariant subspace of the Hamiltonian [[B, -2a], [-Phi, -B^T]], with
// Newton-Kleinman (Lyapunov) refinement when the Schur residual is loose.
// Requires a symmetric positive definite and (B^T, Phi) stabilizable.
CtareSolution solve_ctare(const Eigen::MatrixXd& B, const Eigen::MatrixXd& a,
                          const Eigen::MatrixXd& Phi);

EigenAnalysis qtsm_recurrent_eigen(const QtsmSpec& spec);

}  // namespace mpk
