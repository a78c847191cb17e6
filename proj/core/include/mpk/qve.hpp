#pragma once

#include <Eigen/Dense>
#include <string>

namespace mpk {

// Quadratic vector equation M u = c + u^2/2 (componentwise square).
// The Jacobian of F(u) = M u - c - u^2/2 is J(u) = M - diag(u).
struct QveProblem {
    Eigen::MatrixXd M;  // Z-matrix (off-diagonals <= 0)
    Eigen::VectorXd c;
};

enum class MMatrixStatus { nonsingular_M, singular_M, not_M };
std::string to_string(MMatrixStatus s);

MMatrixStatus is_nonsingular_m_matrix(const Eigen::MatrixXd& A);

struct QveSolution {
    Eigen::VectorXd u_star;
    int iterations = 0;
    double residual = 0;  // inf-norm of F(u_star)
    MMatrixStatus jacobian_status = MMatrixStatus::not_M;
    bool monotone = false;  // iterates componentwise non-decreasing from u0
};

Eigen::VectorXd qve_residual(const QveProblem& p, const Eigen::VectorXd& u);

// Newton iteration from a caller-supplied start. Throws SingularJacobian or
// NoConvergence.
QveSolution solve_qve_newton(const QveProblem& p, const Eigen::VectorXd& u0);

// Minimal-solution search: start well below any root and restart lower
// (factor 4, up to 6 restarts) whenever Newton fails or the converged
// Jacobian is not an M-matrix. Throws NoSolution when every start fails.
QveSolution minimal_qve_solution(const QveProblem& p);

}  // namespace mpk
