#include "mpk/qve.hpp"

#include <cmath>

#include "mpk/errors.hpp"

namespace mpk {

std::string to_string(MMatrixStatus s) {
    switch (s) {
        case MMatrixStatus::nonsingular_M: return "nonsingular_M";
        case MMatrixStatus::singular_M: return "singular_M";
        case MMatrixStatus::not_M: return "not_M";
    }
    return "?";
}

MMatrixStatus is_nonsingular_m_matrix(const Eigen::MatrixXd& A) {
    const Eigen::Index n = A.rows();
    if (n == 0 || A.cols() != n) return MMatrixStatus::not_M;
    const double norm = A.lpNorm<Eigen::Infinity>();
    const double ztol = 1e-14 * std::max(1.0, norm);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j && A(i, j) > ztol) return MMatrixStatus::not_M;

    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    double min_re = es.eigenvalues().real().minCoeff();
    // eps scale guards the zero matrix, whose norm vanishes
    const double eps = 1e-10 * std::max(1.0, norm);
    if (min_re > eps) return MMatrixStatus::nonsingular_M;
    if (min_re > -eps) return MMatrixStatus::singular_M;  // A + eps I is non-singular M
    return MMatrixStatus::not_M;
}

Eigen::VectorXd qve_residual(const QveProblem& p, const Eigen::VectorXd& u) {
    return p.M * u - p.c - 0.5 * u.cwiseProduct(u);
}

QveSolution solve_qve_newton(const QveProblem& p, const Eigen::VectorXd& u0) {
    const Eigen::Index m = p.c.size();
    if (p.M.rows() != m || p.M.cols() != m)
        throw_validation("InvalidParameter", "QVE dimensions mismatch");
    {
        const double ztol = 1e-14 * std::max(1.0, p.M.lpNorm<Eigen::Infinity>());
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < m; ++j)
                if (i != j && p.M(i, j) > ztol)
                    throw_validation("InvalidParameter", "QVE matrix must be a Z-matrix");
    }
    const double tol = 1e-12 * std::max(1.0, p.c.lpNorm<Eigen::Infinity>());

    QveSolution out;
    Eigen::VectorXd u = u0;
    bool monotone = true;
    bool reached_tol = false;
    double res = qve_residual(p, u).lpNorm<Eigen::Infinity>();
    int it = 0;
    for (; it < 100; ++it) {
        if (res <= tol) {
            reached_tol = true;
            // keep polishing while the residual strictly improves; a double
            // root (singular Jacobian limit) converges only linearly and
            // benefits from the extra steps
            Eigen::MatrixXd J = p.M - u.asDiagonal().toDenseMatrix();
            Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
            if (!lu.isInvertible()) break;
            Eigen::VectorXd step = lu.solve(-qve_residual(p, u));
            Eigen::VectorXd u_next = u + step;
            double res_next = qve_residual(p, u_next).lpNorm<Eigen::Infinity>();
            if (!(res_next < 0.5 * res) || !u_next.allFinite()) break;
            if ((u_next - u).minCoeff() < -1e-14) monotone = false;
            u = u_next;
            res = res_next;
            continue;
        }
        Eigen::MatrixXd J = p.M - u.asDiagonal().toDenseMatrix();
        Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
        if (!lu.isInvertible())
            throw_numerical("SingularJacobian", "QVE Newton Jacobian is singular");
        Eigen::VectorXd step = lu.solve(-qve_residual(p, u));
        Eigen::VectorXd u_next = u + step;
        if (!u_next.allFinite() || u_next.lpNorm<Eigen::Infinity>() > 1e12)
            throw_numerical("NoConvergence", "QVE Newton iterates diverge");
        if ((u_next - u).minCoeff() < -1e-14) monotone = false;
        u = u_next;
        res = qve_residual(p, u).lpNorm<Eigen::Infinity>();
    }
    if (!reached_tol && res > tol)
        throw_numerical("NoConvergence", "QVE Newton did not reach tolerance in 100 iterations");
    out.u_star = u;
    out.iterations = it;
    out.residual = res;
    out.monotone = monotone;
    out.jacobian_status = is_nonsingular_m_matrix(p.M - u.asDiagonal().toDenseMatrix());
    return out;
}

QveSolution minimal_qve_solution(const QveProblem& p) {
    const Eigen::Index m = p.c.size();
    double scale = 1.0 + p.c.lpNorm<Eigen::Infinity>() + p.M.lpNorm<Eigen::Infinity>();
    Eigen::VectorXd u0 = Eigen::VectorXd::Constant(m, -scale);
    std::string last_failure = "no attempt";
    for (int attempt = 0; attempt <= 6; ++attempt) {
        try {
            QveSolution s = solve_qve_newton(p, u0);
            if (s.jacobian_status != MMatrixStatus::not_M) return s;
            last_failure = "converged to a non-minimal root";
        } catch (const NumericalError& e) {
            last_failure = e.code();
        }
        u0 *= 4.0;
    }
    throw_numerical("NoSolution",
                    "QVE minimal-solution search exhausted restarts (" + last_failure +
                        "); the solvability inequality appears infeasible");
}

}  // namespace mpk
