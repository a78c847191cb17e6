#include "mpk/quadratic.hpp"

#include <lapacke.h>

#include <cmath>

#include "mpk/errors.hpp"

namespace mpk {

namespace {

lapack_logical select_stable(const double* wr, const double* /*wi*/) {
    return *wr < 0.0 ? 1 : 0;
}

double ctare_residual_norm(const Eigen::MatrixXd& B, const Eigen::MatrixXd& a,
                           const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& V) {
    Eigen::MatrixXd R = 2.0 * V * a * V - B.transpose() * V - V * B - Phi;
    return R.lpNorm<Eigen::Infinity>();
}

// solve A^T X + X A = C for symmetric X via the Kronecker system (small d)
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C) {
    const int d = static_cast<int>(A.rows());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(d * d, d * d);
    // vec(A^T X) = (I kron A^T) vec(X); vec(X A) = (A^T kron I) vec(X)
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                K(i + d * j, k + d * j) += A(k, i);  // (A^T X)_{ij} = sum_k A_{ki} X_{kj}
                K(i + d * j, i + d * k) += A(k, j);  // (X A)_{ij}  = sum_k X_{ik} A_{kj}
            }
    Eigen::VectorXd rhs(d * d);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) rhs(i + d * j) = C(i, j);
    Eigen::VectorXd x = K.fullPivLu().solve(rhs);
    Eigen::MatrixXd X(d, d);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) X(i, j) = x(i + d * j);
    return 0.5 * (X + X.transpose());
}

}  // namespace

CtareSolution solve_ctare(const Eigen::MatrixXd& B, const Eigen::MatrixXd& a,
                          const Eigen::MatrixXd& Phi) {
    const int d = static_cast<int>(B.rows());
    if (B.cols() != d || a.rows() != d || a.cols() != d || Phi.rows() != d || Phi.cols() != d)
        throw_validation("InvalidParameter", "CTARE dimension mismatch");
    if ((a - a.transpose()).lpNorm<Eigen::Infinity>() > 1e-10)
        throw_validation("InvalidParameter", "a must be symmetric");
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(a);
        if (ea.eigenvalues().minCoeff() <= 0)
            throw_validation("InvalidParameter", "a must be positive definite");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ep(0.5 * (Phi + Phi.transpose()));
        if (ep.eigenvalues().minCoeff() < -1e-10)
            throw_validation("InvalidParameter", "Phi must be positive semi-definite");
    }

    // Hautus-type stabilizability test for (B^T, Phi): no eigenvector of B
    // with non-negative real part may lie in the kernel of Phi
    {
        Eigen::EigenSolver<Eigen::MatrixXd> eb(B);
        const double phin = std::max(1.0, Phi.lpNorm<Eigen::Infinity>());
        for (int i = 0; i < d; ++i) {
            if (eb.eigenvalues()(i).real() < -1e-10) continue;
            Eigen::VectorXcd v = eb.eigenvectors().col(i);
            if ((Phi * v).norm() <= 1e-10 * phin * v.norm())
                throw_numerical("NotStabilizable",
                                "unstable eigenvector of B^T lies in the kernel of Phi");
        }
    }

    // ordered real Schur of the 2d x 2d Hamiltonian; stable block leads
    const int n2 = 2 * d;
    Eigen::MatrixXd H(n2, n2);
    H.topLeftCorner(d, d) = B;
    H.topRightCorner(d, d) = -2.0 * a;
    H.bottomLeftCorner(d, d) = -Phi;
    H.bottomRightCorner(d, d) = -B.transpose();

    Eigen::MatrixXd T = H;  // column-major, overwritten by dgees
    Eigen::MatrixXd VS(n2, n2);
    std::vector<double> wr(n2), wi(n2);
    lapack_int sdim = 0;
    lapack_int info =
        LAPACKE_dgees(LAPACK_COL_MAJOR, 'V', 'S', select_stable, n2, T.data(), n2, &sdim,
                      wr.data(), wi.data(), VS.data(), n2);
    if (info != 0 || sdim != d)
        throw_numerical("NotStabilizable",
                        "Hamiltonian has no d-dimensional stable invariant subspace (info=" +
                            std::to_string(info) + ", sdim=" + std::to_string(sdim) + ")");

    Eigen::MatrixXd U1 = VS.topLeftCorner(d, d);
    Eigen::MatrixXd U2 = VS.bottomLeftCorner(d, d);
    {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(U1);
        double smin = svd.singularValues()(d - 1), smax = svd.singularValues()(0);
        if (smin <= 0 || smax / smin > 1e12)
            throw_numerical("SubspaceIllConditioned", "cond(U1) exceeds 1e12");
    }
    Eigen::MatrixXd V = U2 * U1.inverse();
    V = 0.5 * (V + V.transpose());

    const double tol = 1e-10 * (1.0 + Phi.lpNorm<Eigen::Infinity>());
    double res = ctare_residual_norm(B, a, Phi, V);
    for (int it = 0; it < 25 && res > 1e-2 * tol; ++it) {
        // Newton-Kleinman: (B-2aV)^T D + D (B-2aV) = F(V), V <- V + D
        Eigen::MatrixXd cl = B - 2.0 * a * V;
        Eigen::MatrixXd F = 2.0 * V * a * V - B.transpose() * V - V * B - Phi;
        Eigen::MatrixXd D = solve_lyapunov(cl, F);
        Eigen::MatrixXd Vn = V + D;
        double rn = ctare_residual_norm(B, a, Phi, Vn);
        if (!(rn < res)) break;
        V = Vn;
        res = rn;
    }
    if (res > tol)
        throw_numerical("NoConvergence", "CTARE residual above tolerance after refinement");

    CtareSolution out;
    out.V = V;
    out.residual = res;
    out.closed_loop = B - 2.0 * a * V;
    Eigen::EigenSolver<Eigen::MatrixXd> ec(out.closed_loop, false);
    out.stable = ec.eigenvalues().real().maxCoeff() < 0;
    return out;
}

EigenAnalysis qtsm_recurrent_eigen(const QtsmSpec& spec) {
    const int d = spec.d();
    Eigen::MatrixXd a = spec.a();
    CtareSolution ct = solve_ctare(spec.B, a, spec.Phi);
    if (!ct.stable)
        throw_numerical("NotStabilizable", "CTARE solution does not stabilize the closed loop");

    // (2Va - B^T) u = 2Vb + delta
    Eigen::MatrixXd K = 2.0 * ct.V * a - spec.B.transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (!lu.isInvertible())
        throw_numerical("SingularLinearSystem", "eigen-exponent linear system is singular");
    Eigen::VectorXd u = lu.solve(2.0 * ct.V * spec.b + spec.delta);

    double lambda = spec.gamma - 0.5 * u.dot(a * u) + (a * ct.V).trace() + u.dot(spec.b);

    // eigen-measure OU: drift (b - a u) + (B - 2 a V) x, same rho
    QtsmSpec q = spec;
    q.b = spec.b - a * u;
    q.B = ct.closed_loop;

    EigenSolution sol;
    sol.lambda = lambda;
    sol.pi = PiFunction::exp_quadratic_multi(u, ct.V, Eigen::VectorXd::Zero(d));
    sol.q_pi_model = q;
    sol.recurrence = Recurrence::recurrent;
    sol.provenance = "exponential-quadratic eigenfunction via the stabilizing CTARE solution";
    sol.source_model = spec;
    return {sol, {}, "recurrent"};
}

}  // namespace mpk
