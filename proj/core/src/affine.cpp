#include "mpk/affine.hpp"

#include <cmath>

#include "mpk/errors.hpp"
#include "mpk/ode.hpp"

namespace mpk {

namespace {

// state layout: y = (Phi, Psi_1..Psi_d)
Eigen::VectorXd riccati_rhs(const AffineSpec& s, const Eigen::VectorXd& y) {
    const int d = s.d();
    Eigen::VectorXd psi = y.tail(d);
    Eigen::VectorXd dy(d + 1);
    Eigen::VectorXd psi_j = psi.tail(s.n);
    Eigen::MatrixXd ajj = s.a.bottomRightCorner(s.n, s.n);
    dy(0) = 0.5 * psi_j.dot(ajj * psi_j) + s.b.dot(psi) - s.gamma;
    Eigen::VectorXd dpsi = s.B.transpose() * psi - s.delta;
    for (int i = 0; i < s.m; ++i) dpsi(i) += 0.5 * psi.dot(s.alpha[i] * psi);
    dy.tail(d) = dpsi;
    return dy;
}

}  // namespace

double RiccatiSolution::phi_at(double s) const {
    if (t.empty()) throw_numerical("NoConvergence", "empty Riccati path");
    auto it = std::lower_bound(t.begin(), t.end(), s);
    if (it == t.end()) return Phi.back();
    size_t i = static_cast<size_t>(it - t.begin());
    if (i == 0 || t[i] == s) return Phi[i];
    double w = (s - t[i - 1]) / (t[i] - t[i - 1]);
    return (1 - w) * Phi[i - 1] + w * Phi[i];
}

Eigen::VectorXd RiccatiSolution::psi_at(double s) const {
    if (t.empty()) throw_numerical("NoConvergence", "empty Riccati path");
    auto it = std::lower_bound(t.begin(), t.end(), s);
    if (it == t.end()) return Psi.back();
    size_t i = static_cast<size_t>(it - t.begin());
    if (i == 0 || t[i] == s) return Psi[i];
    double w = (s - t[i - 1]) / (t[i] - t[i - 1]);
    return (1 - w) * Psi[i - 1] + w * Psi[i];
}

RiccatiSolution integrate_riccati(const AffineSpec& spec, const Eigen::VectorXd& u, double tau,
                                  int report_points) {
    if (tau < 0) throw_validation("InvalidParameter", "tau must be >= 0");
    if (u.size() != spec.d()) throw_validation("InvalidParameter", "u has wrong dimension");
    const int d = spec.d();
    Eigen::VectorXd y0(d + 1);
    y0(0) = 0.0;
    y0.tail(d) = u;

    RiccatiSolution out;
    out.terminal_u = u;
    if (tau == 0) {
        out.t = {0.0};
        out.Phi = {0.0};
        out.Psi = {u};
        return out;
    }

    OdeOptions opt;  // defaults carry the 1e-10 / 1e-12 tolerances
    OdePath path = integrate_ode(
        [&spec](double, const Eigen::VectorXd& y) { return riccati_rhs(spec, y); }, y0, tau, opt);

    // dense report grid from the integrator's cubic interpolation
    int np = std::max(2, report_points);
    out.t.reserve(np);
    out.Phi.reserve(np);
    out.Psi.reserve(np);
    for (int i = 0; i < np; ++i) {
        double s = tau * i / (np - 1);
        Eigen::VectorXd y = path.at(s);
        out.t.push_back(s);
        out.Phi.push_back(y(0));
        out.Psi.push_back(y.tail(d));
    }
    return out;
}

double bond_price_affine(const AffineSpec& spec, const Eigen::VectorXd& x, double T) {
    RiccatiSolution r = integrate_riccati(spec, Eigen::VectorXd::Zero(spec.d()), T, 2);
    return std::exp(r.Phi.back() + r.Psi.back().dot(x));
}

QveProblem affine_qve_problem(const AffineSpec& spec, const Eigen::VectorXd& u_J) {
    QveProblem p;
    p.M = -spec.B.topLeftCorner(spec.m, spec.m).transpose();
    p.c = Eigen::VectorXd(spec.m);
    for (int i = 0; i < spec.m; ++i) {
        double ci = -spec.delta(i);
        for (int j = 0; j < spec.n; ++j) ci += spec.B(spec.m + j, i) * u_J(j);
        Eigen::MatrixXd al_jj = spec.alpha[i].bottomRightCorner(spec.n, spec.n);
        ci += 0.5 * u_J.dot(al_jj * u_J);
        p.c(i) = ci;
    }
    return p;
}

EigenAnalysis affine_recurrent_eigen(const AffineSpec& spec) {
    const int m = spec.m, n = spec.n, d = spec.d();
    Eigen::VectorXd u_J(n);
    if (n > 0) {
        Eigen::MatrixXd bjj = spec.B.bottomRightCorner(n, n);
        Eigen::EigenSolver<Eigen::MatrixXd> es(bjj, false);
        double max_re = es.eigenvalues().real().maxCoeff();
        // exact zeros are a failure, not a rounding case
        if (max_re >= -1e-10)
            throw_numerical("ConditionOneFails",
                            "B_JJ must have strictly negative eigenvalue real parts");
        u_J = bjj.transpose().fullPivLu().solve(spec.delta.tail(n));
    }

    Eigen::VectorXd u(d);
    MMatrixStatus jstatus = MMatrixStatus::nonsingular_M;
    if (m > 0) {
        QveProblem p = affine_qve_problem(spec, u_J);
        QveSolution s = minimal_qve_solution(p);  // throws NoSolution
        jstatus = s.jacobian_status;
        u.head(m) = s.u_star;
    }
    if (n > 0) u.tail(n) = u_J;

    Eigen::MatrixXd ajj = spec.a.bottomRightCorner(n, n);
    double lambda = spec.gamma - spec.b.dot(u);
    if (n > 0) lambda -= 0.5 * u_J.dot(ajj * u_J);

    // eigen-measure drift parameters; diffusion and rate data unchanged
    AffineSpec q = spec;
    for (int i = 0; i < m; ++i) q.B(i, i) += u(i);
    if (n > 0) q.b.tail(n) += ajj * u_J;
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < n; ++k) {
            double add = 0;
            for (int lidx = 0; lidx < n; ++lidx)
                add += spec.alpha[i](spec.m + k, spec.m + lidx) * u_J(lidx);
            q.B(m + k, i) += add;
        }

    if (jstatus != MMatrixStatus::nonsingular_M)
        throw_numerical("NotMeanReverting",
                        "QVE Jacobian is only a singular M-matrix: the transformed drift is not "
                        "certified mean-reverting");

    EigenSolution sol;
    sol.lambda = lambda;
    sol.pi = PiFunction::exp_affine(u, Eigen::VectorXd::Zero(d));
    sol.q_pi_model = q;
    sol.recurrence = Recurrence::recurrent;
    sol.provenance = "exponential-affine eigenfunction via the minimal QVE solution";
    sol.source_model = spec;
    return {sol, {}, "recurrent"};
}

Eigen::VectorXd market_price_of_risk(const AffineSpec& spec, const Eigen::VectorXd& u,
                                     const Eigen::VectorXd& x) {
    const int m = spec.m, n = spec.n;
    if (x.size() != spec.d() || u.size() != spec.d())
        throw_validation("InvalidParameter", "dimension mismatch");
    for (int i = 0; i < m; ++i)
        if (x(i) < 0) throw_validation("NegativeCirState", "CIR coordinates must be >= 0");
    Eigen::VectorXd lam(spec.d());
    for (int i = 0; i < m; ++i) lam(i) = u(i) * std::sqrt(x(i));
    if (n > 0) {
        // symmetric (spectral) square root with deterministic eigenvalue order
        Eigen::MatrixXd ajj = spec.a_jj(x);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ajj);
        Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        Eigen::MatrixXd rho =
            es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
        lam.tail(n) = rho.transpose() * u.tail(n);
    }
    return lam;
}

}  // namespace mpk
