#include "mpk/bonds.hpp"

#include <cmath>

#include "mpk/affine.hpp"
#include "mpk/errors.hpp"
#include "mpk/ode.hpp"
#include "mpk/pde.hpp"
#include "mpk/quadrature.hpp"

namespace mpk {

namespace {

// B(T) of the square-root family, stable for large gamma T
double cir_b(double kappa, double gamma, double T) {
    double e = std::exp(-gamma * T);
    return 2.0 * (1.0 - e) / ((gamma + kappa) * (1.0 - e) + 2.0 * gamma * e);
}

double cir_log_a(double a, double kappa, double sigma, double gamma, double T) {
    double e = std::exp(-gamma * T);
    double logD = gamma * T + std::log((gamma + kappa) * (1.0 - e) + 2.0 * gamma * e);
    return (2.0 * a / (sigma * sigma)) *
           (std::log(2.0 * gamma) + 0.5 * (gamma + kappa) * T - logD);
}

// QTSM transform ODEs for l(t), m(t), N(t); state flattened (1 + d + d^2)
Eigen::VectorXd qtsm_rhs(const QtsmSpec& s, const Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
    const int d = s.d();
    Eigen::VectorXd m = y.segment(1, d);
    Eigen::MatrixXd N = Eigen::Map<const Eigen::MatrixXd>(y.data() + 1 + d, d, d);
    N = 0.5 * (N + N.transpose());
    Eigen::VectorXd dy(y.size());
    dy(0) = -0.5 * m.dot(a * m) + (a * N).trace() + m.dot(s.b) + s.gamma;
    dy.segment(1, d) = -2.0 * N * a * m + s.B.transpose() * m + 2.0 * N * s.b + s.delta;
    Eigen::MatrixXd dN = -2.0 * N * a * N + s.B.transpose() * N + N * s.B + s.Phi;
    Eigen::Map<Eigen::MatrixXd>(dy.data() + 1 + d, d, d) = dN;
    return dy;
}

Eigen::VectorXd qtsm_lmn(const QtsmSpec& spec, double T) {
    const int d = spec.d();
    Eigen::MatrixXd a = spec.a();
    Eigen::VectorXd y0 = Eigen::VectorXd::Zero(1 + d + d * d);
    OdePath path = integrate_ode(
        [&](double, const Eigen::VectorXd& y) { return qtsm_rhs(spec, a, y); }, y0, T);
    return path.y.back();
}

}  // namespace

double log_bond_cir(double a, double kappa, double sigma, double x, double T) {
    double gamma = std::sqrt(kappa * kappa + 2.0 * sigma * sigma);
    return cir_log_a(a, kappa, sigma, gamma, T) - cir_b(kappa, gamma, T) * x;
}

double log_bond_vasicek(double kappa, double theta, double sigma, double x, double T) {
    double B = kappa != 0 ? (1.0 - std::exp(-kappa * T)) / kappa : T;
    double s2 = sigma * sigma;
    double A = (theta - s2 / (2 * kappa * kappa)) * (B - T) - s2 * B * B / (4 * kappa);
    return A - B * x;
}

double log_bond_jcir(const JcirSpec& spec, double x, double T) {
    double gamma = std::sqrt(spec.kappa * spec.kappa + 2.0 * spec.sigma * spec.sigma);
    double diffusion_part = cir_log_a(spec.a, spec.kappa, spec.sigma, gamma, T);
    // jump contribution: -varpi int_0^T mu B(s) / (1 + mu B(s)) ds
    auto integrand = [&](double s) {
        double B = cir_b(spec.kappa, gamma, s);
        return spec.mu * B / (1.0 + spec.mu * B);
    };
    double jump_part = -spec.varpi * integrate(integrand, 0.0, T, 1e-12);
    return diffusion_part + jump_part - cir_b(spec.kappa, gamma, T) * x;
}

double log_bond_qtsm(const QtsmSpec& spec, const Eigen::VectorXd& x, double T) {
    const int d = spec.d();
    Eigen::VectorXd y = qtsm_lmn(spec, T);
    Eigen::VectorXd m = y.segment(1, d);
    Eigen::MatrixXd N = Eigen::Map<const Eigen::MatrixXd>(y.data() + 1 + d, d, d);
    return -y(0) - m.dot(x) - x.dot(N * x);
}

double bond_price(const ModelSpec& model, const Eigen::VectorXd& x, double T) {
    if (T == 0) return 1.0;
    if (auto* s = std::get_if<AffineSpec>(&model)) return bond_price_affine(*s, x, T);
    if (auto* s = std::get_if<QtsmSpec>(&model)) return std::exp(log_bond_qtsm(*s, x, T));
    return bond_price(model, x(0), T);
}

double bond_price(const ModelSpec& model, double x, double T) {
    if (T == 0) return 1.0;
    if (auto* j = std::get_if<JcirSpec>(&model)) return std::exp(log_bond_jcir(*j, x, T));
    if (std::holds_alternative<AffineSpec>(model) || std::holds_alternative<QtsmSpec>(model)) {
        Eigen::VectorXd xv(1);
        xv << x;
        return bond_price(model, xv, T);
    }
    const auto& d = std::get<Diffusion1D>(model);
    if (d.name == "cir" || d.name == "sqrt_absorbing") {
        double a = d.name == "cir" ? d.param("a") : 0.0;
        double kappa = d.name == "cir" ? d.param("kappa") : -d.param("b");
        return std::exp(log_bond_cir(a, kappa, d.param("sigma"), x, T));
    }
    if (d.name == "vasicek")
        return std::exp(
            log_bond_vasicek(d.param("kappa"), d.param("theta"), d.param("sigma"), x, T));
    if (d.name == "brownian_rate") {
        double a = d.param("a"), sg = d.param("sigma");
        return std::exp(-x * T - 0.5 * a * T * T + sg * sg * T * T * T / 6.0);
    }
    // remaining 1D models go through the PDE engine
    PdeGrid cfg;
    cfg.center_hint = x;
    PdeResult r = pde_price_1d(d, [](double) { return 1.0; }, T, cfg);
    return r.value_at(x);
}

BondCoefficients log_bond_coefficients(const ModelSpec& model, double tau) {
    BondCoefficients c;
    if (auto* j = std::get_if<JcirSpec>(&model)) {
        double gamma = std::sqrt(j->kappa * j->kappa + 2 * j->sigma * j->sigma);
        c.B = Eigen::VectorXd::Constant(1, -cir_b(j->kappa, gamma, tau));
        c.N = Eigen::MatrixXd::Zero(1, 1);
        c.A = log_bond_jcir(*j, 0.0, tau);
        return c;
    }
    if (auto* s = std::get_if<QtsmSpec>(&model)) {
        const int d = s->d();
        Eigen::VectorXd y = qtsm_lmn(*s, tau);
        c.A = -y(0);
        c.B = -y.segment(1, d);
        c.N = -Eigen::Map<const Eigen::MatrixXd>(y.data() + 1 + d, d, d);
        return c;
    }
    if (auto* s = std::get_if<AffineSpec>(&model)) {
        RiccatiSolution r = integrate_riccati(*s, Eigen::VectorXd::Zero(s->d()), tau, 2);
        c.A = r.Phi.back();
        c.B = r.Psi.back();
        c.N = Eigen::MatrixXd::Zero(s->d(), s->d());
        return c;
    }
    const auto& d = std::get<Diffusion1D>(model);
    c.N = Eigen::MatrixXd::Zero(1, 1);
    if (d.name == "cir" || d.name == "sqrt_absorbing") {
        double a = d.name == "cir" ? d.param("a") : 0.0;
        double kappa = d.name == "cir" ? d.param("kappa") : -d.param("b");
        double sg = d.param("sigma");
        double gamma = std::sqrt(kappa * kappa + 2 * sg * sg);
        c.A = cir_log_a(a, kappa, sg, gamma, tau);
        c.B = Eigen::VectorXd::Constant(1, -cir_b(kappa, gamma, tau));
        return c;
    }
    if (d.name == "vasicek") {
        double A0 = log_bond_vasicek(d.param("kappa"), d.param("theta"), d.param("sigma"), 0, tau);
        double A1 = log_bond_vasicek(d.param("kappa"), d.param("theta"), d.param("sigma"), 1, tau);
        c.A = A0;
        c.B = Eigen::VectorXd::Constant(1, A1 - A0);
        return c;
    }
    if (d.name == "brownian_rate") {
        double a = d.param("a"), sg = d.param("sigma");
        c.A = -0.5 * a * tau * tau + sg * sg * tau * tau * tau / 6.0;
        c.B = Eigen::VectorXd::Constant(1, -tau);
        return c;
    }
    throw_validation("UnsupportedScheme",
                     "no exponential-affine bond formula for model '" + d.name + "'");
}

}  // namespace mpk
