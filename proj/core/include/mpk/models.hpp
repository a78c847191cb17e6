#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mpk {

enum class Boundary { inaccessible, reflecting, absorbing };

struct Domain {
    double l = 0, r = 0;  // +-inf allowed
    Boundary left = Boundary::inaccessible;
    Boundary right = Boundary::inaccessible;
};

// Scalar coefficient with optional analytic derivatives. Missing derivatives
// fall back to central differences with step max(1e-6, 1e-6 |x|).
struct Coeff {
    std::function<double(double)> f;
    std::function<double(double)> d1;  // optional
    std::function<double(double)> d2;  // optional
};

// One-dimensional diffusion dX = mu(X) dt + sigma(X) dB with short rate r(X)
// on the interval (domain.l, domain.r).
struct Diffusion1D {
    std::string name;  // cir | sqrt_absorbing | vasicek | three_halves |
                       // merton_quadratic | brownian_rate | reflected_interval | custom
    std::map<std::string, double> params;
    Domain domain;
    Coeff mu_c, sigma_c, rate_c;

    double mu(double x) const { return mu_c.f(x); }
    double sigma(double x) const { return sigma_c.f(x); }
    double rate(double x) const { return rate_c.f(x); }
    double mu_d1(double x) const;
    double sigma_d1(double x) const;
    double sigma_d2(double x) const;

    double param(const std::string& k) const;
    // normalization anchor: midpoint of bounded intervals, 1 on (0,inf), 0 on R
    double x_ref() const;
    bool contains(double x) const { return x > domain.l && x < domain.r; }
};

// Canonical-form affine diffusion on R_+^m x R^n with affine short rate
// gamma + delta.x. alpha[i] is the full d x d matrix multiplying x_i in the
// diffusion, with (alpha_i)_II = e_i e_i^T required.
struct AffineSpec {
    int m = 0, n = 0;
    Eigen::VectorXd b;
    Eigen::MatrixXd B;
    Eigen::MatrixXd a;
    std::vector<Eigen::MatrixXd> alpha;  // size m
    double gamma = 0;
    Eigen::VectorXd delta;

    int d() const { return m + n; }
    // a_JJ + sum_i x_i alpha_i,JJ for the OU block
    Eigen::MatrixXd a_jj(const Eigen::VectorXd& x) const;
};

// d-dimensional OU with quadratic short rate gamma + delta.x + x.Phi.x
struct QtsmSpec {
    Eigen::VectorXd b;
    Eigen::MatrixXd B;
    Eigen::MatrixXd rho;  // non-singular; diffusion a = rho rho^T
    double gamma = 0;
    Eigen::VectorXd delta;
    Eigen::MatrixXd Phi;

    int d() const { return static_cast<int>(b.size()); }
    Eigen::MatrixXd a() const { return rho * rho.transpose(); }
    double rate(const Eigen::VectorXd& x) const {
        return gamma + delta.dot(x) + x.dot(Phi * x);
    }
};

// CIR plus compound-Poisson exponential jumps, short rate r = x
struct JcirSpec {
    double a = 0, kappa = 0, sigma = 0;
    double varpi = 0;  // jump arrival rate (1/years)
    double mu = 0;     // mean jump size
};

using ModelSpec = std::variant<Diffusion1D, AffineSpec, QtsmSpec, JcirSpec>;

struct ValidatedModel {
    ModelSpec spec;
    std::optional<bool> feller;  // CIR-type variance condition 2a >= sigma^2
    std::vector<std::string> warnings;
    std::string verdict = "valid";
};

ValidatedModel validate_model(const ModelSpec& spec);
inline ValidatedModel validate_model(const ValidatedModel& m) { return validate_model(m.spec); }

// scale density s(x) = exp(-int_{x_ref}^x 2 mu / sigma^2), speed
// m(x) = 2 / (sigma^2(x) s(x)); both strictly positive on the interior.
struct ScaleSpeed {
    double s, m;
};
ScaleSpeed scale_speed(const Diffusion1D& model, double x);

// named factories (annualized units)
Diffusion1D make_cir(double a, double kappa, double sigma);
Diffusion1D make_sqrt_absorbing(double b, double sigma);
Diffusion1D make_vasicek(double kappa, double theta, double sigma);
Diffusion1D make_three_halves(double kappa, double theta, double sigma);
Diffusion1D make_merton_quadratic(double kappa, double theta, double sigma);
Diffusion1D make_brownian_rate(double a, double sigma);
// polynomial coefficients, low order first
Diffusion1D make_reflected_interval(double l, double r, std::vector<double> mu_poly,
                                    std::vector<double> sigma_poly, std::vector<double> rate_poly);
Diffusion1D make_custom(Domain domain, Coeff mu, Coeff sigma, Coeff rate);

std::string model_tag(const ModelSpec& spec);

}  // namespace mpk
