#include "mpk/models.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "mpk/errors.hpp"
#include "mpk/quadrature.hpp"

namespace mpk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double fd_step(double x) { return std::max(1e-6, 1e-6 * std::abs(x)); }

double central_d1(const std::function<double(double)>& f, double x, const Domain& dom) {
    double h = fd_step(x);
    if (x - h <= dom.l || x + h >= dom.r)
        throw_numerical("DerivativeUnavailable", "finite difference hits a domain edge");
    return (f(x + h) - f(x - h)) / (2 * h);
}

double central_d2(const std::function<double(double)>& f, double x, const Domain& dom) {
    double h = fd_step(x);
    if (x - h <= dom.l || x + h >= dom.r)
        throw_numerical("DerivativeUnavailable", "finite difference hits a domain edge");
    return (f(x + h) - 2 * f(x) + f(x - h)) / (h * h);
}

std::function<double(double)> poly_fn(std::vector<double> c) {
    return [c = std::move(c)](double x) {
        double v = 0;
        for (size_t i = c.size(); i-- > 0;) v = v * x + c[i];
        return v;
    };
}

std::function<double(double)> poly_deriv_fn(const std::vector<double>& c) {
    std::vector<double> d;
    for (size_t i = 1; i < c.size(); ++i) d.push_back(c[i] * static_cast<double>(i));
    return poly_fn(std::move(d));
}

bool is_psd(const Eigen::MatrixXd& s, double tol) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    return es.eigenvalues().minCoeff() >= -tol;
}

bool is_symmetric(const Eigen::MatrixXd& s, double tol) {
    return (s - s.transpose()).lpNorm<Eigen::Infinity>() <= tol;
}

void validate_diffusion(const Diffusion1D& d, ValidatedModel& out) {
    if (!(d.domain.l < d.domain.r))
        throw_validation("InvalidParameter", "empty domain for " + d.name);
    if (d.name == "reflected_interval" &&
        (!std::isfinite(d.domain.l) || !std::isfinite(d.domain.r)))
        throw_validation("InvalidParameter", "reflected_interval requires finite l < r");

    auto has = [&](const char* k) { return d.params.count(k) > 0; };
    if (has("sigma") && d.param("sigma") <= 0)
        throw_validation("InvalidParameter", "sigma must be positive");

    if (d.name == "cir") {
        if (d.param("a") <= 0) throw_validation("InvalidParameter", "CIR requires a > 0");
        out.feller = 2 * d.param("a") >= d.param("sigma") * d.param("sigma");
        if (!*out.feller)
            out.warnings.push_back("Feller condition fails: zero is instantaneously reflecting");
    }
    if (d.name == "three_halves" || d.name == "merton_quadratic") {
        if (d.param("kappa") <= 0 || d.param("theta") <= 0)
            throw_validation("InvalidParameter", d.name + " requires kappa, theta > 0");
    }
    if (d.name == "vasicek" && d.param("kappa") == 0)
        throw_validation("KappaZero", "vasicek with kappa = 0 is the Brownian-rate model");

    // sigma > 0 and a finite rate on a probe grid of the interior
    double lo = std::isfinite(d.domain.l) ? d.domain.l : -1e3;
    double hi = std::isfinite(d.domain.r) ? d.domain.r : 1e3;
    for (int i = 1; i < 32; ++i) {
        double x = lo + (hi - lo) * i / 32.0;
        if (!d.contains(x)) continue;
        if (!(d.sigma(x) > 0))
            throw_validation("InvalidParameter", "sigma(x) must be positive on the interior");
        if (!std::isfinite(d.rate(x)))
            throw_validation("InvalidParameter", "rate(x) must be finite on the interior");
    }
}

void validate_affine(const AffineSpec& s, ValidatedModel& out) {
    const int d = s.d();
    if (s.m < 0 || s.n < 0 || d <= 0) throw_validation("InvalidParameter", "need m + n >= 1");
    if (s.b.size() != d || s.B.rows() != d || s.B.cols() != d || s.a.rows() != d ||
        s.a.cols() != d || s.delta.size() != d || static_cast<int>(s.alpha.size()) != s.m)
        throw_validation("InvalidParameter", "inconsistent affine dimensions");
    const double tol = 1e-12;

    for (int i = 0; i < s.m; ++i)
        if (s.b(i) <= 0) throw_validation("AdmissibilityViolation", "b_I > 0");
    for (int i = 0; i < s.m; ++i)
        for (int j = s.m; j < d; ++j)
            if (std::abs(s.B(i, j)) > tol)
                throw_validation("AdmissibilityViolation", "B_IJ = 0 (canonical form)");
    for (int i = 0; i < s.m; ++i)
        for (int j = 0; j < s.m; ++j)
            if (i != j && s.B(i, j) < -tol)
                throw_validation("AdmissibilityViolation",
                                 "B_II off-diagonal elements must be >= 0");

    // a vanishes outside the JJ block and a_JJ is symmetric PSD
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if ((i < s.m || j < s.m) && std::abs(s.a(i, j)) > tol)
                throw_validation("AdmissibilityViolation", "a nonzero outside the JJ block");
    Eigen::MatrixXd ajj = s.a.bottomRightCorner(s.n, s.n);
    if (s.n > 0) {
        if (!is_symmetric(ajj, 1e-10))
            throw_validation("AdmissibilityViolation", "a_JJ must be symmetric");
        if (!is_psd(ajj, 1e-10))
            throw_validation("AdmissibilityViolation", "a_JJ must be positive semi-definite");
    }

    Eigen::MatrixXd sum_jj = ajj;
    for (int i = 0; i < s.m; ++i) {
        const Eigen::MatrixXd& al = s.alpha[i];
        if (al.rows() != d || al.cols() != d)
            throw_validation("InvalidParameter", "alpha_i must be d x d");
        for (int p = 0; p < d; ++p)
            for (int q = 0; q < d; ++q) {
                bool in_jj = p >= s.m && q >= s.m;
                bool is_ii_diag = p == i && q == i;
                if (!in_jj && !is_ii_diag && std::abs(al(p, q)) > tol)
                    throw_validation("AdmissibilityViolation",
                                     "alpha_i nonzero outside the JJ block and (i,i)");
            }
        if (std::abs(al(i, i) - 1.0) > tol)
            throw_validation("AdmissibilityViolation",
                             "canonical form requires alpha_i(i,i) = 1");
        Eigen::MatrixXd al_jj = al.bottomRightCorner(s.n, s.n);
        if (s.n > 0) {
            if (!is_symmetric(al_jj, 1e-10))
                throw_validation("AdmissibilityViolation", "alpha_i,JJ must be symmetric");
            if (!is_psd(al_jj, 1e-10))
                throw_validation("AdmissibilityViolation",
                                 "alpha_i,JJ must be positive semi-definite");
            sum_jj += al_jj;
        }
    }
    if (s.n > 0) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(sum_jj);
        if (!lu.isInvertible())
            throw_validation("AdmissibilityViolation",
                             "a_JJ + sum alpha_i,JJ must be non-singular");
    }
    out.verdict = "valid";
}

void validate_qtsm(const QtsmSpec& s, ValidatedModel& out) {
    const int d = s.d();
    if (d <= 0) throw_validation("InvalidParameter", "QTSM needs d >= 1");
    if (s.B.rows() != d || s.B.cols() != d || s.rho.rows() != d || s.rho.cols() != d ||
        s.delta.size() != d || s.Phi.rows() != d || s.Phi.cols() != d)
        throw_validation("InvalidParameter", "inconsistent QTSM dimensions");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(s.rho);
    if (!lu.isInvertible()) throw_validation("InvalidParameter", "rho must be non-singular");
    if (!is_symmetric(s.Phi, 1e-10))
        throw_validation("InvalidParameter", "Phi must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.Phi);
    double mineig = es.eigenvalues().minCoeff();
    if (mineig < -1e-10)
        throw_validation("InvalidParameter", "Phi must be positive semi-definite");

    bool strict = mineig > 1e-10 * std::max(1.0, s.Phi.lpNorm<Eigen::Infinity>());
    if (strict) {
        // analytic minimum of the quadratic form
        Eigen::VectorXd xmin = -0.5 * s.Phi.ldlt().solve(s.delta);
        double rmin = s.rate(xmin);
        if (rmin < -1e-12)
            throw_validation("InvalidParameter",
                             "short rate is negative at its minimum (r_min = " +
                                 std::to_string(rmin) + ")");
    } else {
        out.warnings.push_back(
            "Phi is semi-definite: short-rate positivity checked on a sample grid only");
    }
    // axis-aligned grid over [-10, 10]^d with ~1e4 points
    int per_dim = d == 1 ? 10000 : d == 2 ? 100 : d == 3 ? 21 : 10;
    std::vector<int> idx(d, 0);
    for (;;) {
        Eigen::VectorXd x(d);
        for (int k = 0; k < d; ++k)
            x(k) = -10.0 + 20.0 * idx[k] / std::max(1, per_dim - 1);
        if (s.rate(x) < -1e-10)
            throw_validation("InvalidParameter", "short rate negative on the check grid");
        int k = 0;
        while (k < d && ++idx[k] >= per_dim) idx[k++] = 0;
        if (k == d) break;
    }
    out.verdict = "valid";
}

void validate_jcir(const JcirSpec& s) {
    if (s.a <= 0 || s.sigma <= 0 || s.varpi <= 0 || s.mu <= 0)
        throw_validation("InvalidParameter", "JCIR requires a, sigma, varpi, mu > 0");
}

}  // namespace

double Diffusion1D::param(const std::string& k) const {
    auto it = params.find(k);
    if (it == params.end())
        throw_validation("InvalidParameter", "missing parameter '" + k + "' for " + name);
    return it->second;
}

double Diffusion1D::mu_d1(double x) const {
    return mu_c.d1 ? mu_c.d1(x) : central_d1(mu_c.f, x, domain);
}
double Diffusion1D::sigma_d1(double x) const {
    return sigma_c.d1 ? sigma_c.d1(x) : central_d1(sigma_c.f, x, domain);
}
double Diffusion1D::sigma_d2(double x) const {
    return sigma_c.d2 ? sigma_c.d2(x) : central_d2(sigma_c.f, x, domain);
}

double Diffusion1D::x_ref() const {
    bool lf = std::isfinite(domain.l), rf = std::isfinite(domain.r);
    if (lf && rf) return 0.5 * (domain.l + domain.r);
    if (lf && !rf) return domain.l + 1.0;
    if (!lf && rf) return domain.r - 1.0;
    return 0.0;
}

ValidatedModel validate_model(const ModelSpec& spec) {
    ValidatedModel out;
    out.spec = spec;
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Diffusion1D>) validate_diffusion(s, out);
            if constexpr (std::is_same_v<T, AffineSpec>) validate_affine(s, out);
            if constexpr (std::is_same_v<T, QtsmSpec>) validate_qtsm(s, out);
            if constexpr (std::is_same_v<T, JcirSpec>) {
                validate_jcir(s);
                out.feller = 2 * s.a >= s.sigma * s.sigma;
            }
        },
        spec);
    return out;
}

ScaleSpeed scale_speed(const Diffusion1D& model, double x) {
    if (!model.contains(x)) throw_validation("OutOfDomain", "x outside the model interior");
    const double xr = model.x_ref();
    double log_s;
    // closed forms for the named families, quadrature otherwise
    if (model.name == "cir" || model.name == "sqrt_absorbing") {
        double a = model.name == "cir" ? model.param("a") : 0.0;
        double b = model.name == "cir" ? -model.param("kappa") : model.param("b");
        double s2 = model.param("sigma") * model.param("sigma");
        double beta = 2 * a / s2;
        log_s = -beta * std::log(x / xr) - 2 * b * (x - xr) / s2;
    } else if (model.name == "vasicek" || model.name == "brownian_rate") {
        double s2 = model.param("sigma") * model.param("sigma");
        if (model.name == "vasicek") {
            double k = model.param("kappa"), th = model.param("theta");
            auto F = [&](double y) { return -(2 * k / s2) * (th * y - 0.5 * y * y); };
            log_s = F(x) - F(xr);
        } else {
            log_s = -2 * model.param("a") * (x - xr) / s2;
        }
    } else if (model.name == "three_halves") {
        double k = model.param("kappa"), th = model.param("theta");
        double s2 = model.param("sigma") * model.param("sigma");
        // 2 mu / sigma^2 = 2 kappa (theta - y) / (sigma^2 y^2)
        auto F = [&](double y) { return (2 * k / s2) * (-th / y - std::log(y)); };
        log_s = -(F(x) - F(xr));
    } else if (model.name == "merton_quadratic") {
        double k = model.param("kappa"), th = model.param("theta");
        double s2 = model.param("sigma") * model.param("sigma");
        auto F = [&](double y) { return (2 * k / s2) * (th * std::log(y) - y); };
        log_s = -(F(x) - F(xr));
    } else {
        auto integrand = [&](double y) {
            double sg = model.sigma(y);
            return 2 * model.mu(y) / (sg * sg);
        };
        log_s = -integrate(integrand, xr, x, 1e-13);
    }
    double s = std::exp(log_s);
    double sg = model.sigma(x);
    return {s, 2.0 / (sg * sg * s)};
}

Diffusion1D make_cir(double a, double kappa, double sigma) {
    Diffusion1D d;
    d.name = "cir";
    d.params = {{"a", a}, {"kappa", kappa}, {"sigma", sigma}};
    d.domain = {0.0, kInf, Boundary::inaccessible, Boundary::inaccessible};
    if (2 * a < sigma * sigma) d.domain.left = Boundary::reflecting;
    d.mu_c = {[a, kappa](double x) { return a - kappa * x; },
              [kappa](double) { return -kappa; }, [](double) { return 0.0; }};
    d.sigma_c = {[sigma](double x) { return sigma * std::sqrt(x); },
                 [sigma](double x) { return 0.5 * sigma / std::sqrt(x); },
                 [sigma](double x) { return -0.25 * sigma / (x * std::sqrt(x)); }};
    d.rate_c = {[](double x) { return x; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
    return d;
}

Diffusion1D make_sqrt_absorbing(double b, double sigma) {
    Diffusion1D d;
    d.name = "sqrt_absorbing";
    d.params = {{"b", b}, {"sigma", sigma}};
    d.domain = {0.0, kInf, Boundary::absorbing, Boundary::inaccessible};
    d.mu_c = {[b](double x) { return b * x; }, [b](double) { return b; },
              [](double) { return 0.0; }};
    d.sigma_c = {[sigma](double x) { return sigma * std::sqrt(x); },
                 [sigma](double x) { return 0.5 * sigma / std::sqrt(x); },
                 [sigma](double x) { return -0.25 * sigma / (x * std::sqrt(x)); }};
    d.rate_c = {[](double x) { return x; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
    return d;
}

Diffusion1D make_vasicek(double kappa, double theta, double sigma) {
    Diffusion1D d;
    d.name = "vasicek";
    d.params = {{"kappa", kappa}, {"theta", theta}, {"sigma", sigma}};
    d.domain = {-kInf, kInf, Boundary::inaccessible, Boundary::inaccessible};
    d.mu_c = {[kappa, theta](double x) { return kappa * (theta - x); },
              [kappa](double) { return -kappa; }, [](double) { return 0.0; }};
    d.sigma_c = {[sigma](double) { return sigma; }, [](double) { return 0.0; },
                 [](double) { return 0.0; }};
    d.rate_c = {[](double x) { return x; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
    return d;
}

Diffusion1D make_three_halves(double kappa, double theta, double sigma) {
    Diffusion1D d;
    d.name = "three_halves";
    d.params = {{"kappa", kappa}, {"theta", theta}, {"sigma", sigma}};
    d.domain = {0.0, kInf, Boundary::inaccessible, Boundary::inaccessible};
    d.mu_c = {[kappa, theta](double x) { return kappa * (theta - x) * x; },
              [kappa, theta](double x) { return kappa * (theta - 2 * x); },
              [kappa](double) { return -2 * kappa; }};
    d.sigma_c = {[sigma](double x) { return sigma * x * std::sqrt(x); },
                 [sigma](double x) { return 1.5 * sigma * std::sqrt(x); },
                 [sigma](double x) { return 0.75 * sigma / std::sqrt(x); }};
    d.rate_c = {[](double x) { return x; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
    return d;
}

Diffusion1D make_merton_quadratic(double kappa, double theta, double sigma) {
    Diffusion1D d;
    d.name = "merton_quadratic";
    d.params = {{"kappa", kappa}, {"theta", theta}, {"sigma", sigma}};
    d.domain = {0.0, kInf, Boundary::inaccessible, Boundary::inaccessible};
    d.mu_c = {[kappa, theta](double x) { return kappa * (theta - x) * x; },
              [kappa, theta](double x) { return kappa * (theta - 2 * x); },
              [kappa](double) { return -2 * kappa; }};
    d.sigma_c = {[sigma](double x) { return sigma * x; }, [sigma](double) { return sigma; },
                 [](double) { return 0.0; }};
    d.rate_c = {[](double x) { return x; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
    return d;
}

Diffusion1D make_brownian_rate(double a, double sigma) {
    Diffusion1D d;
    d.name = "brownian_rate";
    d.params = {{"a", a}, {"sigma", sigma}};
    d.domain = {-kInf, kInf, Boundary::inaccessible, Boundary::inaccessible};
    d.mu_c = {[a](double) { return a; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
    d.sigma_c = {[sigma](double) { return sigma; }, [](double) { return 0.0; },
                 [](double) { return 0.0; }};
    d.rate_c = {[](double x) { return x; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
    return d;
}

Diffusion1D make_reflected_interval(double l, double r, std::vector<double> mu_poly,
                                    std::vector<double> sigma_poly,
                                    std::vector<double> rate_poly) {
    Diffusion1D d;
    d.name = "reflected_interval";
    d.domain = {l, r, Boundary::reflecting, Boundary::reflecting};
    auto second = [](const std::vector<double>& c) {
        std::vector<double> d1;
        for (size_t i = 1; i < c.size(); ++i) d1.push_back(c[i] * static_cast<double>(i));
        std::vector<double> d2;
        for (size_t i = 1; i < d1.size(); ++i) d2.push_back(d1[i] * static_cast<double>(i));
        return d2;
    };
    d.mu_c = {poly_fn(mu_poly), poly_deriv_fn(mu_poly), poly_fn(second(mu_poly))};
    d.sigma_c = {poly_fn(sigma_poly), poly_deriv_fn(sigma_poly), poly_fn(second(sigma_poly))};
    d.rate_c = {poly_fn(rate_poly), poly_deriv_fn(rate_poly), poly_fn(second(rate_poly))};
    return d;
}

Diffusion1D make_custom(Domain domain, Coeff mu, Coeff sigma, Coeff rate) {
    Diffusion1D d;
    d.name = "custom";
    d.domain = domain;
    d.mu_c = std::move(mu);
    d.sigma_c = std::move(sigma);
    d.rate_c = std::move(rate);
    return d;
}

Eigen::MatrixXd AffineSpec::a_jj(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd s = a.bottomRightCorner(n, n);
    for (int i = 0; i < m; ++i) s += x(i) * alpha[i].bottomRightCorner(n, n);
    return s;
}

std::string model_tag(const ModelSpec& spec) {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Diffusion1D>) return s.name;
            if constexpr (std::is_same_v<T, AffineSpec>) return "affine";
            if constexpr (std::is_same_v<T, QtsmSpec>) return "qtsm";
            if constexpr (std::is_same_v<T, JcirSpec>) return "jcir";
        },
        spec);
}

}  // namespace mpk
