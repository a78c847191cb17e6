#include "mpk/closed_form.hpp"

#include <cmath>
#include <limits>

#include "mpk/errors.hpp"

namespace mpk {

namespace {
constexpr double kNullRecurrentTol = 1e-12;
}

double PiFunction::log_value(double x) const {
    switch (form_) {
        case Form::constant: return 0.0;
        case Form::exp_linear: return u * (x - x_ref);
        case Form::power: return p * (std::log(x) - std::log(x_ref));
        case Form::exp_quadratic: return q * (x * x - x_ref * x_ref) + l * (x - x_ref);
        default: break;
    }
    Eigen::VectorXd v(1);
    v << x;
    return log_value(v);
}

double PiFunction::operator()(double x) const { return std::exp(log_value(x)); }

double PiFunction::dlog(double x) const {
    switch (form_) {
        case Form::constant: return 0.0;
        case Form::exp_linear: return u;
        case Form::power: return p / x;
        case Form::exp_quadratic: return 2 * q * x + l;
        default: throw_numerical("DerivativeUnavailable", "1D derivative of a multi-d form");
    }
}

double PiFunction::ddlog(double x) const {
    switch (form_) {
        case Form::constant: return 0.0;
        case Form::exp_linear: return 0.0;
        case Form::power: return -p / (x * x);
        case Form::exp_quadratic: return 2 * q;
        default: throw_numerical("DerivativeUnavailable", "1D derivative of a multi-d form");
    }
}

double PiFunction::d1(double x) const { return (*this)(x)*dlog(x); }
double PiFunction::d2(double x) const {
    double dl = dlog(x);
    return (*this)(x) * (dl * dl + ddlog(x));
}

double PiFunction::log_value(const Eigen::VectorXd& x) const {
    switch (form_) {
        case Form::exp_affine: return u_vec.dot(x - x_ref_vec);
        case Form::exp_quadratic_multi:
            return -(u_vec.dot(x) + x.dot(V_mat * x)) +
                   (u_vec.dot(x_ref_vec) + x_ref_vec.dot(V_mat * x_ref_vec));
        default:
            if (x.size() != 1)
                throw_numerical("DerivativeUnavailable", "scalar form evaluated on a vector");
            return log_value(x(0));
    }
}

double PiFunction::value(const Eigen::VectorXd& x) const { return std::exp(log_value(x)); }

Eigen::VectorXd PiFunction::grad(const Eigen::VectorXd& x) const {
    double v = value(x);
    switch (form_) {
        case Form::exp_affine: return v * u_vec;
        case Form::exp_quadratic_multi: return -v * (u_vec + 2 * V_mat * x);
        default: {
            Eigen::VectorXd g(1);
            g << d1(x(0));
            return g;
        }
    }
}

Eigen::MatrixXd PiFunction::hess(const Eigen::VectorXd& x) const {
    double v = value(x);
    switch (form_) {
        case Form::exp_affine: return v * (u_vec * u_vec.transpose());
        case Form::exp_quadratic_multi: {
            Eigen::VectorXd w = u_vec + 2 * V_mat * x;
            return v * (w * w.transpose() - 2 * V_mat);
        }
        default: {
            Eigen::MatrixXd h(1, 1);
            h << d2(x(0));
            return h;
        }
    }
}

PiFunction PiFunction::constant() {
    PiFunction f;
    f.form_ = Form::constant;
    return f;
}
PiFunction PiFunction::exp_linear(double u, double x_ref) {
    PiFunction f;
    f.form_ = Form::exp_linear;
    f.u = u;
    f.x_ref = x_ref;
    return f;
}
PiFunction PiFunction::power(double p, double x_ref) {
    PiFunction f;
    f.form_ = Form::power;
    f.p = p;
    f.x_ref = x_ref;
    return f;
}
PiFunction PiFunction::exp_quadratic(double q, double l, double x_ref) {
    PiFunction f;
    f.form_ = Form::exp_quadratic;
    f.q = q;
    f.l = l;
    f.x_ref = x_ref;
    return f;
}
PiFunction PiFunction::exp_affine(Eigen::VectorXd u, Eigen::VectorXd x_ref) {
    PiFunction f;
    f.form_ = Form::exp_affine;
    f.u_vec = std::move(u);
    f.x_ref_vec = std::move(x_ref);
    return f;
}
PiFunction PiFunction::exp_quadratic_multi(Eigen::VectorXd u, Eigen::MatrixXd V,
                                           Eigen::VectorXd x_ref) {
    PiFunction f;
    f.form_ = Form::exp_quadratic_multi;
    f.u_vec = std::move(u);
    f.V_mat = std::move(V);
    f.x_ref_vec = std::move(x_ref);
    return f;
}

std::string PiFunction::form_name() const {
    switch (form_) {
        case Form::constant: return "constant";
        case Form::exp_linear: return "exp_linear";
        case Form::power: return "power";
        case Form::exp_quadratic: return "exp_quadratic";
        case Form::exp_affine: return "exp_affine";
        case Form::exp_quadratic_multi: return "exp_quadratic_multi";
    }
    return "?";
}

std::string to_string(Recurrence r) {
    switch (r) {
        case Recurrence::recurrent: return "recurrent";
        case Recurrence::null_recurrent: return "null_recurrent";
        case Recurrence::transient: return "transient";
        case Recurrence::none: return "none";
    }
    return "?";
}

EigenAnalysis cir_eigen(const Diffusion1D& model) {
    if (model.name != "cir") throw_validation("InvalidParameter", "cir_eigen needs a CIR spec");
    const double a = model.param("a"), kappa = model.param("kappa"), sg = model.param("sigma");
    const double s2 = sg * sg;
    const double gamma = std::sqrt(kappa * kappa + 2 * s2);
    const double xr = model.x_ref();

    EigenSolution rec;
    rec.lambda = a * (gamma - kappa) / s2;
    rec.pi = PiFunction::exp_linear(-(gamma - kappa) / s2, xr);
    rec.q_pi_model = make_cir(a, gamma, sg);
    rec.recurrence = Recurrence::recurrent;
    rec.provenance = "square-root principal eigenfunction";
    rec.source_model = model;

    EigenSolution demo;
    demo.lambda = -a * (kappa + gamma) / s2;
    demo.pi = PiFunction::exp_linear((kappa + gamma) / s2, xr);
    demo.q_pi_model = make_cir(a, -gamma, sg);  // drift a + gamma x: mean-repelling
    demo.recurrence = Recurrence::transient;
    demo.provenance = "square-root transient exponential demonstration";
    demo.source_model = model;

    return {rec, {demo}, "recurrent"};
}

EigenAnalysis sqrt_absorbing_eigen(const Diffusion1D& model) {
    if (model.name != "sqrt_absorbing")
        throw_validation("InvalidParameter", "sqrt_absorbing_eigen needs an absorbing spec");
    const double b = model.param("b"), sg = model.param("sigma");
    const double s2 = sg * sg;
    const double root = std::sqrt(b * b + 2 * s2);
    const double xr = model.x_ref();

    EigenAnalysis out;
    for (double sgn : {+1.0, -1.0}) {
        EigenSolution s;
        s.lambda = 0.0;
        s.pi = PiFunction::exp_linear((-b + sgn * root) / s2, xr);
        s.q_pi_model = make_sqrt_absorbing(sgn * root, sg);
        s.recurrence = Recurrence::transient;
        s.provenance = sgn > 0 ? "absorbing square-root invariant function pi_plus"
                               : "absorbing square-root invariant function pi_minus";
        s.source_model = model;
        out.demonstrations.push_back(std::move(s));
    }
    out.verdict = "none: zero is an absorbing trap under every eigen-measure";
    return out;
}

EigenAnalysis vasicek_eigen(const Diffusion1D& model) {
    if (model.name != "vasicek")
        throw_validation("InvalidParameter", "vasicek_eigen needs a Vasicek spec");
    const double kappa = model.param("kappa"), theta = model.param("theta"),
                 sg = model.param("sigma");
    if (kappa == 0) throw_validation("KappaZero", "use the Brownian-rate verdict");
    const double s2 = sg * sg;
    const double xr = model.x_ref();
    const double theta_pi = theta - s2 / (kappa * kappa);

    EigenAnalysis out;
    if (kappa > 0) {
        EigenSolution rec;
        rec.lambda = theta - s2 / (2 * kappa * kappa);
        rec.pi = PiFunction::exp_linear(-1.0 / kappa, xr);
        rec.q_pi_model = make_vasicek(kappa, theta_pi, sg);
        rec.recurrence = Recurrence::recurrent;
        rec.provenance = "Gaussian principal eigenfunction";
        rec.source_model = model;
        out.recurrent = std::move(rec);

        EigenSolution demo;
        demo.lambda = theta - kappa - s2 / (2 * kappa * kappa);
        demo.pi = PiFunction::exp_quadratic(kappa / s2, 1.0 / kappa - 2 * kappa * theta / s2, xr);
        demo.q_pi_model = make_vasicek(-kappa, theta_pi, sg);  // mean-repelling
        demo.recurrence = Recurrence::transient;
        demo.provenance = "Gaussian transient quadratic-exponent demonstration";
        demo.source_model = model;
        out.demonstrations.push_back(std::move(demo));
    } else {
        EigenSolution rec;
        rec.lambda = theta - kappa - s2 / (2 * kappa * kappa);
        rec.pi = PiFunction::exp_quadratic(kappa / s2, 1.0 / kappa - 2 * kappa * theta / s2, xr);
        rec.q_pi_model = make_vasicek(-kappa, theta_pi, sg);  // -kappa > 0: mean-reverting
        rec.recurrence = Recurrence::recurrent;
        rec.provenance = "Gaussian principal eigenfunction (mean-repelling risk-neutral drift)";
        rec.source_model = model;
        out.recurrent = std::move(rec);
    }
    out.verdict = "recurrent";
    return out;
}

EigenAnalysis three_halves_eigen(const Diffusion1D& model) {
    if (model.name != "three_halves")
        throw_validation("InvalidParameter", "three_halves_eigen needs a 3/2 spec");
    const double kappa = model.param("kappa"), theta = model.param("theta"),
                 sg = model.param("sigma");
    const double s2 = sg * sg;
    const double alpha = kappa / s2 + 1.0;
    const double mu = std::sqrt((kappa / s2 + 0.5) * (kappa / s2 + 0.5) + 2.0 / s2);
    const double kappa_pi = (mu - 0.5) * s2;

    EigenSolution rec;
    rec.lambda = kappa * theta * (mu - alpha + 0.5);
    rec.pi = PiFunction::power(alpha - mu - 0.5, model.x_ref());
    rec.q_pi_model = make_three_halves(kappa_pi, kappa * theta / kappa_pi, sg);
    rec.recurrence = Recurrence::recurrent;
    rec.provenance = "3/2 power principal eigenfunction";
    rec.source_model = model;
    return {rec, {}, "recurrent"};
}

EigenAnalysis merton_quadratic_eigen(const Diffusion1D& model) {
    if (model.name != "merton_quadratic")
        throw_validation("InvalidParameter", "merton_quadratic_eigen needs a quadratic-drift spec");
    const double kappa = model.param("kappa"), theta = model.param("theta"),
                 sg = model.param("sigma");
    const double s2 = sg * sg;
    const double beta = 2 * kappa * theta / s2;
    const double beta_crit = 1.0 + 2.0 / kappa;
    const double theta_pi = theta - s2 / (kappa * kappa);

    EigenSolution sol;
    sol.lambda = theta - (1.0 + kappa) * s2 / (2 * kappa * kappa);
    sol.pi = PiFunction::power(-1.0 / kappa, model.x_ref());
    if (theta_pi > 0) {
        sol.q_pi_model = make_merton_quadratic(kappa, theta_pi, sg);
    } else {
        // transformed long-run level is non-positive; keep the dynamics as a
        // custom diffusion on (0, inf)
        Domain dom{0.0, std::numeric_limits<double>::infinity(), Boundary::inaccessible,
                   Boundary::inaccessible};
        Coeff mu{[kappa, theta_pi](double x) { return kappa * (theta_pi - x) * x; },
                 [kappa, theta_pi](double x) { return kappa * (theta_pi - 2 * x); },
                 [kappa](double) { return -2 * kappa; }};
        Coeff sgm{[sg](double x) { return sg * x; }, [sg](double) { return sg; },
                  [](double) { return 0.0; }};
        Coeff rate{[](double x) { return x; }, [](double) { return 1.0; },
                   [](double) { return 0.0; }};
        sol.q_pi_model = make_custom(dom, mu, sgm, rate);
    }
    sol.source_model = model;
    sol.provenance = "quadratic-drift power eigenfunction";

    EigenAnalysis out;
    if (std::abs(beta - beta_crit) <= kNullRecurrentTol) {
        sol.recurrence = Recurrence::null_recurrent;
        out.recurrent = std::move(sol);
        out.verdict = "null_recurrent";
    } else if (beta > beta_crit) {
        sol.recurrence = Recurrence::recurrent;
        out.recurrent = std::move(sol);
        out.verdict = "recurrent";
    } else {
        sol.recurrence = Recurrence::transient;
        out.demonstrations.push_back(std::move(sol));
        out.verdict = "none: zero is an attracting boundary under the eigen-measure";
    }
    return out;
}

EigenAnalysis jcir_eigen(const JcirSpec& spec) {
    const double s2 = spec.sigma * spec.sigma;
    const double gamma = std::sqrt(spec.kappa * spec.kappa + 2 * s2);
    const double u = (gamma - spec.kappa) / s2;

    EigenSolution rec;
    rec.lambda = spec.a * (gamma - spec.kappa) / s2 + spec.varpi * spec.mu * u / (1 + spec.mu * u);
    rec.pi = PiFunction::exp_linear(-u, 1.0);
    JcirSpec q;
    q.a = spec.a;
    q.kappa = gamma;
    q.sigma = spec.sigma;
    q.varpi = spec.varpi / (1 + u * spec.mu);
    q.mu = spec.mu / (1 + u * spec.mu);
    rec.q_pi_model = q;
    rec.recurrence = Recurrence::recurrent;
    rec.provenance = "jump square-root exponential eigenfunction";
    rec.source_model = spec;
    return {rec, {}, "recurrent"};
}

EigenAnalysis degenerate_verdicts(const Diffusion1D& model) {
    if (model.name != "brownian_rate" &&
        !(model.name == "vasicek" && model.param("kappa") == 0))
        throw_validation("InvalidParameter", "degenerate verdict applies to the Brownian rate");
    EigenAnalysis out;
    out.verdict = "none: Airy-type solutions oscillate at -infinity";
    return out;
}

EigenAnalysis closed_form_eigen(const ValidatedModel& model) {
    if (auto* j = std::get_if<JcirSpec>(&model.spec)) return jcir_eigen(*j);
    if (auto* d = std::get_if<Diffusion1D>(&model.spec)) {
        if (d->name == "cir") return cir_eigen(*d);
        if (d->name == "sqrt_absorbing") return sqrt_absorbing_eigen(*d);
        if (d->name == "vasicek") return vasicek_eigen(*d);
        if (d->name == "three_halves") return three_halves_eigen(*d);
        if (d->name == "merton_quadratic") return merton_quadratic_eigen(*d);
        if (d->name == "brownian_rate") return degenerate_verdicts(*d);
        throw_validation("UnsupportedScheme",
                         "no closed-form eigenfunction for model '" + d->name +
                             "'; use the discretized recovery lab");
    }
    throw_validation("UnsupportedScheme",
                     "closed_form_eigen covers 1D catalog models and JCIR; use the affine or "
                     "quadratic engine");
}

}  // namespace mpk
