#include "mpk/factorization.hpp"

#include <cmath>

#include "mpk/errors.hpp"
#include "mpk/quadrature.hpp"

namespace mpk {

namespace {

bool same_dimension(const ModelSpec& a, const ModelSpec& b) {
    return model_tag(a) == model_tag(b);
}

// named-family recurrence rules; exact beta comparisons use 1e-12
RecurrenceVerdict recurrence_named(const Diffusion1D& m) {
    if (m.name == "cir") {
        double kappa = m.param("kappa"), sg = m.param("sigma"), a = m.param("a");
        double beta = 2 * a / (sg * sg);
        if (kappa > 0)
            return {RecurrenceClass::positive_recurrent,
                    "Gamma-integrable speed density with mean reversion"};
        if (kappa == 0)
            return beta > 1 ? RecurrenceVerdict{RecurrenceClass::transient,
                                                "squared Bessel with dimension above 2"}
                            : RecurrenceVerdict{RecurrenceClass::null_recurrent,
                                                "squared Bessel with dimension at most 2"};
        return {RecurrenceClass::transient, "scale integral converges at +inf (repelling drift)"};
    }
    if (m.name == "sqrt_absorbing")
        return {RecurrenceClass::transient, "absorbing state at zero"};
    if (m.name == "vasicek") {
        return m.param("kappa") > 0
                   ? RecurrenceVerdict{RecurrenceClass::positive_recurrent,
                                       "Gaussian stationary density"}
                   : RecurrenceVerdict{RecurrenceClass::transient,
                                       "mean-repelling drift: scale integral converges"};
    }
    if (m.name == "brownian_rate")
        return m.param("a") == 0
                   ? RecurrenceVerdict{RecurrenceClass::null_recurrent,
                                       "driftless Brownian motion"}
                   : RecurrenceVerdict{RecurrenceClass::transient, "drifting Brownian motion"};
    if (m.name == "three_halves")
        return {RecurrenceClass::positive_recurrent, "inverse-Gamma stationary density"};
    if (m.name == "merton_quadratic") {
        double kappa = m.param("kappa"), th = m.param("theta"), sg = m.param("sigma");
        double beta = 2 * kappa * th / (sg * sg);
        if (std::abs(beta - 1.0) <= 1e-12)
            return {RecurrenceClass::null_recurrent,
                    "speed mass diverges logarithmically at zero (beta = 1)"};
        if (beta > 1)
            return {RecurrenceClass::positive_recurrent, "Gamma stationary density (beta > 1)"};
        return {RecurrenceClass::transient, "zero attracting (beta < 1)"};
    }
    throw_validation("UnsupportedScheme", "no named recurrence rule for " + m.name);
}

}  // namespace

std::string to_string(RecurrenceClass c) {
    switch (c) {
        case RecurrenceClass::positive_recurrent: return "positive_recurrent";
        case RecurrenceClass::null_recurrent: return "null_recurrent";
        case RecurrenceClass::transient: return "transient";
    }
    return "?";
}

Factorization hs_factorize(const ValidatedModel& model, const EigenSolution& eigen) {
    if (!same_dimension(model.spec, eigen.source_model))
        throw_validation("MismatchedModel",
                         "eigen solution was computed for model '" +
                             model_tag(eigen.source_model) + "', got '" +
                             model_tag(model.spec) + "'");
    Factorization f;
    f.lambda = eigen.lambda;
    f.pi = eigen.pi;
    f.q_pi_model = eigen.q_pi_model;
    f.recurrence = eigen.recurrence;
    f.unique_recurrent = eigen.recurrence == Recurrence::recurrent ||
                         eigen.recurrence == Recurrence::null_recurrent;
    return f;
}

double recover_short_rate(const EigenSolution& eigen, double x) {
    if (auto* d = std::get_if<Diffusion1D>(&eigen.q_pi_model)) {
        // h = 1/pi: G^pi h / h = 1/2 sigma^2 (2 (pi'/pi)^2 - pi''/pi) - mu^pi pi'/pi
        double lp = eigen.pi.d1(x) / eigen.pi(x);
        double lpp = eigen.pi.d2(x) / eigen.pi(x);
        double sg = d->sigma(x);
        double g_h = 0.5 * sg * sg * (2 * lp * lp - lpp) - d->mu(x) * lp;
        return eigen.lambda - g_h;
    }
    if (auto* j = std::get_if<JcirSpec>(&eigen.q_pi_model)) {
        // h = e^{u x}; the jump part contributes what the exponential moment
        // of the transformed Levy measure adds to the drift of h
        double u = -eigen.pi.u;  // pi = e^{-u x}
        double umu = u * j->mu;
        if (umu >= 1)
            throw_numerical("DerivativeUnavailable",
                            "exponential moment of the jump measure diverges");
        double s2 = j->sigma * j->sigma;
        double g_h = 0.5 * s2 * x * u * u + (j->a - j->kappa * x) * u +
                     j->varpi * umu / (1 - umu);
        return eigen.lambda - g_h;
    }
    Eigen::VectorXd xv(1);
    xv << x;
    return recover_short_rate(eigen, xv);
}

double recover_short_rate(const EigenSolution& eigen, const Eigen::VectorXd& x) {
    if (auto* s = std::get_if<AffineSpec>(&eigen.q_pi_model)) {
        // h = e^{-u.x}
        Eigen::VectorXd u = eigen.pi.u_vec;
        Eigen::MatrixXd alpha_x = s->a;
        for (int i = 0; i < s->m; ++i) alpha_x += x(i) * s->alpha[i];
        Eigen::VectorXd drift = s->b + s->B * x;
        double g_h = 0.5 * u.dot(alpha_x * u) - drift.dot(u);
        return eigen.lambda - g_h;
    }
    if (auto* s = std::get_if<QtsmSpec>(&eigen.q_pi_model)) {
        // h = e^{u.x + x.Vx}: grad log h = u + 2Vx
        Eigen::VectorXd w = eigen.pi.u_vec + 2.0 * eigen.pi.V_mat * x;
        Eigen::MatrixXd a = s->a();
        Eigen::VectorXd drift = s->b + s->B * x;
        double g_h = 0.5 * (w.dot(a * w)) + (a * eigen.pi.V_mat).trace() + drift.dot(w);
        return eigen.lambda - g_h;
    }
    if (x.size() == 1) return recover_short_rate(eigen, x(0));
    throw_validation("UnsupportedScheme", "short-rate recovery needs drift/vol dynamics");
}

double risk_neutral_generator_check(const EigenSolution& eigen, const Coeff& f, double x) {
    auto* qp = std::get_if<Diffusion1D>(&eigen.q_pi_model);
    auto* src = std::get_if<Diffusion1D>(&eigen.source_model);
    if (!qp || !src)
        throw_validation("UnsupportedScheme", "carre-du-champ check is 1D only");
    double f1 = f.d1 ? f.d1(x) : (f.f(x + 1e-6) - f.f(x - 1e-6)) / 2e-6;
    double f2 = f.d2 ? f.d2(x) : (f.f(x + 1e-6) - 2 * f.f(x) + f.f(x - 1e-6)) / 1e-12;
    double sg = qp->sigma(x);
    double lp = eigen.pi.d1(x) / eigen.pi(x);
    // G^pi f + Gamma^pi(h,f)/h with Gamma^pi(h,f) = sigma^2 h' f', h = 1/pi
    double reassembled = 0.5 * sg * sg * f2 + qp->mu(x) * f1 + sg * sg * (-lp) * f1;
    double direct = 0.5 * src->sigma(x) * src->sigma(x) * f2 + src->mu(x) * f1;
    double scale = std::abs(reassembled) + std::abs(direct) + 1.0;
    return std::abs(reassembled - direct) / scale;
}

RecurrenceVerdict recurrence_check_1d(const Diffusion1D& model) {
    if (model.name != "custom" && model.name != "reflected_interval")
        return recurrence_named(model);
    if (model.name == "reflected_interval")
        return {RecurrenceClass::positive_recurrent,
                "reflecting boundaries on a compact interval"};

    // numeric route: scale integrability at non-reflecting endpoints decides
    // transience; total speed mass splits positive vs null recurrence
    auto sfn = [&model](double x) { return scale_speed(model, x).s; };
    auto mfn = [&model](double x) { return scale_speed(model, x).m; };
    const double anchor = model.x_ref();
    std::string evidence;
    for (char end : {'l', 'r'}) {
        Boundary beh = end == 'l' ? model.domain.left : model.domain.right;
        if (beh == Boundary::reflecting) continue;
        if (beh == Boundary::absorbing)
            return {RecurrenceClass::transient, "absorbing endpoint"};
        double e = end == 'l' ? model.domain.l : model.domain.r;
        TailIntegral ti = std::isfinite(e)
                              ? probe_boundary_integral(sfn, anchor, e, false)
                              : probe_boundary_integral(sfn, anchor, end == 'l' ? -1 : 1, true);
        if (ti.verdict == TailVerdict::inconclusive)
            throw_numerical("QuadratureInconclusive", "scale integral test inconclusive");
        if (ti.verdict == TailVerdict::convergent)
            return {RecurrenceClass::transient,
                    std::string("scale integral converges at the ") +
                        (end == 'l' ? "left" : "right") + " endpoint"};
    }
    evidence = "scale integral diverges at every non-reflecting endpoint";
    double mass = 0;
    bool mass_finite = true;
    for (char end : {'l', 'r'}) {
        double e = end == 'l' ? model.domain.l : model.domain.r;
        TailIntegral ti = std::isfinite(e)
                              ? probe_boundary_integral(mfn, anchor, e, false)
                              : probe_boundary_integral(mfn, anchor, end == 'l' ? -1 : 1, true);
        if (ti.verdict == TailVerdict::inconclusive)
            throw_numerical("QuadratureInconclusive", "speed mass test inconclusive");
        if (ti.verdict == TailVerdict::divergent) mass_finite = false;
        mass += std::abs(ti.value);
    }
    if (mass_finite)
        return {RecurrenceClass::positive_recurrent, evidence + "; speed mass finite"};
    return {RecurrenceClass::null_recurrent, evidence + "; speed mass infinite"};
}

RecurrenceVerdict recurrence_check(const ModelSpec& model) {
    if (auto* d = std::get_if<Diffusion1D>(&model)) return recurrence_check_1d(*d);
    if (auto* j = std::get_if<JcirSpec>(&model)) {
        if (j->kappa > 0)
            return {RecurrenceClass::positive_recurrent,
                    "mean-reverting jump square-root model has a limiting distribution"};
        return {RecurrenceClass::transient, "non-mean-reverting jump square-root model"};
    }
    throw_validation("UnsupportedScheme", "recurrence check covers 1D diffusions and JCIR");
}

}  // namespace mpk
