#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "mpk/models.hpp"

namespace mpk {

// Closed-form positive eigenfunction, normalized so pi(x_ref) = 1.
class PiFunction {
public:
    enum class Form { constant, exp_linear, power, exp_quadratic, exp_affine, exp_quadratic_multi };

    Form form() const { return form_; }
    bool multivariate() const {
        return form_ == Form::exp_affine || form_ == Form::exp_quadratic_multi;
    }

    double operator()(double x) const;
    double log_value(double x) const;
    double d1(double x) const;
    double d2(double x) const;

    double value(const Eigen::VectorXd& x) const;
    double log_value(const Eigen::VectorXd& x) const;
    Eigen::VectorXd grad(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd hess(const Eigen::VectorXd& x) const;

    static PiFunction constant();
    // exp(u (x - x_ref))
    static PiFunction exp_linear(double u, double x_ref);
    // (x / x_ref)^p
    static PiFunction power(double p, double x_ref);
    // exp(q (x^2 - x_ref^2) + l (x - x_ref))
    static PiFunction exp_quadratic(double q, double l, double x_ref);
    // exp(u . (x - x_ref))
    static PiFunction exp_affine(Eigen::VectorXd u, Eigen::VectorXd x_ref);
    // exp(-(u . x + x . V x)) normalized at x_ref
    static PiFunction exp_quadratic_multi(Eigen::VectorXd u, Eigen::MatrixXd V,
                                          Eigen::VectorXd x_ref);

    // raw coefficients for reports
    double u = 0, p = 0, q = 0, l = 0, x_ref = 0;
    Eigen::VectorXd u_vec, x_ref_vec;
    Eigen::MatrixXd V_mat;
    std::string form_name() const;

private:
    Form form_ = Form::constant;
    double dlog(double x) const;   // (log pi)'
    double ddlog(double x) const;  // (log pi)''
};

enum class Recurrence { recurrent, null_recurrent, transient, none };
std::string to_string(Recurrence r);

struct EigenSolution {
    double lambda = 0;
    PiFunction pi;
    ModelSpec q_pi_model;   // dynamics of X under the eigen-measure
    Recurrence recurrence = Recurrence::none;
    std::string provenance;
    ModelSpec source_model;  // risk-neutral model the solution was built for
};

struct EigenAnalysis {
    std::optional<EigenSolution> recurrent;       // unique recurrent solution, if one exists
    std::vector<EigenSolution> demonstrations;    // explicit non-recurrent eigenfunctions
    std::string verdict;                          // "recurrent" | "null_recurrent" | "none: ..."
};

EigenAnalysis cir_eigen(const Diffusion1D& model);
EigenAnalysis sqrt_absorbing_eigen(const Diffusion1D& model);
EigenAnalysis vasicek_eigen(const Diffusion1D& model);
EigenAnalysis three_halves_eigen(const Diffusion1D& model);
EigenAnalysis merton_quadratic_eigen(const Diffusion1D& model);
EigenAnalysis jcir_eigen(const JcirSpec& spec);
// Brownian-rate model (or Vasicek with kappa = 0): no positive eigenfunction
EigenAnalysis degenerate_verdicts(const Diffusion1D& model);

// dispatch over every catalog model with a closed form
EigenAnalysis closed_form_eigen(const ValidatedModel& model);

}  // namespace mpk
