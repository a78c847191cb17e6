#pragma once

#include <Eigen/Dense>
#include <string>

#include "mpk/closed_form.hpp"
#include "mpk/models.hpp"

namespace mpk {

// Pricing-kernel eigen-factorization assembled from an eigen solution. The
// path functionals consume (t, state, accumulated integral of r).
struct Factorization {
    double lambda = 0;
    PiFunction pi;
    ModelSpec q_pi_model;
    Recurrence recurrence = Recurrence::none;
    bool unique_recurrent = false;  // at most one factorization of this kind exists

    double eigen_security(double t, double x, double x0) const {
        return std::exp(lambda * t + pi.log_value(x) - pi.log_value(x0));
    }
    double martingale_tilde(double t, double x, double int_r, double x0) const {
        return std::exp(-int_r + lambda * t + pi.log_value(x) - pi.log_value(x0));
    }
    double eigen_security(double t, const Eigen::VectorXd& x, const Eigen::VectorXd& x0) const {
        return std::exp(lambda * t + pi.log_value(x) - pi.log_value(x0));
    }
    double martingale_tilde(double t, const Eigen::VectorXd& x, double int_r,
                            const Eigen::VectorXd& x0) const {
        return std::exp(-int_r + lambda * t + pi.log_value(x) - pi.log_value(x0));
    }
};

// Throws MismatchedModel when the eigen solution was built for another model.
Factorization hs_factorize(const ValidatedModel& model, const EigenSolution& eigen);

// Short rate recovered from (pi, lambda) through the eigen-measure generator:
// r(x) = lambda - G^pi h(x) / h(x) with h = 1/pi.
double recover_short_rate(const EigenSolution& eigen, double x);
double recover_short_rate(const EigenSolution& eigen, const Eigen::VectorXd& x);

// Residual between the reassembled risk-neutral generator
// G^pi f + sigma^2 h' f' / h and the direct 1/2 sigma^2 f'' + mu f' (1D only).
double risk_neutral_generator_check(const EigenSolution& eigen, const Coeff& f, double x);

enum class RecurrenceClass { positive_recurrent, null_recurrent, transient };
std::string to_string(RecurrenceClass c);

struct RecurrenceVerdict {
    RecurrenceClass cls;
    std::string evidence;
};

RecurrenceVerdict recurrence_check_1d(const Diffusion1D& model);
// adds the jump-model rule for JCIR specs
RecurrenceVerdict recurrence_check(const ModelSpec& model);

}  // namespace mpk
