#include "mpk/ode.hpp"

#include <algorithm>
#include <cmath>

#include "mpk/errors.hpp"

namespace mpk {

namespace {

// Dormand-Prince coefficients
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// 4th order embedded weights
constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                 e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

}  // namespace

Eigen::VectorXd OdePath::at(double s) const {
    if (t.empty()) throw_numerical("NoConvergence", "empty ODE path");
    if (s <= t.front()) return y.front();
    if (s >= t.back()) return y.back();
    auto it = std::upper_bound(t.begin(), t.end(), s);
    size_t i = static_cast<size_t>(it - t.begin()) - 1;
    double h = t[i + 1] - t[i];
    double u = (s - t[i]) / h;
    double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
    double h10 = u * (1 - u) * (1 - u);
    double h01 = u * u * (3 - 2 * u);
    double h11 = u * u * (u - 1);
    return h00 * y[i] + h10 * h * f[i] + h01 * y[i + 1] + h11 * h * f[i + 1];
}

OdePath integrate_ode(const std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>& rhs,
                      const Eigen::VectorXd& y0, double tau, const OdeOptions& opt) {
    if (tau < 0) throw_validation("InvalidParameter", "ODE horizon must be >= 0");
    OdePath path;
    Eigen::VectorXd y = y0;
    Eigen::VectorXd k1 = rhs(0.0, y);
    path.t.push_back(0.0);
    path.y.push_back(y);
    path.f.push_back(k1);
    if (tau == 0) return path;

    double t = 0.0;
    double h = std::min(1e-3, tau);
    const double n = static_cast<double>(y0.size());
    int steps = 0;

    while (t < tau) {
        if (++steps > opt.max_steps) throw_numerical("NoConvergence", "ODE step limit reached");
        h = std::min(h, tau - t);
        Eigen::VectorXd k2 = rhs(t + c2 * h, y + h * (a21 * k1));
        Eigen::VectorXd k3 = rhs(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
        Eigen::VectorXd k4 = rhs(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        Eigen::VectorXd k5 = rhs(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        Eigen::VectorXd k6 =
            rhs(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        Eigen::VectorXd y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        Eigen::VectorXd k7 = rhs(t + h, y5);
        Eigen::VectorXd y4 =
            y + h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double err = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
            double e = (y5[i] - y4[i]) / sc;
            err += e * e;
        }
        err = std::sqrt(err / std::max(n, 1.0));

        if (!std::isfinite(err) || y5.lpNorm<Eigen::Infinity>() > opt.max_norm) {
            if (h <= 1e-14 * std::max(1.0, tau))
                throw_numerical("BlowUp", "ODE solution exceeds 1e8 (moment explosion)");
            h *= 0.25;
            continue;
        }

        if (err <= 1.0) {
            t += h;
            y = y5;
            k1 = k7;  // FSAL
            path.t.push_back(t);
            path.y.push_back(y);
            path.f.push_back(k1);
        }
        double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
        h *= std::clamp(fac, 0.2, 5.0);
    }
    return path;
}

}  // namespace mpk
