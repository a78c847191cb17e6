#include "mpk/quadrature.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace mpk {

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(const std::function<double(double)>& f, double a, double fa, double b, double fb,
                double m, double fm, double whole, double tol, int depth) {
    if (!std::isfinite(whole)) return whole;
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(a, fa, m, fm, flm);
    double right = simpson(m, fm, b, fb, frm);
    if (!std::isfinite(left + right)) return left + right;
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tol,
                 int max_depth) {
    if (a == b) return 0.0;
    double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
    double whole = simpson(a, fa, b, fb, fm);
    return adaptive(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

TailIntegral probe_boundary_integral(const std::function<double(double)>& f, double from,
                                     double endpoint, bool endpoint_is_infinite) {
    // Window edges t_k approach the endpoint geometrically.
    std::vector<double> edges;
    edges.push_back(from);
    if (endpoint_is_infinite) {
        double sign = endpoint > 0 ? 1.0 : -1.0;
        double t = std::max(1.0, 2.0 * std::abs(from));
        while (t <= 1e8) {
            edges.push_back(sign * t);
            t *= 2.0;
        }
    } else {
        double gap = std::abs(endpoint - from);
        double g = gap;
        while (g >= 1e-8 * std::max(1.0, std::abs(endpoint))) {
            g *= 0.5;
            edges.push_back(endpoint + (from > endpoint ? g : -g));
        }
    }

    double total = 0.0;
    std::vector<double> increments;
    increments.reserve(edges.size());
    for (size_t i = 0; i + 1 < edges.size(); ++i) {
        double inc = integrate(f, edges[i], edges[i + 1], 1e-12, 40);
        if (!std::isfinite(inc)) return {TailVerdict::divergent, total};
        total += inc;
        increments.push_back(std::abs(inc));
        if (std::abs(total) > 1e12) return {TailVerdict::divergent, total};
        // early exit once the tail is clearly negligible
        size_t n = increments.size();
        if (n >= 4 && increments[n - 1] < 1e-13 * (1.0 + std::abs(total)) &&
            increments[n - 2] < 1e-13 * (1.0 + std::abs(total)))
            return {TailVerdict::convergent, total};
    }

    size_t n = increments.size();
    if (n < 5) return {TailVerdict::inconclusive, total};
    // examine the last 4 refinements
    bool non_decreasing = true;
    bool shrinking = true;
    for (size_t i = n - 4; i < n; ++i) {
        if (increments[i] < 0.99 * increments[i - 1]) non_decreasing = false;
        if (increments[i] > 0.9 * increments[i - 1]) shrinking = false;
    }
    if (non_decreasing && increments[n - 1] > 1e-13 * (1.0 + std::abs(total)))
        return {TailVerdict::divergent, total};
    if (shrinking || increments[n - 1] < 1e-10 * (1.0 + std::abs(total))) {
        // geometric tail estimate
        double q = increments[n - 1] / std::max(increments[n - 2], 1e-300);
        double tail = q < 1.0 ? increments[n - 1] * q / (1.0 - q) : 0.0;
        return {TailVerdict::convergent, total + tail};
    }
    return {TailVerdict::inconclusive, total};
}

}  // namespace mpk
