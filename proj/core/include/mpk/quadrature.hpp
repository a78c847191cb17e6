#pragma once

#include <functional>

namespace mpk {

// Adaptive Simpson on a finite interval.
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12,
                 int max_depth = 50);

enum class TailVerdict { convergent, divergent, inconclusive };

struct TailIntegral {
    TailVerdict verdict;
    double value;  // partial integral over the probed windows (meaningful when convergent)
};

// Integral of f over windows approaching `endpoint` from `from` (an interior
// anchor). Windows shrink/grow geometrically; the integral reaches within
// 10^-8 of a finite endpoint or out to 10^8 for an infinite one. Divergence is
// declared on sustained growth of the window increments across 4 refinements.
TailIntegral probe_boundary_integral(const std::function<double(double)>& f, double from,
                                     double endpoint, bool endpoint_is_infinite);

}  // namespace mpk
