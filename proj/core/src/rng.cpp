#include "mpk/rng.hpp"

#include <cmath>
#include <numbers>

#include "mpk/errors.hpp"

namespace mpk::rng {

namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ull;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ull;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ull;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73Bull;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
    unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
}

inline void philox_round(std::array<std::uint64_t, 4>& c, const std::array<std::uint64_t, 2>& k) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

double log_factorial(double k) {
    static const double table[] = {0.0,
                                   0.0,
                                   0.6931471805599453,
                                   1.791759469228055,
                                   3.1780538303479458,
                                   4.787491742782046,
                                   6.579251212010101,
                                   8.525161361065415,
                                   10.60460290274525,
                                   12.801827480081469};
    if (k < 10.0) return table[static_cast<int>(k)];
    double x = k + 1.0;
    return (x - 0.5) * std::log(x) - x + 0.9189385332046727 + 1.0 / (12.0 * x) -
           1.0 / (360.0 * x * x * x);
}

}  // namespace

std::uint64_t Philox::next_u64() {
    if (have_ == 0) {
        std::array<std::uint64_t, 4> c = ctr_;
        std::array<std::uint64_t, 2> k = key_;
        for (int r = 0; r < 10; ++r) {
            philox_round(c, k);
            k[0] += kWeyl0;
            k[1] += kWeyl1;
        }
        buf_ = c;
        have_ = 4;
        if (++ctr_[0] == 0) ++ctr_[1];
    }
    return buf_[4 - have_--];
}

double Philox::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    double u1 = u01();
    double u2 = u01_left();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    cached_normal_ = r * std::sin(a);
    has_cached_normal_ = true;
    return r * std::cos(a);
}

double Philox::exponential(double mean) { return -mean * std::log(u01()); }

double Philox::gamma(double alpha) {
    if (alpha <= 0) throw_numerical("InvalidParameter", "gamma shape must be positive");
    if (alpha < 1.0) {
        // boost the shape by one and thin with U^{1/alpha}
        double g = gamma(alpha + 1.0);
        return g * std::pow(u01(), 1.0 / alpha);
    }
    // Marsaglia-Tsang squeeze
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = normal();
        double t = 1.0 + c * x;
        if (t <= 0) continue;
        double v = t * t * t;
        double u = u01();
        double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

std::uint64_t Philox::poisson(double mean) {
    if (mean < 0) throw_numerical("InvalidParameter", "poisson mean must be >= 0");
    if (mean == 0) return 0;
    if (mean < 30.0) {
        // multiplicative inversion
        const double l = std::exp(-mean);
        std::uint64_t k = 0;
        double p = u01();
        while (p > l) {
            p *= u01();
            ++k;
        }
        return k;
    }
    // Hormann's PTRD transformed rejection (exact for mean >= 10)
    constexpr double log_sqrt_2pi = 0.9189385332046727;
    const double smu = std::sqrt(mean);
    const double b = 0.931 + 2.53 * smu;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        double u;
        double v = u01();
        if (v <= 0.86 * v_r) {
            u = v / v_r - 0.43;
            return static_cast<std::uint64_t>(
                std::floor((2.0 * a / (0.5 - std::abs(u)) + b) * u + mean + 0.445));
        }
        if (v >= v_r) {
            u = u01() - 0.5;
        } else {
            u = v / v_r - 0.93;
            u = (u < 0 ? -0.5 : 0.5) - u;
            v = u01() * v_r;
        }
        const double us = 0.5 - std::abs(u);
        if (us < 0.013 && v > us) continue;
        const double k = std::floor((2.0 * a / us + b) * u + mean + 0.445);
        v = v * inv_alpha / (a / (us * us) + b);
        if (k >= 10.0) {
            if (std::log(v * smu) <= (k + 0.5) * std::log(mean / k) - mean - log_sqrt_2pi + k -
                                         (1.0 / 12.0 - 1.0 / (360.0 * k * k)) / k)
                return static_cast<std::uint64_t>(k);
        } else if (k >= 0.0) {
            if (std::log(v) <= k * std::log(mean) - mean - log_factorial(k))
                return static_cast<std::uint64_t>(k);
        }
    }
}

double Philox::noncentral_chi_squared(double df, double noncentrality) {
    if (df < 0 || noncentrality < 0)
        throw_numerical("InvalidParameter", "noncentral chi-squared needs df, lambda >= 0");
    std::uint64_t n = poisson(0.5 * noncentrality);
    double shape = 0.5 * df + static_cast<double>(n);
    if (shape == 0) return 0.0;
    return 2.0 * gamma(shape);
}

}  // namespace mpk::rng
