#include "mpk/pde.hpp"

#include <algorithm>
#include <cmath>

#include "mpk/closed_form.hpp"
#include "mpk/errors.hpp"

namespace mpk {

TridiagOperator discretize_generator(const Diffusion1D& model, const std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    const double h = x[1] - x[0];
    TridiagOperator L{std::vector<double>(n, 0), std::vector<double>(n, 0),
                      std::vector<double>(n, 0)};
    for (int i = 0; i < n; ++i) {
        double xi = x[i];
        bool left_edge = i == 0, right_edge = i == n - 1;
        Boundary beh = left_edge ? model.domain.left : model.domain.right;
        if ((left_edge || right_edge) && beh == Boundary::absorbing) {
            L.diag[i] = -model.rate(xi);  // value frozen up to its own discount
            continue;
        }
        double s2 = model.sigma(xi);
        s2 *= s2;
        double mu = model.mu(xi);
        double r = model.rate(xi);
        if (left_edge || right_edge) {
            // zero-flux ghost: f' = 0, f_xx ~ 2 (f_in - f_e) / h^2
            int in = left_edge ? 1 : n - 2;
            double c = s2 / (h * h);
            L.diag[i] = -c - r;
            (left_edge ? L.upper : L.lower)[i] = c;
            // one-sided drift transport into the domain keeps the entrance
            // flow when sigma vanishes at the edge
            double adv = left_edge ? mu : -mu;
            if (adv > 0) {
                (left_edge ? L.upper : L.lower)[i] += adv / h;
                L.diag[i] -= adv / h;
            }
            (void)in;
            continue;
        }
        double diff = s2 / (h * h);
        if (s2 >= h * std::abs(mu)) {  // central differences
            L.lower[i] = 0.5 * diff - 0.5 * mu / h;
            L.upper[i] = 0.5 * diff + 0.5 * mu / h;
            L.diag[i] = -diff - r;
        } else if (mu > 0) {  // upwind
            L.lower[i] = 0.5 * diff;
            L.upper[i] = 0.5 * diff + mu / h;
            L.diag[i] = -diff - mu / h - r;
        } else {
            L.lower[i] = 0.5 * diff - mu / h;
            L.upper[i] = 0.5 * diff;
            L.diag[i] = -diff + mu / h - r;
        }
    }
    return L;
}

namespace {

// Thomas solve of (I - c L) v = rhs
void solve_cn(const TridiagOperator& L, double c, std::vector<double>& rhs) {
    const int n = static_cast<int>(rhs.size());
    std::vector<double> a(n), b(n), cc(n);
    for (int i = 0; i < n; ++i) {
        a[i] = -c * L.lower[i];
        b[i] = 1.0 - c * L.diag[i];
        cc[i] = -c * L.upper[i];
    }
    for (int i = 1; i < n; ++i) {
        double w = a[i] / b[i - 1];
        b[i] -= w * cc[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= b[n - 1];
    for (int i = n - 2; i >= 0; --i) rhs[i] = (rhs[i] - cc[i] * rhs[i + 1]) / b[i];
}

std::vector<double> march(const TridiagOperator& L, std::vector<double> f, double T, int n_time) {
    const int n = static_cast<int>(f.size());
    const double dt = T / n_time;
    std::vector<double> rhs(n);
    for (int step = 0; step < n_time; ++step) {
        for (int i = 0; i < n; ++i) {
            double lf = (i > 0 ? L.lower[i] * f[i - 1] : 0.0) + L.diag[i] * f[i] +
                        (i + 1 < n ? L.upper[i] * f[i + 1] : 0.0);
            rhs[i] = f[i] + 0.5 * dt * lf;
        }
        solve_cn(L, 0.5 * dt, rhs);
        f = rhs;
    }
    return f;
}

}  // namespace

double PdeResult::value_at(double x) const {
    if (grid.empty()) throw_numerical("GridTooCoarse", "empty PDE grid");
    if (x <= grid.front()) return values.front();
    if (x >= grid.back()) return values.back();
    auto it = std::upper_bound(grid.begin(), grid.end(), x);
    size_t i = static_cast<size_t>(it - grid.begin());
    double w = (x - grid[i - 1]) / (grid[i] - grid[i - 1]);
    return (1 - w) * values[i - 1] + w * values[i];
}

std::optional<std::pair<double, double>> stationary_moments(const Diffusion1D& m) {
    if (m.name == "cir") {
        double a = m.param("a"), k = m.param("kappa"), sg = m.param("sigma");
        if (k <= 0) return std::nullopt;
        return std::make_pair(a / k, std::sqrt(a * sg * sg / (2 * k * k)));
    }
    if (m.name == "vasicek") {
        double k = m.param("kappa"), th = m.param("theta"), sg = m.param("sigma");
        if (k <= 0) return std::nullopt;
        return std::make_pair(th, sg / std::sqrt(2 * k));
    }
    if (m.name == "three_halves") {
        double k = m.param("kappa"), th = m.param("theta"), sg = m.param("sigma");
        double shape = 2 * k / (sg * sg) + 2, scale = 2 * k * th / (sg * sg);
        double mean = scale / (shape - 1);
        double var = scale * scale / ((shape - 1) * (shape - 1) * (shape - 2));
        return std::make_pair(mean, std::sqrt(var));
    }
    if (m.name == "merton_quadratic") {
        double k = m.param("kappa"), th = m.param("theta"), sg = m.param("sigma");
        double beta = 2 * k * th / (sg * sg);
        if (beta <= 1) return std::nullopt;
        double scale = sg * sg / (2 * k);
        return std::make_pair((beta - 1) * scale, std::sqrt(beta - 1) * scale);
    }
    return std::nullopt;
}

std::pair<double, double> default_truncation(const Diffusion1D& model, double T,
                                             double center_hint) {
    if (std::isfinite(model.domain.l) && std::isfinite(model.domain.r))
        return {model.domain.l, model.domain.r};

    std::optional<std::pair<double, double>> mom;
    // prefer the eigen-measure stationary law when a closed form exists
    try {
        ValidatedModel vm = validate_model(ModelSpec{model});
        EigenAnalysis ea = closed_form_eigen(vm);
        if (ea.recurrent) {
            if (auto* q = std::get_if<Diffusion1D>(&ea.recurrent->q_pi_model))
                mom = stationary_moments(*q);
        }
    } catch (const Error&) {
    }
    if (!mom) mom = stationary_moments(model);

    double lo, hi;
    if (mom) {
        lo = mom->first - 8 * mom->second;
        hi = mom->first + 8 * mom->second;
        // keep the evaluation point comfortably inside
        double pad = 2 * mom->second;
        lo = std::min(lo, center_hint - pad);
        hi = std::max(hi, center_hint + pad);
    } else {
        // quantile-style heuristic around the evaluation point
        double sg = model.sigma(std::max(center_hint, model.domain.l + 1e-3) == center_hint
                                    ? center_hint
                                    : model.domain.l + 1e-3);
        double spread = 8 * sg * std::sqrt(std::max(T, 1.0)) +
                        std::abs(model.mu(center_hint == 0 ? 1e-3 : center_hint)) * T;
        lo = center_hint - spread;
        hi = center_hint + spread;
    }
    if (std::isfinite(model.domain.l)) lo = std::max(lo, model.domain.l);
    if (std::isfinite(model.domain.r)) hi = std::min(hi, model.domain.r);
    if (!(lo < hi)) throw_numerical("GridTooCoarse", "degenerate truncation window");
    // keep strictly inside an open singular endpoint where sigma vanishes
    if (std::isfinite(model.domain.l) && lo <= model.domain.l &&
        model.domain.left == Boundary::inaccessible) {
        double span = hi - model.domain.l;
        lo = model.domain.l + 1e-6 * span;
    }
    return {lo, hi};
}

PdeResult pde_price_1d(const Diffusion1D& model, const std::function<double(double)>& payoff,
                       double T, const PdeGrid& cfg) {
    const int n = cfg.n_space;
    if (n < 3) throw_validation("GridTooCoarse", "need at least 3 space points");
    auto [lo, hi] = [&] {
        if (cfg.x_lo && cfg.x_hi) return std::pair<double, double>{*cfg.x_lo, *cfg.x_hi};
        return default_truncation(model, T, cfg.center_hint);
    }();

    PdeResult out;
    out.grid.resize(n);
    for (int i = 0; i < n; ++i) out.grid[i] = lo + (hi - lo) * i / (n - 1);
    std::vector<double> f0(n);
    for (int i = 0; i < n; ++i) f0[i] = payoff(out.grid[i]);
    if (T == 0) {
        out.values = f0;
        return out;
    }

    TridiagOperator L = discretize_generator(model, out.grid);
    std::vector<double> fine = march(L, f0, T, cfg.n_time);
    std::vector<double> coarse = march(L, f0, T, std::max(1, cfg.n_time / 2));
    double err = 0;
    for (int i = n / 10; i < n - n / 10; ++i)
        err = std::max(err, std::abs(fine[i] - coarse[i]) / 3.0);
    out.values = std::move(fine);
    out.error_estimate = err;
    return out;
}

}  // namespace mpk
