#include "mpk/recovery.hpp"

#include <algorithm>
#include <cmath>

#include "mpk/bonds.hpp"
#include "mpk/closed_form.hpp"
#include "mpk/errors.hpp"
#include "mpk/pde.hpp"

namespace mpk {

namespace {

// tridiagonal LU of (I - c L), reusable across right-hand sides
struct TridiagFactor {
    std::vector<double> sub, diag, sup;

    TridiagFactor(const TridiagOperator& L, double c) {
        const std::size_t n = L.diag.size();
        sub.resize(n);
        diag.resize(n);
        sup.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            sub[i] = -c * L.lower[i];
            diag[i] = 1.0 - c * L.diag[i];
            sup[i] = -c * L.upper[i];
        }
        for (std::size_t i = 1; i < n; ++i) {
            sub[i] /= diag[i - 1];
            diag[i] -= sub[i] * sup[i - 1];
        }
    }
    void solve(Eigen::Ref<Eigen::VectorXd> v) const {
        const std::size_t n = diag.size();
        for (std::size_t i = 1; i < n; ++i) v[i] -= sub[i] * v[i - 1];
        v[n - 1] /= diag[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) v[i] = (v[i] - sup[i] * v[i + 1]) / diag[i];
    }
};

double power_iteration(const Eigen::MatrixXd& A, Eigen::VectorXd& v, int max_iters, double tol,
                       bool& converged) {
    double theta = 0;
    converged = false;
    for (int it = 0; it < max_iters; ++it) {
        Eigen::VectorXd w = A * v;
        theta = w.lpNorm<1>() / v.lpNorm<1>();
        Eigen::VectorXd vn = w / w.lpNorm<1>();
        double res = (A * vn - theta * vn).lpNorm<Eigen::Infinity>();
        v = vn;
        if (res <= tol * theta) {
            converged = true;
            return theta;
        }
    }
    return theta;
}

}  // namespace

std::vector<double> make_grid(const Diffusion1D& model, int n) {
    if (n < 3) throw_validation("GridTooCoarse", "need at least 3 grid points");
    auto [lo, hi] = default_truncation(model, 1.0, model.x_ref());
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
    return g;
}

DiscretePricingOperator discretize_pricing_operator(const Diffusion1D& model,
                                                    const std::vector<double>& grid, double dt) {
    const int n = static_cast<int>(grid.size());
    if (n < 3 || n > 4000) throw_validation("GridTooCoarse", "grid size out of range");
    if (dt <= 0) throw_validation("InvalidParameter", "dt must be positive");

    TridiagOperator L = discretize_generator(model, grid);
    TridiagFactor lu(L, 0.5 * dt);

    DiscretePricingOperator out;
    out.grid = grid;
    out.dt = dt;
    out.A.resize(n, n);
    // columns of (I - dt/2 L)^{-1} (I + dt/2 L)
    Eigen::VectorXd col(n);
    for (int j = 0; j < n; ++j) {
        col.setZero();
        col(j) = 1.0 + 0.5 * dt * L.diag[j];
        if (j > 0) col(j - 1) = 0.5 * dt * L.upper[j - 1];
        if (j + 1 < n) col(j + 1) = 0.5 * dt * L.lower[j + 1];
        lu.solve(col);
        out.A.col(j) = col;
    }

    double worst = 0;
    for (int i = 0; i < n; ++i) {
        double neg = 0, pos = 0;
        for (int j = 0; j < n; ++j) {
            double v = out.A(i, j);
            (v < 0 ? neg : pos) += std::abs(v);
        }
        if (pos <= 0) throw_numerical("GridTooCoarse", "vanishing row mass");
        worst = std::max(worst, neg / pos);
    }
    out.clipped_mass = worst;
    if (worst > 1e-6)
        throw_numerical("GridTooCoarse",
                        "negative Crank-Nicolson mass " + std::to_string(worst) +
                            " exceeds 1e-6 of row mass; shrink dt or refine the grid");
    out.A = out.A.cwiseMax(0.0);
    return out;
}

bool is_irreducible(const Eigen::MatrixXd& A) {
    const int n = static_cast<int>(A.rows());
    if (n == 0 || A.cols() != n) return false;
    auto bfs = [n](const Eigen::MatrixXd& M) {
        std::vector<char> seen(n, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        int count = 1;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int v = 0; v < n; ++v)
                if (!seen[v] && M(u, v) > 0) {
                    seen[v] = 1;
                    ++count;
                    stack.push_back(v);
                }
        }
        return count == n;
    };
    return bfs(A) && bfs(A.transpose());
}

DiscretePricingOperator build_state_prices(const Eigen::MatrixXd& P, const Eigen::VectorXd& pi,
                                           double lambda, double dt) {
    const int n = static_cast<int>(P.rows());
    if (P.cols() != n || pi.size() != n)
        throw_validation("InvalidParameter", "dimension mismatch");
    for (int i = 0; i < n; ++i) {
        if (pi(i) <= 0) throw_validation("InvalidParameter", "pi must be strictly positive");
        double rs = P.row(i).sum();
        if (P.row(i).minCoeff() < 0 || std::abs(rs - 1.0) > 1e-10)
            throw_validation("InvalidParameter", "P must be a stochastic matrix");
    }
    if (!is_irreducible(P)) throw_validation("NotIrreducible", "P is reducible");

    DiscretePricingOperator out;
    out.dt = dt;
    out.grid.resize(n);
    for (int i = 0; i < n; ++i) out.grid[i] = i;
    out.A = std::exp(-lambda * dt) *
            (pi.asDiagonal() * P * pi.cwiseInverse().asDiagonal());
    return out;
}

RecoveryResult perron_recover(const DiscretePricingOperator& op) {
    const Eigen::MatrixXd& A = op.A;
    const int n = static_cast<int>(A.rows());
    if (A.minCoeff() < 0) throw_validation("InvalidParameter", "state prices must be >= 0");
    if (!is_irreducible(A)) throw_validation("NotIrreducible", "state-price matrix is reducible");

    Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / n);
    bool converged = false;
    double theta = power_iteration(A, v, 300, 1e-14, converged);
    if (!converged) {
        // Rayleigh-shifted inverse iteration from the power-iteration seed
        for (int it = 0; it < 200 && !converged; ++it) {
            double rho = theta * (1.0 + 1e-10);
            Eigen::MatrixXd S = A - rho * Eigen::MatrixXd::Identity(n, n);
            Eigen::PartialPivLU<Eigen::MatrixXd> lu(S);
            Eigen::VectorXd w = lu.solve(v);
            if (!w.allFinite()) break;
            v = w.cwiseAbs() / w.lpNorm<1>();
            theta = v.dot(A * v) / v.squaredNorm();
            double res = (A * v - theta * v).lpNorm<Eigen::Infinity>();
            converged = res <= 1e-14 * theta;
        }
        if (!converged) {
            // final long power sweep before giving up
            theta = power_iteration(A, v, 100000, 1e-14, converged);
        }
    }
    if (!converged)
        throw_numerical("NoConvergence", "Perron iteration did not reach tolerance");
    if (v.minCoeff() <= 0)
        throw_numerical("DegenerateGap", "dominant eigenvector is not strictly positive");

    RecoveryResult out;
    out.pi = v / v.maxCoeff();
    out.lambda = -std::log(theta) / op.dt;
    out.P = std::exp(out.lambda * op.dt) *
            (out.pi.cwiseInverse().asDiagonal() * A * out.pi.asDiagonal());

    // modulus of the second eigenvalue from deflated power iterations; the
    // left Perron vector drives the deflation
    Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / n);
    bool wconv = false;
    power_iteration(A.transpose(), w, 2000, 1e-12, wconv);
    double wpi = w.dot(out.pi);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
    y(0) = 1.0;
    y -= out.pi * (w.dot(y) / wpi);
    double log_growth = 0;
    int samples = 0;
    for (int it = 0; it < 600; ++it) {
        Eigen::VectorXd z = A * y - theta * out.pi * (w.dot(A * y) / wpi);
        double nz = z.norm();
        if (nz < 1e-290) {  // strictly rank-one A: no second eigenvalue mass
            samples = 0;
            break;
        }
        if (it >= 500) {
            log_growth += std::log(nz / y.norm());
            ++samples;
        }
        y = z / nz;
        y -= out.pi * (w.dot(y) / wpi);  // re-deflate against drift
    }
    double theta2 = samples > 0 ? std::exp(log_growth / samples) : 0.0;
    out.perron_gap = theta - theta2;
    if (theta2 > (1.0 - 1e-12) * theta)
        throw_numerical("DegenerateGap", "second eigenvalue modulus within 1e-12 of the Perron root");
    return out;
}

AsymptoticsReport long_term_asymptotics(const ModelSpec& model, const std::vector<double>& x_list,
                                        const std::vector<double>& maturities) {
    if (maturities.size() < 3)
        throw_validation("InsufficientMaturities", "need at least 3 maturities");
    if (x_list.empty()) throw_validation("InvalidParameter", "need at least one state");
    std::vector<double> ts = maturities;
    std::sort(ts.begin(), ts.end());

    const std::size_t nx = x_list.size(), nt = ts.size();
    Eigen::MatrixXd logp(nx, nt);
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < nt; ++j)
            logp(i, j) = std::log(bond_price(model, x_list[i], ts[j]));

    AsymptoticsReport rep;
    rep.lambda_hat = -(logp(0, nt - 1) - logp(0, nt - 2)) / (ts[nt - 1] - ts[nt - 2]);
    double lambda_prev = -(logp(0, nt - 2) - logp(0, nt - 3)) / (ts[nt - 2] - ts[nt - 3]);
    rep.converged = std::abs(rep.lambda_hat - lambda_prev) <=
                    1e-3 * std::max(1e-12, std::abs(rep.lambda_hat));
    if (!rep.converged) rep.note = "yield slope still drifting at the largest maturities";

    rep.pi_ratio.resize(nx, nx);
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < nx; ++j)
            rep.pi_ratio(i, j) = std::exp(logp(i, nt - 1) - logp(j, nt - 1));

    // decay-rate fit against the closed-form eigenvalue when one exists
    try {
        ValidatedModel vm = validate_model(model);
        EigenAnalysis ea = closed_form_eigen(vm);
        if (ea.recurrent) {
            double lam = ea.recurrent->lambda;
            double tmax = ts[nt - 1];
            double chat = std::exp(lam * tmax + logp(0, nt - 1));
            std::vector<double> xs, ys;
            for (std::size_t j = 0; j < nt; ++j) {
                if (ts[j] < 0.2 * tmax || ts[j] > 0.6 * tmax) continue;
                double resid = std::exp(lam * ts[j] + logp(0, j)) - chat;
                if (std::abs(resid) < 1e-13 * chat) continue;
                xs.push_back(ts[j]);
                ys.push_back(std::log(std::abs(resid)));
            }
            if (xs.size() >= 3) {
                double mx = 0, my = 0;
                for (std::size_t k = 0; k < xs.size(); ++k) {
                    mx += xs[k];
                    my += ys[k];
                }
                mx /= xs.size();
                my /= ys.size();
                double sxy = 0, sxx = 0;
                for (std::size_t k = 0; k < xs.size(); ++k) {
                    sxy += (xs[k] - mx) * (ys[k] - my);
                    sxx += (xs[k] - mx) * (xs[k] - mx);
                }
                rep.alpha_hat = -sxy / sxx;
            }
        }
    } catch (const Error&) {
        // no closed form: alpha_hat stays empty
    }
    return rep;
}

}  // namespace mpk
