#include "mpk/sl_classifier.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "mpk/errors.hpp"
#include "mpk/quadrature.hpp"

namespace mpk {

namespace {

bool finite_end(const Diffusion1D& m, char end) {
    return std::isfinite(end == 'l' ? m.domain.l : m.domain.r);
}
double end_val(const Diffusion1D& m, char end) { return end == 'l' ? m.domain.l : m.domain.r; }

// geometric grid approaching an endpoint, closest point last
std::vector<double> approach_grid(const Diffusion1D& m, char end) {
    std::vector<double> xs;
    if (finite_end(m, end)) {
        double e = end_val(m, end);
        double scale = std::max(1.0, std::abs(e));
        double gap0 = std::min(0.1 * scale, 0.5 * std::abs(m.x_ref() - e));
        for (int k = 0; k < 44; ++k) {
            double g = gap0 * std::pow(10.0, -0.25 * k);
            if (g < 1e-12 * scale) break;
            xs.push_back(end == 'l' ? e + g : e - g);
        }
    } else {
        double sign = end == 'l' ? -1.0 : 1.0;
        double start = std::max(1.0, 2.0 * std::abs(m.x_ref()));
        for (int k = 0; k <= 32; ++k) xs.push_back(sign * start * std::pow(10.0, 0.25 * k));
    }
    return xs;
}

struct LimitResult {
    enum { finite, plus_inf, minus_inf, undetermined } kind;
    double value = 0;
};

// Limit detection per the numeric policy: +-inf requires |U| past 1e8 with
// monotone growth; finite requires successive-decade agreement under 1e-6.
LimitResult numeric_limit(const std::function<double(double)>& f, const std::vector<double>& xs) {
    std::vector<double> v;
    v.reserve(xs.size());
    for (double x : xs) v.push_back(f(x));
    size_t n = v.size();
    if (n < 9) return {LimitResult::undetermined, 0};
    // one "decade" of approach = 4 grid points (10^{0.25} spacing)
    double last = v[n - 1], prev = v[n - 5], prev2 = v[n - 9];
    bool grow = std::abs(last) > std::abs(prev) && std::abs(prev) > std::abs(prev2);
    if (std::abs(last) > 1e8 && grow)
        return {last > 0 ? LimitResult::plus_inf : LimitResult::minus_inf, 0};
    double scale = std::max(1.0, std::abs(last));
    if (std::abs(last - prev) < 1e-6 * scale && std::abs(prev - prev2) < 1e-6 * scale)
        return {LimitResult::finite, last};
    return {LimitResult::undetermined, 0};
}

TailIntegral probe(const Diffusion1D& m, char end, const std::function<double(double)>& f) {
    double anchor = m.x_ref();
    if (finite_end(m, end)) return probe_boundary_integral(f, anchor, end_val(m, end), false);
    return probe_boundary_integral(f, anchor, end == 'l' ? -1.0 : 1.0, true);
}

// scale and speed densities relative to x_ref (constants cancel in all tests)
std::function<double(double)> scale_fn(const Diffusion1D& m) {
    return [&m](double x) { return scale_speed(m, x).s; };
}
std::function<double(double)> speed_fn(const Diffusion1D& m) {
    return [&m](double x) { return scale_speed(m, x).m; };
}

FellerClass feller_numeric(const Diffusion1D& m, char end) {
    auto s = scale_fn(m);
    auto sp = speed_fn(m);
    TailIntegral A = probe(m, end, s);
    TailIntegral B = probe(m, end, sp);
    if (A.verdict == TailVerdict::inconclusive || B.verdict == TailVerdict::inconclusive)
        throw_numerical("LimitUndetermined", "Feller integrability test inconclusive");
    bool As = A.verdict == TailVerdict::convergent;
    bool Bs = B.verdict == TailVerdict::convergent;
    if (As && Bs) return FellerClass::regular;
    if (!As && !Bs) return FellerClass::natural;
    double anchor = m.x_ref();
    if (!As) {
        // scale diverges: entrance iff D = int m(x) * |int_{x0}^{x} s| < inf
        auto integrand = [&](double x) {
            double inner = std::abs(integrate(s, anchor, x, 1e-10, 44));
            return sp(x) * inner;
        };
        TailIntegral D = probe(m, end, integrand);
        if (D.verdict == TailVerdict::inconclusive)
            throw_numerical("LimitUndetermined", "entrance test inconclusive");
        return D.verdict == TailVerdict::convergent ? FellerClass::entrance : FellerClass::natural;
    }
    // speed diverges: exit iff C = int s(x) * |int_{x0}^{x} m| < inf
    auto integrand = [&](double x) {
        double inner = std::abs(integrate(sp, anchor, x, 1e-10, 44));
        return s(x) * inner;
    };
    TailIntegral C = probe(m, end, integrand);
    if (C.verdict == TailVerdict::inconclusive)
        throw_numerical("LimitUndetermined", "exit test inconclusive");
    return C.verdict == TailVerdict::convergent ? FellerClass::exit_boundary : FellerClass::natural;
}

}  // namespace

LiouvilleData liouville_transform(const Diffusion1D& model) {
    LiouvilleData out;
    const double x0 = model.x_ref();
    auto inv_sigma = [m = model](double z) { return 1.0 / m.sigma(z); };
    out.g = [m = model, x0, inv_sigma](double x) {
        if (!m.contains(x) && x != x0) throw_validation("OutOfDomain", "g(x): x not interior");
        return integrate(inv_sigma, x0, x, 1e-12);
    };
    out.U = [m = model](double x) {
        double s = m.sigma(x), s1 = m.sigma_d1(x), s2 = m.sigma_d2(x);
        double mu = m.mu(x), mu1 = m.mu_d1(x);
        return s1 * s1 / 8.0 - s * s2 / 4.0 + mu * mu / (2.0 * s * s) + 0.5 * mu1 -
               mu * s1 / s + m.rate(x);
    };
    // inverse by monotone bracketing + bisection
    out.g_inv = [g = out.g, x0, dom = model.domain](double y) {
        double lo = x0, hi = x0, step = 1.0;
        auto clamp_in = [&](double v) {
            double eps = 1e-14 * std::max({1.0, std::abs(dom.l), std::abs(dom.r)});
            if (std::isfinite(dom.l) && v <= dom.l) v = dom.l + std::max(eps, 0.25 * (x0 - dom.l));
            if (std::isfinite(dom.r) && v >= dom.r) v = dom.r - std::max(eps, 0.25 * (dom.r - x0));
            return v;
        };
        if (y >= 0) {
            while (g(hi) < y) {
                double nxt = clamp_in(hi + step);
                if (nxt == hi) break;
                hi = nxt;
                step *= 2;
            }
        } else {
            while (g(lo) > y) {
                double nxt = clamp_in(lo - step);
                if (nxt == lo) break;
                lo = nxt;
                step *= 2;
            }
        }
        for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
            double mid = 0.5 * (lo + hi);
            (g(mid) < y ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    out.Q = [ginv = out.g_inv, U = out.U](double y) { return U(ginv(y)); };

    // probe integrates |1/sigma| from x_ref toward the endpoint
    TailIntegral tl = probe(model, 'l', inv_sigma);
    TailIntegral tr = probe(model, 'r', inv_sigma);
    if (tl.verdict == TailVerdict::inconclusive || tr.verdict == TailVerdict::inconclusive)
        throw_numerical("LimitUndetermined", "image of an endpoint under g undetermined");
    out.g_l = tl.verdict == TailVerdict::divergent ? -std::numeric_limits<double>::infinity()
                                                   : -std::abs(tl.value);
    out.g_r = tr.verdict == TailVerdict::divergent ? std::numeric_limits<double>::infinity()
                                                   : std::abs(tr.value);
    return out;
}

FellerClass feller_classify(const Diffusion1D& model, char end) {
    Boundary behavior = end == 'l' ? model.domain.left : model.domain.right;
    if (behavior == Boundary::reflecting) return FellerClass::regular;
    if (behavior == Boundary::absorbing) return FellerClass::absorbing;
    // analytic classifications for the named families
    if (model.name == "cir")
        return end == 'l'
                   ? (2 * model.param("a") >= model.param("sigma") * model.param("sigma")
                          ? FellerClass::entrance
                          : FellerClass::regular)
                   : FellerClass::natural;
    if (model.name == "vasicek" || model.name == "brownian_rate") return FellerClass::natural;
    if (model.name == "three_halves")
        return end == 'l' ? FellerClass::natural : FellerClass::entrance;
    if (model.name == "merton_quadratic")
        return end == 'l' ? FellerClass::natural : FellerClass::entrance;
    if (model.name == "sqrt_absorbing")
        return end == 'l' ? FellerClass::absorbing : FellerClass::natural;
    return feller_numeric(model, end);
}

BoundaryVerdict classify_boundary(const Diffusion1D& model, char end) {
    BoundaryVerdict v;
    v.endpoint = end;
    v.feller_class = feller_classify(model, end);
    if (v.feller_class == FellerClass::exit_boundary)
        throw_validation("InvalidParameter",
                         "exit boundary: the process is not conservative on this domain");
    if (v.feller_class == FellerClass::regular || v.feller_class == FellerClass::entrance ||
        v.feller_class == FellerClass::absorbing) {
        v.oscillation = Oscillation::non_oscillatory;
        return v;
    }

    // natural boundary: image under the Liouville map decides the route
    auto inv_sigma = [&model](double z) { return 1.0 / model.sigma(z); };
    TailIntegral gi = probe(model, end, inv_sigma);
    if (gi.verdict == TailVerdict::inconclusive)
        throw_numerical("LimitUndetermined", "Liouville image of the endpoint undetermined");
    if (gi.verdict == TailVerdict::convergent) {
        v.oscillation = Oscillation::non_oscillatory;
        return v;
    }

    auto xs = approach_grid(model, end);
    auto U = [&model](double x) {
        double s = model.sigma(x), s1 = model.sigma_d1(x), s2 = model.sigma_d2(x);
        double mu = model.mu(x), mu1 = model.mu_d1(x);
        return s1 * s1 / 8.0 - s * s2 / 4.0 + mu * mu / (2.0 * s * s) + 0.5 * mu1 -
               mu * s1 / s + model.rate(x);
    };
    LimitResult lim = numeric_limit(U, xs);
    switch (lim.kind) {
        case LimitResult::plus_inf:
            v.oscillation = Oscillation::non_oscillatory;
            return v;
        case LimitResult::minus_inf:
            v.oscillation = Oscillation::oscillatory_for_all_lambda;
            return v;
        case LimitResult::undetermined:
            throw_numerical("LimitUndetermined",
                            "potential limit does not stabilize over three decades");
        case LimitResult::finite:
            break;
    }
    double cutoff = lim.value;
    if (std::abs(cutoff) < 1e-10) cutoff = 0.0;
    v.oscillation = Oscillation::oscillatory_with_cutoff;
    v.cutoff = cutoff;
    if (cutoff == 0.0) {
        // always non-oscillatory at lambda = 0
        v.subcase = CutoffSubcase::non_oscillatory_at_cutoff;
        return v;
    }
    // subcase from lim g^2 (U - cutoff) against -1/4
    const double anchor = model.x_ref();
    auto w = [&](double x) {
        double g = integrate(inv_sigma, anchor, x, 1e-12);
        return g * g * (U(x) - cutoff);
    };
    LimitResult wl = numeric_limit(w, xs);
    double wval;
    if (wl.kind == LimitResult::finite)
        wval = wl.value;
    else if (wl.kind == LimitResult::plus_inf)
        wval = std::numeric_limits<double>::infinity();
    else if (wl.kind == LimitResult::minus_inf)
        wval = -std::numeric_limits<double>::infinity();
    else {
        // fall back to the closest computed value; ties stay undetermined below
        wval = w(xs.back());
    }
    const double tie_tol = 1e-6;
    if (std::abs(wval + 0.25) <= tie_tol) {
        v.subcase = CutoffSubcase::not_applicable;  // exact tie: undetermined downstream
    } else if (wval > -0.25) {
        v.subcase = CutoffSubcase::non_oscillatory_at_cutoff;
    } else {
        v.subcase = CutoffSubcase::oscillatory_at_cutoff;
    }
    return v;
}

ExistenceVerdict existence_verdict(const Diffusion1D& model) {
    BoundaryVerdict bl = classify_boundary(model, 'l');
    BoundaryVerdict br = classify_boundary(model, 'r');
    ExistenceVerdict out;

    auto osc = [](const BoundaryVerdict& b) {
        return b.oscillation != Oscillation::non_oscillatory;
    };
    int n_osc = (osc(bl) ? 1 : 0) + (osc(br) ? 1 : 0);
    out.category = n_osc == 0 ? SpectralCategory::I
                              : (n_osc == 1 ? SpectralCategory::II : SpectralCategory::III);

    if (bl.feller_class == FellerClass::absorbing || br.feller_class == FellerClass::absorbing) {
        out.principal_exists = Existence::no;
        out.rationale = "absorbing boundary cannot support a recurrent eigen-measure";
        return out;
    }
    if (bl.oscillation == Oscillation::oscillatory_for_all_lambda ||
        br.oscillation == Oscillation::oscillatory_for_all_lambda) {
        out.principal_exists = Existence::no;
        out.rationale = "solutions oscillate for every lambda at an endpoint";
        return out;
    }
    if (n_osc == 0) {
        out.principal_exists = Existence::yes;
        out.rationale = "both boundaries non-oscillatory: purely discrete spectrum";
    } else if (n_osc == 1) {
        const BoundaryVerdict& ob = osc(bl) ? bl : br;
        if (ob.cutoff > 0 && ob.subcase == CutoffSubcase::oscillatory_at_cutoff) {
            out.principal_exists = Existence::yes;
            out.rationale = "oscillatory cutoff with oscillation at the cutoff: "
                            "infinitely many eigenvalues below it";
        } else {
            out.principal_exists = Existence::undetermined;
            out.rationale = "non-oscillatory cutoff: a principal eigenvalue may or may not exist";
        }
    } else {
        double lmin = std::min(bl.cutoff, br.cutoff);
        const BoundaryVerdict& mb = bl.cutoff <= br.cutoff ? bl : br;
        if (lmin > 0 && mb.subcase == CutoffSubcase::oscillatory_at_cutoff) {
            out.principal_exists = Existence::yes;
            out.rationale = "both cutoffs positive and oscillatory at the smaller cutoff";
        } else {
            out.principal_exists = Existence::undetermined;
            out.rationale = "non-oscillatory cutoff: a principal eigenvalue may or may not exist";
        }
    }

    if (out.principal_exists == Existence::yes) {
        if (model.name == "cir") {
            double k = model.param("kappa"), sg = model.param("sigma");
            out.spectral_gap = std::sqrt(k * k + 2 * sg * sg);
        } else if (model.name == "vasicek") {
            out.spectral_gap = std::abs(model.param("kappa"));
        }
    }
    return out;
}

std::string to_string(FellerClass c) {
    switch (c) {
        case FellerClass::regular: return "regular";
        case FellerClass::entrance: return "entrance";
        case FellerClass::exit_boundary: return "exit";
        case FellerClass::natural: return "natural";
        case FellerClass::absorbing: return "absorbing";
    }
    return "?";
}
std::string to_string(Oscillation o) {
    switch (o) {
        case Oscillation::non_oscillatory: return "NonOscillatory";
        case Oscillation::oscillatory_with_cutoff: return "OscillatoryWithCutoff";
        case Oscillation::oscillatory_for_all_lambda: return "OscillatoryForAllLambda";
    }
    return "?";
}
std::string to_string(CutoffSubcase s) {
    switch (s) {
        case CutoffSubcase::oscillatory_at_cutoff: return "oscillatory_at_cutoff";
        case CutoffSubcase::non_oscillatory_at_cutoff: return "non_oscillatory_at_cutoff";
        case CutoffSubcase::not_applicable: return "not_applicable";
    }
    return "?";
}
std::string to_string(SpectralCategory c) {
    switch (c) {
        case SpectralCategory::I: return "I";
        case SpectralCategory::II: return "II";
        case SpectralCategory::III: return "III";
    }
    return "?";
}
std::string to_string(Existence e) {
    switch (e) {
        case Existence::yes: return "yes";
        case Existence::no: return "no";
        case Existence::undetermined: return "undetermined";
    }
    return "?";
}

}  // namespace mpk
