#pragma once

#include <functional>
#include <optional>
#include <string>

#include "mpk/models.hpp"

namespace mpk {

// Liouville normal form of the pricing SL equation: y = g(x), potential
// U(x) = (sigma')^2/8 - sigma sigma''/4 + mu^2/(2 sigma^2) + mu'/2
//        - mu sigma'/sigma + r.
struct LiouvilleData {
    std::function<double(double)> g;        // x -> y, strictly increasing
    std::function<double(double)> g_inv;    // y -> x on the computed range
    std::function<double(double)> U;        // potential in x
    std::function<double(double)> Q;        // potential in y, Q(g(x)) = U(x)
    double g_l, g_r;                        // images of the endpoints (+-inf allowed)
};

LiouvilleData liouville_transform(const Diffusion1D& model);

enum class FellerClass { regular, entrance, exit_boundary, natural, absorbing };
enum class Oscillation { non_oscillatory, oscillatory_with_cutoff, oscillatory_for_all_lambda };
enum class CutoffSubcase { oscillatory_at_cutoff, non_oscillatory_at_cutoff, not_applicable };

struct BoundaryVerdict {
    char endpoint;  // 'l' or 'r'
    FellerClass feller_class;
    Oscillation oscillation;
    double cutoff = 0;  // valid when oscillatory_with_cutoff; always >= 0
    CutoffSubcase subcase = CutoffSubcase::not_applicable;
};

enum class SpectralCategory { I, II, III };
enum class Existence { yes, no, undetermined };

struct ExistenceVerdict {
    SpectralCategory category;
    Existence principal_exists;
    std::optional<double> spectral_gap;  // known gaps for named models
    std::string rationale;
};

FellerClass feller_classify(const Diffusion1D& model, char end);
BoundaryVerdict classify_boundary(const Diffusion1D& model, char end);
ExistenceVerdict existence_verdict(const Diffusion1D& model);

std::string to_string(FellerClass c);
std::string to_string(Oscillation o);
std::string to_string(CutoffSubcase s);
std::string to_string(SpectralCategory c);
std::string to_string(Existence e);

}  // namespace mpk
