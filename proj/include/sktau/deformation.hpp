#pragma once

#include <Eigen/Dense>

#include "sktau/schottky.hpp"
#include "sktau/taufn.hpp"

namespace sktau {

// amplitude * (1 - |z-c|^2/r^2)^power inside the disc, 0 outside
struct BumpSeed {
    cplx center;
    double radius = 0.0;
    cplx amplitude{0.0, 0.0};
    int power = 4;

    cplx operator()(cplx z) const;
};

// Gamma-invariant extension mu(gz) conj(g'(z)) / g'(z) = mu(z) of a seed
// supported inside the fundamental domain.
class BeltramiDifferential {
public:
    // throws Error(domain) when the seed disc is not strictly inside the domain or sup|mu| >= 1
    BeltramiDifferential(const MarkedSchottkyGroup& g, const BumpSeed& seed);

    cplx operator()(cplx z) const;
    cplx seed(cplx z) const { return seed_(z); }
    const BumpSeed& bump() const { return seed_; }
    const MarkedSchottkyGroup& group() const { return domain_.group(); }
    double sup() const { return std::abs(seed_.amplitude); }
    BeltramiDifferential scaled(cplx a) const;

private:
    FundamentalDomain domain_;
    BumpSeed seed_;
};

struct FDotJet {
    cplx f, fz, fzz;
};

// First-order deformation fdot(z) = -(1/pi) int mu(zeta) z(z-1) / (zeta(zeta-1)(zeta-z)) d^2zeta,
// summed over translates gS of the seed disc S. Shells of translates are added
// until the largest chordal diameter in a shell drops below 1e-8.
class DeformationField {
public:
    explicit DeformationField(const BeltramiDifferential& mu, int max_word_length = 12);

    TruncationReport value(cplx z) const;
    // holomorphic jet, valid away from every translate of the support
    FDotJet jet(cplx z) const;
    // d fdot / d zbar by central differences
    cplx dbar(cplx z, double h = 1e-5) const;

    const BeltramiDifferential& beltrami() const { return mu_; }
    int translates() const { return int(elements_.size()); }
    int word_length_used() const { return length_used_; }

private:
    struct Node {
        cplx zeta, weight;  // weight = mu(u) g'(u)^2 d^2u at zeta = g(u)
    };
    BeltramiDifferential mu_;
    std::vector<MoebiusMap> elements_;
    std::vector<Node> far_;     // translates other than the identity
    std::vector<Node> near_;    // identity translate, fine rule
    int length_used_ = 0;
    double tail_ = 0.0;

    cplx inside_support(cplx z) const;
};

// First-order generator velocity: L(w) = exp(w X) L + O(w^2), X in sl2, with
// vector field v(u) = x12 + 2 x11 u - x21 u^2 = fdot(u) - L'(L^-1 u) fdot(L^-1 u).
struct GeneratorVelocity {
    Eigen::Matrix2cd X;
    double fit_residual = 0.0;  // max misfit of v over the sample points
};

std::vector<GeneratorVelocity> generator_velocities(const DeformationField& f);
// dq/dw of the multiplier along exp(w X) L
cplx multiplier_velocity(const MoebiusMap& L, const Eigen::Matrix2cd& X);
MoebiusMap exp_times(const Eigen::Matrix2cd& X, cplx w, const MoebiusMap& L);

// Generators exp(w X_r) L_r renormalized to the 0 / infinity / 1 convention.
// Throws Error(domain) when |w| sup|mu| > 0.1 and Error(not_loxodromic) when
// the step is too large for the generators to stay loxodromic.
MarkedSchottkyGroup deformed_group(const MarkedSchottkyGroup& g, const DeformationField& f, cplx w);
MarkedSchottkyGroup deformed_group(const MarkedSchottkyGroup& g, const DeformationField& f, cplx w,
                                   const std::vector<GeneratorVelocity>& v);

// max over samples of |f_w(L_r z) - L_r(w)(f_w(z))| with f_w = id + w fdot and
// L_r(w) = exp(w X_r) L_r
double conjugation_defect(const DeformationField& f, const std::vector<GeneratorVelocity>& v, int r, cplx w);

// ---- variation of the tau function ---------------------------------------

struct TauVariation {
    cplx lhs;              // d log tau_B^24 / dw by differences of coordinates
    cplx rhs;              // integral term plus zero terms
    cplx integral;         // (4/pi) int (R_B - R_Phi) mu d^2z
    std::vector<cplx> zero_terms;
    std::vector<cplx> zeta_dot;
    double relative = 0.0; // |lhs - rhs| / |rhs|
};

// The chart base must be the group of the field. Central differences at
// w = +-step and +-step/2 combined by Richardson.
TauVariation tau_variation_check(const CoordinateChart& chart, const DeformationField& f, double step = 1e-3);

}  // namespace sktau
