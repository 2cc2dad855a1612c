#pragma once

#include "sktau/forms.hpp"

namespace sktau {

struct LambdaJet {
    cplx v, d1, d2, d3;  // lambda and z-derivatives
};

// Degree-2 function on the torus C*/q^Z with simple poles at p1, p2:
//   lambda(z) = A (s(z/p1) - s(z/p2)) + B,
//   s(x) = x d/dx log theta(x), theta(x) = prod_{n>=0} (1 - q^n x) prod_{n>=1} (1 - q^n / x).
// s(qx) = s(x) - 1, so lambda(qz) = lambda(z).
struct TwoPoleLambda {
    cplx q, p1, p2, A, B;

    LambdaJet jet(cplx z) const;
    MarkedSchottkyGroup group() const;
    // parameter vector (q, p2, A, B); p1 is kept fixed
    std::vector<cplx> params() const { return {q, p2, A, B}; }
    TwoPoleLambda with_params(const std::vector<cplx>& p) const;
};

// Schwarzian of lambda, the projective connection of d lambda
cplx schwarzian(const LambdaJet& j);

struct HurwitzModePoint {
    TwoPoleLambda lambda;
    std::vector<cplx> critical_points;  // zeros of lambda_z in the fundamental domain
    std::vector<cplx> critical_values;  // the coordinates lambda_i
    std::vector<double> radii;          // small circles s_i around the critical points
    int m() const { return int(critical_points.size()); }
    Path s_cycle(int i) const { return Path::circle(critical_points.at(i), radii.at(i)); }
};

// Critical points from a log-polar seed grid and Newton, or tracked from `hint`.
// Throws Error(stratum) when the count differs from the number of poles
// counted with multiplicity (Riemann-Hurwitz on the torus).
HurwitzModePoint hurwitz_mode_point(const TwoPoleLambda& l, const std::vector<cplx>& hint = {},
                                    const std::vector<double>& radii = {});

// d log tau_B / d lambda_i = (i / 12 pi) * integral over s_i of (R_B - S(lambda)) / lambda_z dz
TruncationReport hurwitz_dlog_tau(const HurwitzModePoint& p, const BergmanSeries& bs, int i);

// |(log h~_j)_z(z_j)| at the two poles, h~_j = (z - z_j)^2 lambda_z, from contour coefficients
std::vector<double> pole_residue_defects(const TwoPoleLambda& l, double radius);

struct HurwitzCompatibility {
    double max_residual = 0.0;
    Eigen::MatrixXd residual;
    std::vector<std::vector<cplx>> dlog;  // values at the base point, one per word length used
};

// mixed partials of d log tau_B in the critical values by central differences;
// each stencil point re-solves (q, p2, A, B) by Newton
HurwitzCompatibility hurwitz_compatibility(const TwoPoleLambda& base, double step, int max_word_length);

}  // namespace sktau
