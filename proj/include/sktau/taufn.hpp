#pragma once

#include <functional>
#include <memory>

#include "sktau/forms.hpp"

namespace sktau {

// d log tau_B / d zeta_i = (i / 12 pi) * integral over s_i of (R_B - R_Phi) / h dz
TruncationReport dlog_tau(const HurwitzPoint& p, const BergmanSeries& bs, int i);
std::vector<TruncationReport> dlog_tau_all(const HurwitzPoint& p, const BergmanSeries& bs);

// ---- parameter families --------------------------------------------------

// Holomorphic map from group parameters to normalized marked groups.
// genus 1: (q) with L = z -> q z
// genus 2: (q1, q2, b) with L1 = z -> q1 z, L2 fixing 1 (attracting) and b
// genus g > 2: further triples (a_r, b_r, q_r) for L_r
struct GroupFamily {
    int genus = 0;
    int size = 0;
    std::function<MarkedSchottkyGroup(const std::vector<cplx>&)> make;
};

GroupFamily normalized_family(int genus);
// parameters of a normalized group in normalized_family(genus)
std::vector<cplx> normalized_parameters(const MarkedSchottkyGroup& g);

// A solved point: parameters P = (group parameters, Phi coefficients) and the
// Hurwitz point they produce.
struct ChartPoint {
    std::vector<cplx> params;
    HurwitzPoint point;
    std::shared_ptr<const BergmanSeries> bergman;
    double residual = 0.0;  // |zeta(P) - target|_inf after the solve
    int iterations = 0;
    Eigen::MatrixXcd jac;   // d zeta / d P, Broyden-updated along solves
};

// Coordinates (A, B, Z) near a base point, inverted by damped Newton on the
// parameters. Cycle layout is frozen at the base so that every evaluation uses
// the same quadrature geometry.
class CoordinateChart {
public:
    // fields of `choice` left empty are filled from the base point
    CoordinateChart(GroupFamily family, const std::vector<cplx>& base_params, int max_word_length,
                    CycleChoice choice = {});

    int dimension() const { return int(base_.point.coordinates.size()); }
    int genus() const { return family_.genus; }
    int max_word_length() const { return n_; }
    const ChartPoint& base() const { return base_; }
    const Eigen::MatrixXcd& jacobian() const { return jac_; }

    // evaluate at parameters, zeros tracked from `hint`
    ChartPoint at(const std::vector<cplx>& params, const std::vector<cplx>& hint, bool with_bergman = true) const;
    // parameters with the given coordinates, starting from `start`
    ChartPoint solve(const std::vector<cplx>& zeta, const ChartPoint& start) const;

private:
    GroupFamily family_;
    int n_;
    CycleChoice choice_;
    ChartPoint base_;
    Eigen::MatrixXcd jac_;
};

struct CompatibilityResult {
    double max_residual = 0.0;
    Eigen::MatrixXd residual;          // |d_j F_i - d_i F_j|, entries of requested pairs
    std::vector<std::string> warnings;
    double max_dlog_error = 0.0;       // largest error estimate among the stencil values
};

// central differences in coordinates with step `step`
CompatibilityResult compatibility_check(const CoordinateChart& chart, const ChartPoint& at,
                                        const std::vector<std::pair<int, int>>& pairs, double step);

// ---- path integration ----------------------------------------------------

// piecewise-linear path through coordinate samples
struct CoordinatePath {
    std::vector<std::vector<cplx>> samples;

    static CoordinatePath line(const std::vector<cplx>& a, const std::vector<cplx>& b, int pieces);
    // closed rectangle a -> a + u -> a + u + v -> a + v -> a
    static CoordinatePath rectangle(const std::vector<cplx>& a, const std::vector<cplx>& u,
                                    const std::vector<cplx>& v, int pieces_per_side);
    // max over segments and coordinates of |d zeta_k| / |zeta_k|
    double max_relative_step() const;
};

struct TauValue {
    cplx log_tau{0.0, 0.0};
    cplx tau24{1.0, 0.0};
    double error_estimate = 0.0;
    CoordinatePath path;
    std::vector<cplx> end_params;
};

// Gauss-Legendre with `nodes` points per segment; throws Error(path) when
// consecutive samples differ by more than 5% in some coordinate
TauValue integrate_tau(const CoordinateChart& chart, const CoordinatePath& path, int nodes = 6);
TauValue integrate_tau(const CoordinateChart& chart, const CoordinatePath& path, const ChartPoint& start,
                       int nodes = 6);

// distance of 24 * delta log tau from 2 pi i Z
double holonomy_defect(cplx log_tau_change);

// tau_B = eta(tau)^2
TauValue genus1_tau(cplx tau);
// tau_I^48 = 1 / tau_B^24
cplx isomonodromic_tau48(cplx tau24);

}  // namespace sktau
