#pragma once

#include <memory>

#include <Eigen/Dense>

#include "sktau/schottky.hpp"

namespace sktau {

// value of a holomorphic form h(z) dz together with h' and h''
struct FormJet {
    cplx h, h1, h2;
    double error = 0.0;  // truncation estimate for h
};

// Normalized holomorphic differentials by Poincare series over cosets of <L_j>.
class HolomorphicBasis {
public:
    HolomorphicBasis(const MarkedSchottkyGroup& g, int max_word_length, bool check_delta = true);

    int genus() const { return group_.genus; }
    int max_word_length() const { return max_length_; }
    const MarkedSchottkyGroup& group() const { return group_; }

    // normalized omega_j and derivatives, arrays of length genus (any may be null)
    void eval(cplx z, cplx* w, cplx* w1, cplx* w2, double* err = nullptr) const;
    std::vector<cplx> values(cplx z) const;
    FormJet combine(const std::vector<cplx>& coeffs, cplx z) const;
    void raw(cplx z, int j, cplx& h, cplx& h1, cplx& h2, double& err) const;

    const Eigen::MatrixXcd& raw_a_periods() const { return raw_periods_; }
    double normalization_residual() const { return norm_residual_; }
    double delta() const { return delta_; }

private:
    // 1/(z - a) - 1/(z - b) with diff = a - b taken from the matrix; a or b
    // may be absent when it sits at infinity
    struct Pole {
        cplx a, b, diff;
        bool has_a, has_b;
    };
    MarkedSchottkyGroup group_;
    int max_length_;
    std::vector<std::vector<Pole>> poles_;
    std::vector<std::vector<std::size_t>> shells_;  // start index of each shell, plus end
    Eigen::MatrixXcd raw_periods_, inv_;
    double norm_residual_ = 0.0;
    double delta_ = 0.0;
};

// Sum over the group of gamma'(w)/(z - gamma w)^2 and the regular part R_B.
class BergmanSeries {
public:
    BergmanSeries(const MarkedSchottkyGroup& g, int max_word_length);
    TruncationReport bidifferential(cplx z, cplx w) const;
    TruncationReport projective_connection(cplx z) const;
    const WordTable& table() const { return table_; }

private:
    WordTable table_;
    std::vector<std::size_t> shells_;
};

// S(h) = h''/h - 3/2 (h'/h)^2 of the form h dz
cplx projective_connection_of_form(const FormJet& j);

// ---- cycles --------------------------------------------------------------

// How cycle paths are laid out; fixed once and reused when the group moves.
struct CycleChoice {
    std::vector<double> b_angles;                    // start of b_i on C_i, angle about the centre
    std::vector<std::vector<double>> b_breaks;       // grading of each chord, fractions in (0,1)
    std::vector<std::vector<cplx>> l_waypoints;      // interior vertices of l_j
    std::vector<std::vector<double>> l_breaks;       // grading of l_j, fractions of each leg, legs joined by -1
    std::vector<double> zero_radii;                  // radius of the small circle around p_{j+1}
    int panels = 1;                                  // GK15 panels per piece
    int circle_panels = 8;                           // 15 * circle_panels trapezoid nodes on circles
};

Path a_cycle(const MarkedSchottkyGroup& g, int i);
Path b_cycle(const MarkedSchottkyGroup& g, int i, double angle, const std::vector<double>& breaks = {});
// b angles with chords inside the domain, pairwise disjoint
std::vector<double> default_b_angles(const MarkedSchottkyGroup& g);
// break points so that pieces shrink towards the circles
std::vector<double> grade_segment(const MarkedSchottkyGroup& g, cplx a, cplx b);
// fills b_angles and b_breaks when empty
void complete_b_cycles(const MarkedSchottkyGroup& g, CycleChoice& choice);

struct PeriodMatrix {
    Eigen::MatrixXcd tau;
    double a_normalization_residual = 0.0;
    double symmetry_residual = 0.0;
    double min_imag_eigenvalue = 0.0;
};

PeriodMatrix period_matrix(const HolomorphicBasis& basis, CycleChoice choice);
PeriodMatrix period_matrix(const HolomorphicBasis& basis, const std::vector<double>& b_angles);

// fixed-rule nodes on a path with the normalized basis jets there
struct CycleNodes {
    ContourRule rule;
    std::vector<cplx> w, w1, w2;  // node-major, genus values per node
    std::vector<double> err;      // series estimate per node
    std::size_t size() const { return rule.z.size(); }
};

// circles use circle_panels, everything else panels
CycleNodes cycle_nodes(const HolomorphicBasis& basis, const Path& path, const CycleChoice& choice);
bool is_full_circle(const Path& path);
double path_distance(const Path& path, cplx z);

// ---- zeros and coordinates ----------------------------------------------

struct ZeroData {
    cplx z;
    cplx htilde;      // h'(z_k)
    cplx dlog_htilde; // h''(z_k) / (2 h'(z_k))
};

// Zeros of sum_j coeffs_j omega_j in the fundamental domain. With a hint the
// zeros are tracked by Newton from the hinted positions and kept in that order.
std::vector<ZeroData> find_zeros(const HolomorphicBasis& basis, const std::vector<cplx>& coeffs,
                                 const std::vector<cplx>& hint = {});
// argument-principle count over the boundary of the fundamental domain
int count_zeros(const HolomorphicBasis& basis, const std::vector<cplx>& coeffs);

struct HurwitzPoint {
    std::shared_ptr<const HolomorphicBasis> basis;
    std::vector<cplx> coeffs;
    std::vector<ZeroData> zeros;
    CycleChoice choice;
    std::vector<Path> a_paths, b_paths, l_paths, zero_circles;
    std::vector<CycleNodes> b_nodes, l_nodes;
    std::vector<cplx> coordinates;  // A_1..A_g, B_1..B_g, Z_1..Z_{m-1}
    Eigen::MatrixXcd tau;
    double error_estimate = 0.0;

    int genus() const { return basis->genus(); }
    int dimension() const { return int(coordinates.size()); }
    FormJet form(cplx z) const { return basis->combine(coeffs, z); }
    // cycle s_i paired with coordinate i
    Path s_cycle(int i) const;
    // nodes on s_i, reusing the stored b nodes
    CycleNodes s_nodes(int i) const;
};

// choice fields left empty are filled in automatically from this point
HurwitzPoint hurwitz_coordinates(std::shared_ptr<const HolomorphicBasis> basis, const std::vector<cplx>& coeffs,
                                 CycleChoice choice = {}, const std::vector<cplx>& zero_hint = {});

}  // namespace sktau
