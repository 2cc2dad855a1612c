#pragma once

#include <array>

#include <Eigen/Dense>

#include "sktau/numerics.hpp"

namespace sktau {

// Point of upper half-space, metric (dt^2 + |dz|^2) / t^2
struct HPoint {
    double t;
    cplx z;
};

// Fermi coordinates about the core geodesic (the t-axis):
//   t = e^s / cosh u,  z = e^s tanh u e^{i a}
// metric du^2 + cosh^2 u ds^2 + sinh^2 u da^2
struct FermiPoint {
    double s, u, a;
};

HPoint to_half_space(const FermiPoint& f);
FermiPoint to_fermi(const HPoint& p);
// columns d/ds, d/du, d/da in (t, x, y) components
Eigen::Matrix3d fermi_jacobian(const FermiPoint& f);

// Solid torus H^3 / <(t, z) -> (|q| t, q z)> with the flat unit-area boundary metric.
class SolidTorusModel {
public:
    explicit SolidTorusModel(cplx q, int core_rotations = 0);
    static SolidTorusModel from_tau(cplx tau, int core_rotations = 0);

    cplx q() const { return q_; }
    cplx tau() const { return tau_; }
    double core_length() const { return ell_; }  // -log|q|
    double twist() const { return std::arg(q_); }
    int core_rotations() const { return rotations_; }

    // boundary metric e^phi |dz|^2, phi = -2 log|z| + c
    double phi(cplx z) const { return -2.0 * std::log(std::abs(z)) + c_; }
    double phi_constant() const { return c_; }

    // defining function r = 2 e^{c/2} e^{-u}; X^eps = {r = eps} is the tube u = level_u(eps)
    double defining_function(const HPoint& p) const;
    double level_u(double eps) const;
    double level_t(double eps, cplx z) const;
    double eps_max() const;

    // the framing turns from the core frame to the boundary frame for u in [u_a, u_b]
    double u_a() const { return 0.1; }
    double u_b() const { return 0.5; }

    HPoint apply_generator(const HPoint& p) const;
    // pushforward of a tangent vector at p, (t, x, y) components
    Eigen::Vector3d push_generator(const Eigen::Vector3d& v) const;

private:
    cplx q_, tau_;
    double ell_, c_;
    int rotations_;
};

// Pulled-back fundamental and connection forms of the framing s built from
// Phi = dz / (2 pi i z). omega_ij(V) = g(e_i, nabla_V e_j).
class FrameForms {
public:
    explicit FrameForms(const SolidTorusModel& m);

    // columns e1, e2, e3 in (t, x, y) components
    Eigen::Matrix3d frame(const FermiPoint& f) const;
    // frame on the core (u = 0) from the reference framing
    Eigen::Matrix3d core_frame(double s) const;

    // omega_i on the coordinate vector d/dx_k of Fermi coordinates (k = 0, 1, 2 for s, u, a)
    Eigen::Vector3d omega(const FermiPoint& f, int k) const;
    Eigen::Matrix3d connection(const FermiPoint& f, int k) const;
    // same for the core framing along d/ds
    Eigen::Vector3d core_omega(double s) const;
    Eigen::Matrix3d core_connection(double s) const;

    // components on d/ds, d/du, d/da
    Eigen::Matrix3d omega_components(const FermiPoint& f) const;              // row i = omega_i
    std::array<Eigen::Matrix3d, 3> connection_components(const FermiPoint& f) const;  // [k](i, j) = omega_ij(d_k)

    // Im C on (d/ds, d/du, d/da) times 4 pi^2, two ways
    double im_c_wedge(const FermiPoint& f) const;  // o12^o13^o23 - o12^o1^o2 - o13^o1^o3 - o23^o2^o3
    double im_c_exact(const FermiPoint& f) const;  // d o23 ^ o23 - d o1 ^ o1
    // o1^o2^o3 on (d/ds, d/du, d/da)
    double volume_density(const FermiPoint& f) const;
    // o1^o23 + o2^o31 + o3^o12 on (d/da, d/ds)
    double boundary_density(const FermiPoint& f) const;

    // second fundamental form of the tube through p in the basis (e2, e3),
    // from the level-set normal (independent of the framing)
    Eigen::Matrix2d second_fundamental_form(const FermiPoint& f) const;

    const SolidTorusModel& model() const { return m_; }

private:
    Eigen::Matrix3d frame_derivative(const FermiPoint& f, int k) const;
    SolidTorusModel m_;
    Eigen::Matrix3d a0_;
};

// Christoffel term of the half-space metric: nabla_X Y = D_X Y + half_space_gamma(p, X, Y)
Eigen::Vector3d half_space_gamma(double t, const Eigen::Vector3d& x, const Eigen::Vector3d& y);

struct CsEpsilonReport {
    double eps = 0.0;
    cplx value;              // CS^eps
    double volume = 0.0;     // int o1^o2^o3
    double outer = 0.0;      // boundary form over X^eps
    double inner = 0.0;      // limit over shrinking tori around the core
    double im_bulk = 0.0;    // int Im C
    cplx line;               // -(1/2 pi) int_core (theta_1 - i theta_23)
    double w_volume = 0.0;   // Vol(M^eps) - 1/4 int H dvol, computed from the geometry alone
    double error_estimate = 0.0;
};

CsEpsilonReport cs_epsilon(const SolidTorusModel& m, double eps, const QuadratureConfig& cfg = {});

struct CsReport {
    cplx value;            // CS = lim (CS^eps + (2/pi)(g - 1) log eps)
    cplx exp4pi;           // exp(4 pi CS)
    double im_mod_half = 0.0;
    TruncationReport limit;
    std::vector<CsEpsilonReport> samples;
};

CsReport cs_invariant(const SolidTorusModel& m, const QuadratureConfig& cfg = {});
// pi^2 Re CS
double w_volume(const SolidTorusModel& m, const QuadratureConfig& cfg = {});

}  // namespace sktau
