#pragma once

#include <memory>

#include "sktau/deformation.hpp"
#include "sktau/hurwitz.hpp"

namespace sktau {

// Conformal density e^phi |dz|^2 in the Schottky plane chart.
class MetricProvider {
public:
    virtual ~MetricProvider() = default;
    virtual double phi(cplx z) const = 0;
    virtual cplx phi_z(cplx z) const = 0;
    virtual cplx phi_zz(cplx z) const = 0;
    // phi_{z zbar} = 0: the bulk term reduces to boundary integrals
    virtual bool harmonic() const { return false; }
};

// phi = c everywhere (one-chart fixtures)
class ConstantMetric : public MetricProvider {
public:
    explicit ConstantMetric(double c = 0.0) : c_(c) {}
    double phi(cplx) const override { return c_; }
    cplx phi_z(cplx) const override { return 0.0; }
    cplx phi_zz(cplx) const override { return 0.0; }
    bool harmonic() const override { return true; }

private:
    double c_;
};

// Flat metric of the torus C*/q^Z: phi = -2 log|z| + c, with c fixed by a
// quadrature of the area over a fundamental annulus so that the area is 1.
// raw_constant only changes the starting density.
class FlatTorusMetric : public MetricProvider {
public:
    explicit FlatTorusMetric(cplx q, double raw_constant = 0.0);
    double phi(cplx z) const override { return -2.0 * std::log(std::abs(z)) + c_; }
    cplx phi_z(cplx z) const override { return -1.0 / z; }
    cplx phi_zz(cplx z) const override { return 1.0 / (z * z); }
    bool harmonic() const override { return true; }
    double constant() const { return c_; }
    // closed form -log(2 pi log(1/|q|))
    static double unit_area_constant(cplx q);

private:
    double c_;
};

// max over samples of |phi(z) - phi(g z) - log|g'(z)|^2|
double metric_invariance_defect(const MetricProvider& m, const MarkedSchottkyGroup& g, int word_length = 2);

// Phase of h: e^{i theta} = h/|h| and psi = phi - 2 i theta.
class PhaseField {
public:
    PhaseField(std::function<FormJet(cplx)> form, const MetricProvider& metric) : form_(std::move(form)), metric_(metric) {}
    double theta(cplx z) const { return std::arg(form_(z).h); }
    // 2 i theta_z = h_z / h
    cplx theta_z(cplx z) const;
    cplx psi_z(cplx z) const;
    // theta_z by central differences of the unwrapped phase
    cplx theta_z_fd(cplx z, double step = 1e-5) const;

private:
    std::function<FormJet(cplx)> form_;
    const MetricProvider& metric_;
};

struct SingularPoint {
    cplx z;
    int order = 1;  // 1 for a simple zero, -2 for a double pole
    cplx htilde;    // h = (z - z_k)^order htilde near z_k, evaluated at z_k
};

// Everything I needs in one chart: the integration region (a fundamental
// annulus, or a disc for one-chart fixtures), the form and its singular points.
struct PolyakovChart {
    Annulus region;
    bool closed = true;  // annulus sides are paired by the group and their boundary terms cancel
    std::function<FormJet(cplx)> form;
    std::vector<SingularPoint> points;
};

// disc |z - c| < r, not closed: the outer circle contributes its boundary term
PolyakovChart one_chart_disc(std::function<FormJet(cplx)> form, cplx center, double radius,
                             std::vector<SingularPoint> points);
// Phi = dz / (2 pi i z) on C*/q^Z
PolyakovChart genus1_holomorphic_chart(cplx q);
// d lambda of the two-pole function; the fundamental annulus is placed in the
// widest gap between the singular points in log|z|
PolyakovChart genus1_lambda_chart(const HurwitzModePoint& p);
// h~ at a double pole from the contour coefficient (1/2 pi i) int (z - p) h dz
cplx pole_htilde_contour(const std::function<FormJet(cplx)>& form, cplx pole, double radius);

struct PolyakovReport {
    TruncationReport value;                         // delta-extrapolated I
    std::vector<std::pair<double, cplx>> samples;   // (delta, I(delta))
    double halving = 0.0;                           // change of the extrapolated value when the delta grid is halved
    double imaginary = 0.0;                         // |Im I|
    cplx bulk, circles, points;                     // pieces at the smallest delta
};

// I = lim (int_{X_delta} |psi_z|^2 + (i/2) sum_k int_{S_delta} (phi - 2 log|h|)/(zbar - zbar_k) dzbar)
//     - pi sum_k (phi - log|h~_k|)(z_k)
// Throws Error(stratum) for poles or a zero on the region boundary.
PolyakovReport regularized_I(const PolyakovChart& chart, const MetricProvider& metric, const QuadratureConfig& cfg = {});
// adds -i int_{S_delta(z_j)} (...) and +2 pi (phi + 2 log|h~_j|)(z_j) at double poles
PolyakovReport regularized_I_meromorphic(const PolyakovChart& chart, const MetricProvider& metric,
                                         const QuadratureConfig& cfg = {});

// phi_zz - phi_z^2/2 - 2 theta_z^2 - 2 i theta_zz
cplx polyakov_quadratic_differential(const MetricProvider& metric, const FormJet& j, cplx z);

struct ZeroVariation {
    cplx log_htilde_dot;  // d/dw log h~_k
    cplx z_dot;           // d/dw z_k
};

// 2 int (phi_zz - phi_z^2/2 - 2 theta_z^2 - 2 i theta_zz) mu d^2z
//   + pi sum_k (3 fdot_z + 3/2 (log h~_k)dot + 3/2 (log h~_k)_z fdot - 1/2 (log h~_k)_z z_k dot)(z_k)
// The integral runs over the seed disc of mu, which must avoid the singular points.
cplx dI_formula(const PolyakovChart& chart, const MetricProvider& metric, const DeformationField& f,
                const std::vector<ZeroVariation>& zeros);

}  // namespace sktau
