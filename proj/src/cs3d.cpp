#include "sktau/cs3d.hpp"

#include <algorithm>

#include "sktau/polyakov.hpp"

namespace sktau {

using Eigen::Matrix3d;
using Eigen::Vector3d;

HPoint to_half_space(const FermiPoint& f)
{
    double R = std::exp(f.s);
    return {R / std::cosh(f.u), std::polar(R * std::tanh(f.u), f.a)};
}

FermiPoint to_fermi(const HPoint& p)
{
    double r = std::abs(p.z);
    return {std::log(std::hypot(p.t, r)), std::asinh(r / p.t), std::arg(p.z)};
}

Matrix3d fermi_jacobian(const FermiPoint& f)
{
    double R = std::exp(f.s), C = std::cosh(f.u), S = std::sinh(f.u);
    double ca = std::cos(f.a), sa = std::sin(f.a), r = R * S / C;
    Matrix3d J;
    J.col(0) << R / C, r * ca, r * sa;
    J.col(1) << -R * S / (C * C), R / (C * C) * ca, R / (C * C) * sa;
    J.col(2) << 0.0, -r * sa, r * ca;
    return J;
}

Vector3d half_space_gamma(double t, const Vector3d& x, const Vector3d& y)
{
    // metric e^{2f} delta with f = -log t
    Vector3d out = -(x(0) * y + y(0) * x) / t;
    out(0) += x.dot(y) / t;
    return out;
}

// ---- model ---------------------------------------------------------------

SolidTorusModel::SolidTorusModel(cplx q, int core_rotations) : q_(q), rotations_(core_rotations)
{
    if (!(std::abs(q) > 0.0 && std::abs(q) < 1.0)) throw Error(ErrorKind::domain, "solid torus needs 0 < |q| < 1");
    tau_ = std::log(q) / (2.0 * pi * I);
    ell_ = -std::log(std::abs(q));
    c_ = FlatTorusMetric(q).constant();
}

SolidTorusModel SolidTorusModel::from_tau(cplx tau, int core_rotations)
{
    if (!(tau.imag() > 0)) throw Error(ErrorKind::domain, "Im tau must be positive");
    SolidTorusModel m(std::exp(2.0 * pi * I * tau), core_rotations);
    m.tau_ = tau;
    return m;
}

double SolidTorusModel::defining_function(const HPoint& p) const
{
    return 2.0 * std::exp(0.5 * c_) * std::exp(-to_fermi(p).u);
}

double SolidTorusModel::level_u(double eps) const
{
    if (!(eps > 0)) throw Error(ErrorKind::domain, "eps must be positive");
    return std::log(2.0 * std::exp(0.5 * c_) / eps);
}

double SolidTorusModel::level_t(double eps, cplx z) const { return std::abs(z) / std::sinh(level_u(eps)); }

double SolidTorusModel::eps_max() const { return 2.0 * std::exp(0.5 * c_) * std::exp(-u_b()); }

HPoint SolidTorusModel::apply_generator(const HPoint& p) const { return {std::abs(q_) * p.t, q_ * p.z}; }

Vector3d SolidTorusModel::push_generator(const Vector3d& v) const
{
    cplx w = q_ * cplx(v(1), v(2));
    return {std::abs(q_) * v(0), w.real(), w.imag()};
}

// ---- frame ---------------------------------------------------------------

namespace {

double smooth_step(double x)
{
    if (x <= 0) return 0.0;
    if (x >= 1) return 1.0;
    double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

// (unit d/ds, unit d/du, unit d/da): tangent to the core, radial, angular
Matrix3d fermi_frame(const FermiPoint& f)
{
    double R = std::exp(f.s), C = std::cosh(f.u), S = std::sinh(f.u);
    double ca = std::cos(f.a), sa = std::sin(f.a);
    Matrix3d G;
    G.col(0) << R / (C * C), R * S * ca / (C * C), R * S * sa / (C * C);
    G.col(1) << -R * S / (C * C), R * ca / (C * C), R * sa / (C * C);
    G.col(2) << 0.0, -R * sa / C, R * ca / C;
    return G;
}

template <class F>
auto central4(const F& g, double h) -> decltype(g(0.0))
{
    return (-g(2 * h) + 8.0 * g(h) - 8.0 * g(-h) + g(-2 * h)) / (12.0 * h);
}

FermiPoint shifted(FermiPoint f, int k, double h)
{
    (k == 0 ? f.s : k == 1 ? f.u : f.a) += h;
    return f;
}

double triple(const Vector3d& a, const Vector3d& b, const Vector3d& c) { return a.dot(b.cross(c)); }

}  // namespace

FrameForms::FrameForms(const SolidTorusModel& m) : m_(m)
{
    // boundary frame (inward normal, d/da, -d/ds) in the basis of fermi_frame
    a0_ << 0, 0, -1, -1, 0, 0, 0, 1, 0;
}

Matrix3d FrameForms::frame(const FermiPoint& f) const
{
    double lam = smooth_step((f.u - m_.u_a()) / (m_.u_b() - m_.u_a()));
    Eigen::AngleAxisd aa(a0_);
    Matrix3d A = Eigen::AngleAxisd(lam * aa.angle(), aa.axis()).toRotationMatrix();
    return fermi_frame(f) * A;
}

Matrix3d FrameForms::core_frame(double s) const
{
    // turns by -arg q + 2 pi n over one period so that it closes up under the generator
    double beta = (-m_.twist() + 2.0 * pi * m_.core_rotations()) * s / m_.core_length();
    double R = std::exp(s), cb = std::cos(beta), sb = std::sin(beta);
    Matrix3d K;
    K.col(0) << R, 0, 0;
    K.col(1) << 0, R * cb, R * sb;
    K.col(2) << 0, -R * sb, R * cb;
    return K;
}

Matrix3d FrameForms::frame_derivative(const FermiPoint& f, int k) const
{
    return central4([&](double h) { return Matrix3d(frame(shifted(f, k, h))); }, 1e-3);
}

Vector3d FrameForms::omega(const FermiPoint& f, int k) const
{
    double t = to_half_space(f).t;
    return frame(f).transpose() * fermi_jacobian(f).col(k) / (t * t);
}

Matrix3d FrameForms::connection(const FermiPoint& f, int k) const
{
    double t = to_half_space(f).t;
    Vector3d V = fermi_jacobian(f).col(k);
    Matrix3d E = frame(f), D = frame_derivative(f, k);
    for (int j = 0; j < 3; ++j) D.col(j) += half_space_gamma(t, V, E.col(j));
    return E.transpose() * D / (t * t);
}

Vector3d FrameForms::core_omega(double s) const
{
    double t = std::exp(s);
    return core_frame(s).transpose() * Vector3d(t, 0, 0) / (t * t);
}

Matrix3d FrameForms::core_connection(double s) const
{
    double t = std::exp(s);
    Vector3d V(t, 0, 0);
    Matrix3d E = core_frame(s);
    Matrix3d D = central4([&](double h) { return Matrix3d(core_frame(s + h)); }, 1e-3);
    for (int j = 0; j < 3; ++j) D.col(j) += half_space_gamma(t, V, E.col(j));
    return E.transpose() * D / (t * t);
}

Matrix3d FrameForms::omega_components(const FermiPoint& f) const
{
    double t = to_half_space(f).t;
    return frame(f).transpose() * fermi_jacobian(f) / (t * t);
}

std::array<Matrix3d, 3> FrameForms::connection_components(const FermiPoint& f) const
{
    return {connection(f, 0), connection(f, 1), connection(f, 2)};
}

double FrameForms::im_c_wedge(const FermiPoint& f) const
{
    Matrix3d w = omega_components(f);
    auto cc = connection_components(f);
    auto form = [&](int i, int j) { return Vector3d(cc[0](i, j), cc[1](i, j), cc[2](i, j)); };
    Vector3d o1 = w.row(0), o2 = w.row(1), o3 = w.row(2);
    Vector3d o12 = form(0, 1), o13 = form(0, 2), o23 = form(1, 2);
    return triple(o12, o13, o23) - triple(o12, o1, o2) - triple(o13, o1, o3) - triple(o23, o2, o3);
}

double FrameForms::im_c_exact(const FermiPoint& f) const
{
    // components of o1 and o23 on the coordinate vectors
    auto comps = [&](const FermiPoint& p) {
        Eigen::Matrix<double, 6, 1> v;
        Matrix3d w = omega_components(p);
        for (int k = 0; k < 3; ++k) {
            v(k) = w(0, k);
            v(3 + k) = connection(p, k)(1, 2);
        }
        return v;
    };
    using V6 = Eigen::Matrix<double, 6, 1>;
    V6 c0 = comps(f);
    std::array<V6, 3> dc;
    for (int k = 0; k < 3; ++k) dc[k] = central4([&](double h) { return V6(comps(shifted(f, k, h))); }, 4e-3);
    // d alpha (i, j) = d_i alpha_j - d_j alpha_i
    auto wedge = [&](int off) {
        auto d = [&](int i, int j) { return dc[i](off + j) - dc[j](off + i); };
        return d(0, 1) * c0(off + 2) - d(0, 2) * c0(off + 1) + d(1, 2) * c0(off + 0);
    };
    return wedge(3) - wedge(0);
}

double FrameForms::volume_density(const FermiPoint& f) const { return omega_components(f).determinant(); }

double FrameForms::boundary_density(const FermiPoint& f) const
{
    Matrix3d w = omega_components(f);
    auto cc = connection_components(f);
    // (alpha ^ beta)(d/da, d/ds)
    auto wedge = [&](const Vector3d& x, const Vector3d& y) { return x(2) * y(0) - x(0) * y(2); };
    auto form = [&](int i, int j) { return Vector3d(cc[0](i, j), cc[1](i, j), cc[2](i, j)); };
    return wedge(w.row(0), form(1, 2)) + wedge(w.row(1), form(2, 0)) + wedge(w.row(2), form(0, 1));
}

Eigen::Matrix2d FrameForms::second_fundamental_form(const FermiPoint& f) const
{
    HPoint p = to_half_space(f);
    // unit normal of the level sets of |z| / t, pointing away from the core
    auto normal = [](const Vector3d& x) {
        double r = std::hypot(x(1), x(2));
        Vector3d g(-r / (x(0) * x(0)), x(1) / (r * x(0)), x(2) / (r * x(0)));
        return Vector3d(x(0) * g / g.norm());
    };
    Vector3d x(p.t, p.z.real(), p.z.imag());
    Matrix3d E = frame(f);
    Vector3d N = normal(x);
    Eigen::Matrix2d II;
    for (int a = 0; a < 2; ++a) {
        Vector3d X = E.col(a + 1);
        Vector3d DN = central4([&](double h) { return Vector3d(normal(x + h * X)); }, 1e-3);
        Vector3d nab = DN + half_space_gamma(p.t, X, N);
        for (int b = 0; b < 2; ++b) II(a, b) = E.col(b + 1).dot(nab) / (p.t * p.t);
    }
    return II;
}

// ---- CS^eps ----------------------------------------------------------------

namespace {

struct Quad {
    double value = 0.0, error = 0.0;
};

// composite Gauss on [lo, hi], doubling the node count until two levels agree
Quad gauss_adaptive(const std::function<double(double)>& g, double lo, double hi, double tol)
{
    auto rule = [&](int n) {
        const GaussRule& r = gauss_legendre(n);
        double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
        std::vector<double> v(n);
        parallel_for(n, [&](std::size_t i) { v[i] = r.w[i] * g(c + h * r.x[i]); });
        return h * pairwise_sum(v);
    };
    double prev = rule(8);
    for (int n = 16; n <= 256; n *= 2) {
        double cur = rule(n);
        if (std::abs(cur - prev) <= tol) return {cur, std::abs(cur - prev)};
        prev = cur;
    }
    throw Error(ErrorKind::numerical, "radial quadrature did not converge");
}

// mean over a small grid of (s, a); the integrands are invariant but we do not assume it
double torus_mean(const std::function<double(double, double)>& g, double ell)
{
    const int ns = 3, na = 4;
    std::vector<double> v;
    for (int j = 0; j < ns; ++j)
        for (int l = 0; l < na; ++l) v.push_back(g(ell * (j + 0.5) / ns, 2 * pi * (l + 0.25) / na));
    return pairwise_sum(v) / v.size();
}

// Vol(M^eps) - 1/4 int_{X^eps} H dvol from the level surface alone
double w_volume_geometric(const SolidTorusModel& m, double eps, double tol)
{
    double psi = std::atan(1.0 / m.level_t(eps, 1.0));
    double lq = std::log(std::abs(m.q()));
    auto shell = [&](const std::function<double(double)>& g) {
        return gauss_adaptive([&](double lr) { return std::exp(lr) * g(std::exp(lr)); }, lq, 0.0, tol).value;
    };
    // volume in spherical coordinates: t = R cos psi, |z| = R sin psi
    double vol = 2 * pi * shell([&](double R) {
        return gauss_adaptive([&](double p) { return std::sin(p) / std::pow(std::cos(p), 3) / R; }, 0.0, psi, tol)
            .value;
    });

    auto normal = [](const Vector3d& x) {
        double r = std::hypot(x(1), x(2));
        Vector3d g(-r / (x(0) * x(0)), x(1) / (r * x(0)), x(2) / (r * x(0)));
        return Vector3d(x(0) * g / g.norm());
    };
    // H = div N = t^3 sum_i d_i (t^-3 N^i)
    auto mean_curvature = [&](const Vector3d& x) {
        double h = 1e-4 * x.norm(), div = 0;
        for (int i = 0; i < 3; ++i) {
            Vector3d e = Vector3d::Zero();
            e(i) = 1;
            div += central4([&](double d) {
                Vector3d y = x + d * e;
                return normal(y)(i) / std::pow(y(0), 3);
            }, h);
        }
        return std::pow(x(0), 3) * div;
    };
    const int na = 4;
    double hint = 0;
    for (int l = 0; l < na; ++l) {
        double a = 2 * pi * (l + 0.25) / na;
        hint += shell([&](double R) {
            Vector3d x(R * std::cos(psi), R * std::sin(psi) * std::cos(a), R * std::sin(psi) * std::sin(a));
            Vector3d dR(std::cos(psi), std::sin(psi) * std::cos(a), std::sin(psi) * std::sin(a));
            Vector3d da(0, -R * std::sin(psi) * std::sin(a), R * std::sin(psi) * std::cos(a));
            double t2 = x(0) * x(0);
            double g11 = dR.dot(dR) / t2, g12 = dR.dot(da) / t2, g22 = da.dot(da) / t2;
            return mean_curvature(x) * std::sqrt(g11 * g22 - g12 * g12);
        });
    }
    hint *= 2 * pi / na;
    return vol - 0.25 * hint;
}

}  // namespace

CsEpsilonReport cs_epsilon(const SolidTorusModel& m, double eps, const QuadratureConfig& cfg)
{
    cfg.validate();
    if (!(eps > 0 && eps < m.eps_max()))
        throw Error(ErrorKind::domain, "eps must lie in (0, " + std::to_string(m.eps_max()) + ")");
    FrameForms F(m);
    const double ell = m.core_length(), area = 2 * pi * ell;
    const double ue = m.level_u(eps), tol = 0.1 * cfg.target_tolerance;
    CsEpsilonReport r;
    r.eps = eps;

    auto over_u = [&](const std::function<double(const FermiPoint&)>& dens) {
        auto g = [&](double u) { return area * torus_mean([&](double s, double a) { return dens({s, u, a}); }, ell); };
        Quad out;
        double cuts[] = {0.0, m.u_a(), m.u_b(), ue};
        for (int k = 0; k < 3; ++k) {
            Quad q = gauss_adaptive(g, cuts[k], cuts[k + 1], tol);
            out.value += q.value;
            out.error += q.error;
        }
        return out;
    };

    Quad vol = over_u([&](const FermiPoint& f) { return F.volume_density(f); });
    Quad im = over_u([&](const FermiPoint& f) { return F.im_c_exact(f); });
    r.volume = vol.value;
    r.im_bulk = im.value / (4 * pi * pi);

    auto torus = [&](double u) {
        return area * torus_mean([&](double s, double a) { return F.boundary_density({s, u, a}); }, ell);
    };
    r.outer = torus(ue);
    std::vector<std::pair<double, cplx>> near_core;
    for (double g : cfg.limit_grid) near_core.push_back({g * m.u_a(), torus(g * m.u_a())});
    auto lim = limit_extrapolate(near_core, LimitModel::pure_power);
    r.inner = lim.limit.real();

    // core line integral of theta_1 - i theta_23
    const GaussRule& gr = gauss_legendre(24);
    cplx line = 0;
    for (std::size_t i = 0; i < gr.x.size(); ++i) {
        double s = 0.5 * ell * (1 + gr.x[i]);
        line += gr.w[i] * (F.core_omega(s)(0) - I * F.core_connection(s)(1, 2));
    }
    r.line = -(0.5 * ell) * line / (2 * pi);

    double re = r.volume / (pi * pi) - (r.outer - r.inner) / (4 * pi * pi) + r.line.real();
    r.value = cplx(re, r.im_bulk + r.line.imag());
    r.w_volume = w_volume_geometric(m, eps, tol);
    r.error_estimate = vol.error / (pi * pi) + im.error / (4 * pi * pi) + lim.residual / (4 * pi * pi);
    return r;
}

CsReport cs_invariant(const SolidTorusModel& m, const QuadratureConfig& cfg)
{
    cfg.validate();
    const int genus = 1;
    CsReport out;
    std::vector<std::pair<double, cplx>> pts;
    for (double eps : cfg.limit_grid) {
        out.samples.push_back(cs_epsilon(m, eps, cfg));
        pts.push_back({eps, out.samples.back().value + (2.0 / pi) * (genus - 1) * std::log(eps)});
    }
    double spread = 0, err = 0;
    for (auto& p : pts) spread = std::max(spread, std::abs(p.second - pts.back().second));
    for (auto& s : out.samples) err = std::max(err, s.error_estimate);
    if (spread <= cfg.target_tolerance) {
        // already flat in eps: a fitted exponent would only fit noise
        out.limit.value = pts.back().second;
        out.limit.error_estimate = spread + err;
    } else {
        auto lim = limit_extrapolate(pts, LimitModel::pure_power);
        out.limit.value = lim.limit;
        out.limit.error_estimate = lim.residual + err;
        if (lim.flagged) out.limit.diagnostic = "eps extrapolation residual above threshold";
    }
    out.limit.terms_used = long(pts.size());
    out.limit.converged = out.limit.error_estimate <= cfg.target_tolerance;
    out.value = out.limit.value;
    out.exp4pi = std::exp(4 * pi * out.value);
    double im = std::fmod(out.value.imag(), 0.5);
    out.im_mod_half = im < 0 ? im + 0.5 : im;
    return out;
}

double w_volume(const SolidTorusModel& m, const QuadratureConfig& cfg)
{
    return pi * pi * cs_invariant(m, cfg).value.real();
}

}  // namespace sktau
