#include "sktau/polyakov.hpp"

#include <algorithm>
#include <limits>

namespace sktau {

double FlatTorusMetric::unit_area_constant(cplx q)
{
    return -std::log(2 * pi * std::log(1.0 / std::abs(q)));
}

FlatTorusMetric::FlatTorusMetric(cplx q, double raw_constant)
{
    if (!(std::abs(q) > 0.0 && std::abs(q) < 1.0)) throw Error(ErrorKind::domain, "flat torus needs 0 < |q| < 1");
    double s = std::sqrt(std::abs(q));
    Annulus a{0.0, s, 1.0 / s};
    auto density = [&](cplx z) { return cplx(std::exp(-2.0 * std::log(std::abs(z)) + raw_constant)); };
    double area = annulus_integral_fixed(density, a, 16, 16).real();
    c_ = raw_constant - std::log(area);
}

double metric_invariance_defect(const MetricProvider& m, const MarkedSchottkyGroup& g, int word_length)
{
    FundamentalDomain D(g);
    cplx base = default_base_point(g);
    std::vector<cplx> pts{base};
    for (int k = 0; k < 6; ++k) {
        cplx z = base + std::polar(0.2, 2 * pi * k / 6);
        if (D.contains(z)) pts.push_back(z);
    }
    double worst = 0;
    for (auto& w : enumerate_words(g, word_length))
        for (cplx z : pts) {
            double lhs = m.phi(z);
            double rhs = m.phi(w.element.apply(z)) + 2.0 * std::log(std::abs(w.element.derivative(z)));
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    return worst;
}

cplx PhaseField::theta_z(cplx z) const
{
    FormJet j = form_(z);
    return j.h1 / (2.0 * I * j.h);
}

cplx PhaseField::psi_z(cplx z) const
{
    return metric_.phi_z(z) - 2.0 * I * theta_z(z);
}

cplx PhaseField::theta_z_fd(cplx z, double step) const
{
    auto d = [&](cplx e) { return std::arg(form_(z + e).h / form_(z - e).h) / (2 * std::abs(e)); };
    double tx = d(step), ty = d(cplx(0.0, step));
    return 0.5 * cplx(tx, -ty);
}

// ---- charts ----------------------------------------------------------------

PolyakovChart one_chart_disc(std::function<FormJet(cplx)> form, cplx center, double radius, std::vector<SingularPoint> points)
{
    return PolyakovChart{Annulus{center, 0.0, radius}, false, std::move(form), std::move(points)};
}

PolyakovChart genus1_holomorphic_chart(cplx q)
{
    double s = std::sqrt(std::abs(q));
    cplx c = 1.0 / (2 * pi * I);
    auto form = [c](cplx z) { return FormJet{c / z, -c / (z * z), 2.0 * c / (z * z * z), 0.0}; };
    return PolyakovChart{Annulus{0.0, s, 1.0 / s}, true, form, {}};
}

PolyakovChart genus1_lambda_chart(const HurwitzModePoint& p)
{
    const TwoPoleLambda& l = p.lambda;
    double L = -std::log(std::abs(l.q));
    std::vector<cplx> raw = p.critical_points;
    raw.push_back(l.p1);
    raw.push_back(l.p2);
    std::vector<double> ell;
    for (cplx z : raw) {
        double x = std::fmod(std::log(std::abs(z)), L);
        ell.push_back(x < 0 ? x + L : x);
    }
    std::vector<double> s = ell;
    std::sort(s.begin(), s.end());
    double best = -1, cut = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        double a = s[i], b = i + 1 < s.size() ? s[i + 1] : s[0] + L;
        if (b - a > best) {
            best = b - a;
            cut = 0.5 * (a + b);
        }
    }
    PolyakovChart c;
    c.region = Annulus{0.0, std::exp(cut), std::exp(cut + L)};
    c.closed = true;
    c.form = [l](cplx z) {
        LambdaJet j = l.jet(z);
        return FormJet{j.d1, j.d2, j.d3, 0.0};
    };
    // representative with cut < log|z| < cut + L
    auto rep = [&](cplx z) {
        double x = std::log(std::abs(z));
        int n = int(std::floor((x - cut) / L));
        return z * std::pow(l.q, n);
    };
    for (std::size_t i = 0; i < p.critical_points.size(); ++i) {
        cplx z = rep(p.critical_points[i]);
        c.points.push_back({z, 1, l.jet(z).d2});
    }
    // lambda ~ A p / (z - p) at a pole of s(z/p); h~ = -A p, and +A p at p2
    cplx z1 = rep(l.p1), z2 = rep(l.p2);
    c.points.push_back({z1, -2, -l.A * z1});
    c.points.push_back({z2, -2, l.A * z2});
    return c;
}

cplx pole_htilde_contour(const std::function<FormJet(cplx)>& form, cplx pole, double radius)
{
    int n = 256;
    std::vector<cplx> t(n);
    for (int k = 0; k < n; ++k) {
        cplx e = std::polar(radius, 2 * pi * k / n);
        // (1/2 pi i) int (z-p) h dz = mean of (z-p)^2 h
        t[k] = e * e * form(pole + e).h;
    }
    return pairwise_sum(t) / double(n);
}

// ---- I -----------------------------------------------------------------------

namespace {

// mean over a circle of g by the trapezoid rule, doubling until stable
cplx circle_mean(const std::function<cplx(cplx)>& g, cplx c, double r)
{
    auto rule = [&](int n) {
        std::vector<cplx> v(n);
        for (int k = 0; k < n; ++k) v[k] = g(c + std::polar(r, 2 * pi * (k + 0.5) / n));
        return pairwise_sum(v) / double(n);
    };
    int n = 64;
    cplx prev = rule(n);
    while (n < 8192) {
        n *= 2;
        cplx cur = rule(n);
        if (std::abs(cur - prev) <= 1e-15 * (1.0 + std::abs(cur))) return cur;
        prev = cur;
    }
    return prev;
}

struct Evaluator {
    const PolyakovChart& chart;
    const MetricProvider& metric;

    // u = phi - 2 log|h|
    double u(cplx z) const { return metric.phi(z) - 2.0 * std::log(std::abs(chart.form(z).h)); }
    cplx psi_z(cplx z) const
    {
        FormJet j = chart.form(z);
        return metric.phi_z(z) - j.h1 / j.h;
    }
    // (1/2i) int over the ccw circle of u psi_z dz
    cplx stokes_ccw(cplx c, double r) const
    {
        return 0.5 * r * circle_mean([&](cplx z) { return u(z) * psi_z(z) * (z - c) / r; }, c, r) * (2 * pi);
    }
};

double separation(const PolyakovChart& chart)
{
    const Annulus& a = chart.region;
    double s = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < chart.points.size(); ++i) {
        cplx z = chart.points[i].z;
        double r = std::abs(z - a.center);
        double d = a.r_outer - r;
        if (a.r_inner > 0) d = std::min(d, r - a.r_inner);
        s = std::min(s, d);
        for (std::size_t j = 0; j < chart.points.size(); ++j)
            if (j != i) s = std::min(s, 0.5 * std::abs(z - chart.points[j].z));
    }
    return s;
}

PolyakovReport compute_I(const PolyakovChart& chart, const MetricProvider& metric, const QuadratureConfig& cfg)
{
    cfg.validate();
    Evaluator ev{chart, metric};
    const Annulus& a = chart.region;
    double scale = a.r_outer;
    double sep = chart.points.empty() ? scale : separation(chart);
    if (!(sep > 1e-9 * scale)) throw Error(ErrorKind::stratum, "singular point on the domain boundary or points collide");

    // region boundary: outer circle ccw, inner circle cw
    cplx edge = 0.0;
    if (metric.harmonic()) {
        edge = ev.stokes_ccw(a.center, a.r_outer);
        if (a.r_inner > 0) edge -= ev.stokes_ccw(a.center, a.r_inner);
    }

    PolyakovReport out;
    cplx pts = 0.0;
    for (auto& p : chart.points) {
        if (p.order == 1)
            pts += -pi * (metric.phi(p.z) - std::log(std::abs(p.htilde)));
        else
            pts += 2 * pi * (metric.phi(p.z) + 2.0 * std::log(std::abs(p.htilde)));
    }

    auto at = [&](double delta, cplx* bulk_out, cplx* circ_out) {
        cplx bulk = edge, circ = 0.0;
        if (metric.harmonic()) {
            for (auto& p : chart.points) bulk -= ev.stokes_ccw(p.z, delta);
        } else {
            // smooth cutoffs chi_k: 1 on r < rho/2, 0 on r > rho. Polar rule over the
            // region for (1 - sum chi_k) |psi_z|^2, log-radial rings for chi_k |psi_z|^2
            double rho = 0.999 * sep;
            auto chi = [rho](double r) {
                double s = 2.0 * r / rho - 1.0;
                if (s <= 0) return 1.0;
                if (s >= 1) return 0.0;
                double a = std::exp(-1.0 / (1.0 - s)), b = std::exp(-1.0 / s);
                return a / (a + b);
            };
            auto dens = [&](cplx z) { return std::norm(ev.psi_z(z)); };
            auto outer = [&](cplx z) {
                double w = 1.0;
                for (auto& p : chart.points) w -= chi(std::abs(z - p.z));
                return cplx(w == 0.0 ? 0.0 : w * dens(z));
            };
            auto r = region_integral_excised(outer, Region{a}, {}, cfg);
            if (!r.converged) throw Error(ErrorKind::numerical, "bulk quadrature did not converge: " + r.diagnostic);
            bulk = r.value;
            for (auto& p : chart.points) {
                auto inner = [&](cplx z) { return cplx(chi(std::abs(z - p.z)) * dens(z)); };
                auto ring = region_integral_excised(inner, Region{Annulus{p.z, delta, rho}}, {}, cfg);
                if (!ring.converged) throw Error(ErrorKind::numerical, "bulk quadrature did not converge near a point");
                bulk += ring.value;
            }
        }
        for (auto& p : chart.points) {
            cplx m = circle_mean([&](cplx z) { return cplx(ev.u(z)); }, p.z, delta);
            circ += (p.order == 1 ? -pi : 2 * pi) * m;
        }
        if (bulk_out) *bulk_out = bulk;
        if (circ_out) *circ_out = circ;
        return bulk + circ + pts;
    };

    for (double g : cfg.limit_grid) {
        double d = g * sep;
        out.samples.push_back({d, at(d, &out.bulk, &out.circles)});
    }
    out.points = pts;
    // same extrapolation on the grid halved, reusing samples that coincide
    std::vector<std::pair<double, cplx>> half;
    for (auto& x : out.samples) {
        double d = 0.5 * x.first;
        auto hit = std::find_if(out.samples.begin(), out.samples.end(),
                                [&](const auto& y) { return std::abs(y.first - d) <= 1e-12 * d; });
        half.push_back({d, hit != out.samples.end() ? hit->second : at(d, nullptr, nullptr)});
    }

    auto lim = limit_extrapolate(out.samples, LimitModel::pure_power);
    auto lim2 = limit_extrapolate(half, LimitModel::pure_power);
    out.halving = std::abs(lim.limit - lim2.limit);
    out.value.value = lim2.limit;
    out.value.error_estimate = std::max(out.halving, lim2.residual);
    out.value.terms_used = long(out.samples.size() + half.size());
    out.value.converged = out.value.error_estimate <= cfg.target_tolerance;
    if (!out.value.converged) out.value.diagnostic = "delta sequence not converged";
    out.imaginary = std::abs(out.value.value.imag());
    return out;
}

}  // namespace

PolyakovReport regularized_I(const PolyakovChart& chart, const MetricProvider& metric, const QuadratureConfig& cfg)
{
    for (auto& p : chart.points)
        if (p.order != 1) throw Error(ErrorKind::stratum, "holomorphic mode needs simple zeros only");
    return compute_I(chart, metric, cfg);
}

PolyakovReport regularized_I_meromorphic(const PolyakovChart& chart, const MetricProvider& metric, const QuadratureConfig& cfg)
{
    for (auto& p : chart.points)
        if (p.order != 1 && p.order != -2) throw Error(ErrorKind::stratum, "only simple zeros and double poles of d lambda");
    return compute_I(chart, metric, cfg);
}

// ---- variation -------------------------------------------------------------------

cplx polyakov_quadratic_differential(const MetricProvider& metric, const FormJet& j, cplx z)
{
    cplx pz = metric.phi_z(z);
    cplx l = j.h1 / j.h;
    // -2 theta_z^2 - 2 i theta_zz = (h'/h)^2 / 2 - (h'/h)'
    return metric.phi_zz(z) - 0.5 * pz * pz + 1.5 * l * l - j.h2 / j.h;
}

cplx dI_formula(const PolyakovChart& chart, const MetricProvider& metric, const DeformationField& f,
                const std::vector<ZeroVariation>& zeros)
{
    std::vector<const SingularPoint*> zs;
    for (auto& p : chart.points)
        if (p.order == 1) zs.push_back(&p);
    if (zeros.size() != zs.size()) throw Error(ErrorKind::domain, "one ZeroVariation per zero expected");

    const BeltramiDifferential& mu = f.beltrami();
    const BumpSeed& b = mu.bump();
    cplx bulk = 0.0;
    if (b.amplitude != 0.0) {
        FundamentalDomain D(mu.group());
        for (auto& p : chart.points)
            if (std::abs(D.reduce(p.z).point - b.center) <= b.radius)
                throw Error(ErrorKind::domain, "support of mu contains a singular point of the form");
        const GaussRule& g = gauss_legendre(40);
        int nt = 96;
        std::vector<cplx> terms(g.x.size() * nt);
        parallel_for(terms.size(), [&](std::size_t k) {
            std::size_t i = k / nt;
            int j = int(k % nt);
            double s = 0.5 * (g.x[i] + 1.0);
            cplx z = b.center + b.radius * s * std::polar(1.0, 2 * pi * (j + 0.5) / nt);
            terms[k] = polyakov_quadratic_differential(metric, chart.form(z), z) * b(z) * b.radius * b.radius * s * 0.5 * g.w[i] *
                       (2 * pi / nt);
        });
        bulk = 2.0 * pairwise_sum(terms);
    }

    cplx sum = 0.0;
    for (std::size_t k = 0; k < zs.size(); ++k) {
        cplx z = zs[k]->z;
        FormJet j = chart.form(z);
        FDotJet fj = f.jet(z);
        cplx lz = j.h2 / (2.0 * j.h1);  // (log h~)_z at the zero
        sum += 3.0 * fj.fz + 1.5 * zeros[k].log_htilde_dot + 1.5 * lz * fj.f - 0.5 * lz * zeros[k].z_dot;
    }
    return bulk + pi * sum;
}

}  // namespace sktau
