#include "sktau/deformation.hpp"

#include <algorithm>
#include <cmath>

#include "sktau/numerics.hpp"

namespace sktau {

cplx BumpSeed::operator()(cplx z) const
{
    if (radius <= 0) return 0.0;
    double s2 = std::norm(z - center) / (radius * radius);
    if (s2 >= 1.0) return 0.0;
    return amplitude * std::pow(1.0 - s2, power);
}

// ---- Beltrami differential ------------------------------------------------

BeltramiDifferential::BeltramiDifferential(const MarkedSchottkyGroup& g, const BumpSeed& seed)
    : domain_(g), seed_(seed)
{
    if (!(std::abs(seed.amplitude) < 1.0)) throw Error(ErrorKind::domain, "sup |mu| must be below 1");
    if (seed.amplitude != 0.0) {
        if (!(seed.radius > 0)) throw Error(ErrorKind::domain, "bump radius must be positive");
        if (!(domain_.clearance(seed.center) > seed.radius))
            throw Error(ErrorKind::domain, "bump support touches the boundary of the fundamental domain");
    }
}

cplx BeltramiDifferential::operator()(cplx z) const
{
    if (seed_.amplitude == 0.0) return 0.0;
    Reduction r = domain_.reduce(z);
    cplx m = seed_(r.point);
    if (m == 0.0) return 0.0;
    cplx d = r.element.derivative(z);
    return m * std::conj(d) / d;
}

BeltramiDifferential BeltramiDifferential::scaled(cplx a) const
{
    BumpSeed s = seed_;
    s.amplitude *= a;
    return BeltramiDifferential(domain_.group(), s);
}

// ---- fdot ------------------------------------------------------------------

namespace {

double chordal(cplx a, cplx b)
{
    return std::abs(a - b) / std::sqrt((1 + std::norm(a)) * (1 + std::norm(b)));
}

// z(z-1) / (zeta (zeta-1) (zeta-z)) in the unfactored form; the partial
// fractions cancel badly for translates near infinity
inline cplx kernel(cplx zeta, cplx z)
{
    return z * (z - 1.0) / (zeta * (zeta - 1.0) * (zeta - z));
}

struct PolarRule {
    std::vector<double> s, ws;  // radial Gauss nodes on [0,1], weights include the Jacobian s
    int nt;
};

PolarRule polar_rule(int ns, int nt)
{
    const GaussRule& g = gauss_legendre(ns);
    PolarRule r;
    r.nt = nt;
    for (int i = 0; i < ns; ++i) {
        double s = 0.5 * (g.x[i] + 1.0);
        r.s.push_back(s);
        r.ws.push_back(0.5 * g.w[i] * s);
    }
    return r;
}

}  // namespace

DeformationField::DeformationField(const BeltramiDifferential& mu, int max_word_length) : mu_(mu)
{
    const BumpSeed& b = mu_.bump();
    elements_.push_back(MoebiusMap::identity());
    if (b.amplitude == 0.0) return;
    const auto& g = mu_.group();

    auto add = [&](const MoebiusMap& e, const PolarRule& rule, std::vector<Node>& out) {
        double dt = 2 * pi / rule.nt;
        for (std::size_t i = 0; i < rule.s.size(); ++i)
            for (int j = 0; j < rule.nt; ++j) {
                cplx u = b.center + b.radius * rule.s[i] * std::polar(1.0, dt * (j + 0.5));
                cplx d = e.derivative(u);
                out.push_back({e.apply(u), b(u) * d * d * b.radius * b.radius * rule.ws[i] * dt});
            }
    };
    add(MoebiusMap::identity(), polar_rule(32, 64), near_);

    PolarRule medium = polar_rule(16, 32), coarse = polar_rule(8, 16);
    auto diam = [&](const MoebiusMap& e) {
        double m = 0;
        for (int k = 0; k < 8; ++k) {
            cplx u = b.center + b.radius * std::polar(1.0, pi * k / 4);
            cplx v = b.center - b.radius * std::polar(1.0, pi * k / 4);
            m = std::max(m, chordal(e.apply(u), e.apply(v)));
        }
        return m;
    };
    // shell by shell
    std::vector<ReducedWord> shell{{{}, MoebiusMap::identity()}};
    for (int k = 1; k <= max_word_length; ++k) {
        std::vector<ReducedWord> next;
        double worst = 0;
        for (auto& w : shell)
            for (Letter l = 0; l < 2 * g.genus; ++l) {
                if (!w.letters.empty() && w.letters.back() == inverse_letter(l)) continue;
                ReducedWord n{w.letters, w.element * g.letter_map(l)};
                n.letters.push_back(l);
                double dm = diam(n.element);
                worst = std::max(worst, dm);
                add(n.element, dm > 1e-3 ? medium : coarse, far_);
                elements_.push_back(n.element);
                next.push_back(std::move(n));
            }
        shell = std::move(next);
        length_used_ = k;
        tail_ = worst;
        if (worst < 1e-8) break;
    }
}

cplx DeformationField::inside_support(cplx z) const
{
    // polar coordinates about z: the 1/(zeta - z) singularity cancels the Jacobian
    const BumpSeed& b = mu_.bump();
    const GaussRule& g = gauss_legendre(40);
    int nt = 96;
    double dt = 2 * pi / nt;
    cplx d0 = z - b.center;
    std::vector<cplx> parts(nt);
    for (int j = 0; j < nt; ++j) {
        cplx e = std::polar(1.0, dt * (j + 0.5));
        cplx p = d0 * std::conj(e);  // z - c in the rotated frame
        double rmax = -p.real() + std::sqrt(std::max(0.0, b.radius * b.radius - p.imag() * p.imag()));
        cplx acc = 0.0;
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            double rho = 0.5 * rmax * (g.x[i] + 1.0);
            cplx zeta = z + rho * e;
            // mu K rho with K = 1/(zeta-z) + (z-1)/zeta - z/(zeta-1)
            cplx k = std::conj(e) + rho * ((z - 1.0) / zeta - z / (zeta - 1.0));
            acc += 0.5 * rmax * g.w[i] * b(zeta) * k;
        }
        parts[j] = acc * dt;
    }
    return pairwise_sum(parts);
}

TruncationReport DeformationField::value(cplx z) const
{
    TruncationReport r;
    r.terms_used = long(near_.size() + far_.size());
    r.converged = true;
    if (mu_.bump().amplitude == 0.0) return r;
    const BumpSeed& b = mu_.bump();
    std::vector<cplx> t(far_.size());
    for (std::size_t k = 0; k < far_.size(); ++k) t[k] = far_[k].weight * kernel(far_[k].zeta, z);
    cplx far = pairwise_sum(t);
    cplx near;
    if (std::abs(z - b.center) < b.radius) {
        near = inside_support(z);
    } else {
        std::vector<cplx> s(near_.size());
        for (std::size_t k = 0; k < near_.size(); ++k) s[k] = near_[k].weight * kernel(near_[k].zeta, z);
        near = pairwise_sum(s);
    }
    r.value = -(near + far) / pi;
    // tail: one more shell is at most the last shell's diameter squared times a few
    r.error_estimate = std::abs(b.amplitude) * (tail_ * tail_ * 10.0 + 1e-12);
    return r;
}

FDotJet DeformationField::jet(cplx z) const
{
    FDotJet j{0.0, 0.0, 0.0};
    if (mu_.bump().amplitude == 0.0) return j;
    std::vector<cplx> a, b, c;
    auto run = [&](const std::vector<Node>& nodes) {
        for (auto& n : nodes) {
            cplx den = n.zeta * (n.zeta - 1.0);
            cplx dz = n.zeta - z;
            a.push_back(n.weight * z * (z - 1.0) / (den * dz));
            b.push_back(n.weight * ((2.0 * z - 1.0) * dz + z * (z - 1.0)) / (den * dz * dz));
            c.push_back(n.weight * 2.0 / (dz * dz * dz));
        }
    };
    run(near_);
    run(far_);
    j.f = -pairwise_sum(a) / pi;
    j.fz = -pairwise_sum(b) / pi;
    j.fzz = -pairwise_sum(c) / pi;
    return j;
}

cplx DeformationField::dbar(cplx z, double h) const
{
    cplx fx = (value(z + h).value - value(z - h).value) / (2 * h);
    cplx fy = (value(z + I * h).value - value(z - I * h).value) / (2 * h);
    return 0.5 * (fx + I * fy);
}

// ---- generator velocities ---------------------------------------------------

namespace {

std::vector<cplx> fit_points(const BeltramiDifferential& mu)
{
    const auto& g = mu.group();
    FundamentalDomain D(g);
    double rmin = 1e300;
    for (auto& c : g.circles) rmin = std::min(rmin, c.radius);
    const BumpSeed& b = mu.bump();
    std::vector<std::pair<double, cplx>> cand;
    for (int i = 0; i < 24; ++i)
        for (int j = 0; j < 32; ++j) {
            double r = std::exp(-3.0 + 6.0 * i / 23.0);
            cplx z = std::polar(r, 2 * pi * (j + 0.3) / 32);
            double c = D.clearance(z);
            if (c < 0.2 * rmin) continue;
            if (b.amplitude != 0.0 && std::abs(z - b.center) < 2.0 * b.radius) continue;
            cand.push_back({c / (1.0 + std::abs(z)), z});
        }
    std::stable_sort(cand.begin(), cand.end(), [](auto& x, auto& y) { return x.first > y.first; });
    std::vector<cplx> out;
    for (auto& [c, z] : cand) {
        bool far = true;
        for (auto& p : out) far = far && std::abs(p - z) > 0.2 * (1.0 + std::abs(z));
        if (far) out.push_back(z);
        if (out.size() == 6) break;
    }
    if (out.size() < 4) throw Error(ErrorKind::numerical, "not enough sample points to fit generator velocities");
    return out;
}

}  // namespace

std::vector<GeneratorVelocity> generator_velocities(const DeformationField& f)
{
    const auto& g = f.beltrami().group();
    auto pts = fit_points(f.beltrami());
    std::vector<GeneratorVelocity> out;
    for (int r = 0; r < g.genus; ++r) {
        const MoebiusMap& L = g.generators[r];
        MoebiusMap Li = L.inverse();
        int n = int(pts.size());
        Eigen::MatrixXcd A(n, 3);
        Eigen::VectorXcd v(n);
        for (int k = 0; k < n; ++k) {
            cplx u = pts[k], z = Li.apply(u);
            v(k) = f.value(u).value - L.derivative(z) * f.value(z).value;
            A(k, 0) = 1.0;
            A(k, 1) = 2.0 * u;
            A(k, 2) = -u * u;
        }
        Eigen::VectorXcd x = A.colPivHouseholderQr().solve(v);
        GeneratorVelocity gv;
        gv.X << x(1), x(0), x(2), -x(1);
        gv.fit_residual = (A * x - v).cwiseAbs().maxCoeff();
        out.push_back(gv);
    }
    return out;
}

MoebiusMap exp_times(const Eigen::Matrix2cd& X, cplx w, const MoebiusMap& L)
{
    Eigen::Matrix2cd A = w * X;
    cplx s = std::sqrt(A(0, 0) * A(0, 0) + A(0, 1) * A(1, 0));
    cplx ch = std::cosh(s), sh = std::abs(s) < 1e-8 ? 1.0 + s * s / 6.0 : std::sinh(s) / s;
    Eigen::Matrix2cd E = ch * Eigen::Matrix2cd::Identity() + sh * A, M;
    M << L.a, L.b, L.c, L.d;
    M = E * M;
    return MoebiusMap(M(0, 0), M(0, 1), M(1, 0), M(1, 1));
}

cplx multiplier_velocity(const MoebiusMap& L, const Eigen::Matrix2cd& X)
{
    cplx q = loxodromic_data(L).multiplier;
    cplx t = L.trace();
    cplx s = std::sqrt(q);
    if (std::abs(-s - 1.0 / s - t) < std::abs(s + 1.0 / s - t)) s = -s;
    Eigen::Matrix2cd M;
    M << L.a, L.b, L.c, L.d;
    cplx dt = (X * M).trace();
    return 2.0 * s * dt / (1.0 - 1.0 / (s * s));
}

MarkedSchottkyGroup deformed_group(const MarkedSchottkyGroup& g, const DeformationField& f, cplx w)
{
    return deformed_group(g, f, w, generator_velocities(f));
}

MarkedSchottkyGroup deformed_group(const MarkedSchottkyGroup& g, const DeformationField& f, cplx w,
                                   const std::vector<GeneratorVelocity>& v)
{
    if (std::abs(w) * f.beltrami().sup() > 0.1) throw Error(ErrorKind::domain, "|w| sup|mu| exceeds 0.1");
    if (int(v.size()) != g.genus) throw Error(ErrorKind::generator_count, "one velocity per generator expected");
    MarkedSchottkyGroup raw;
    raw.genus = g.genus;
    for (int r = 0; r < g.genus; ++r) {
        MoebiusMap L = exp_times(v[r].X, w, g.generators[r]);
        if (!classify(L).lox) throw Error(ErrorKind::not_loxodromic, "deformation step too large: generator not loxodromic");
        raw.generators.push_back(L);
    }
    validate_group(raw);
    // parameters of the normalized group from the raw fixed points; refitting
    // them from conjugated matrices loses digits
    auto d1 = loxodromic_data(raw.generators[0]);
    std::vector<cplx> params{d1.multiplier};
    if (g.genus == 1) return normalized_family(1).make(params);
    auto d2 = loxodromic_data(raw.generators[1]);
    // z -> (z - A1)/(z - R1) * (A2 - R1)/(A2 - A1) in homogeneous coordinates
    auto hom = [](const SpherePoint& p) { return p.inf ? std::pair<cplx, cplx>{1.0, 0.0} : std::pair<cplx, cplx>{p.z, 1.0}; };
    auto [a1, al1] = hom(d1.fixed_attracting);
    auto [r1, rh1] = hom(d1.fixed_repelling);
    auto [a2, al2] = hom(d2.fixed_attracting);
    cplx k = (rh1 * a2 - r1 * al2) / (al1 * a2 - a1 * al2);
    MoebiusMap norm(k * al1, -k * a1, rh1, -r1);
    auto cross = [&](const SpherePoint& p) {
        SpherePoint q = norm.apply(p);
        if (q.inf) throw Error(ErrorKind::domain, "deformed fixed point at infinity");
        return q.z;
    };
    for (int r = 1; r < g.genus; ++r) {
        auto d = loxodromic_data(raw.generators[r]);
        if (r == 1) {
            params.push_back(d.multiplier);
            params.push_back(cross(d.fixed_repelling));
        } else {
            params.push_back(cross(d.fixed_attracting));
            params.push_back(cross(d.fixed_repelling));
            params.push_back(d.multiplier);
        }
    }
    return normalized_family(g.genus).make(params);
}

double conjugation_defect(const DeformationField& f, const std::vector<GeneratorVelocity>& v, int r, cplx w)
{
    const auto& g = f.beltrami().group();
    const MoebiusMap& L = g.generators.at(r);
    MoebiusMap Lw = exp_times(v.at(r).X, w, L);
    double worst = 0;
    for (cplx z : fit_points(f.beltrami())) {
        cplx lhs = L.apply(z);
        lhs += w * f.value(lhs).value;
        cplx rhs = Lw.apply(z + w * f.value(z).value);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

// ---- tau variation ------------------------------------------------------------

TauVariation tau_variation_check(const CoordinateChart& chart, const DeformationField& f, double step)
{
    const ChartPoint& base = chart.base();
    const HurwitzPoint& p = base.point;
    const auto& g = f.beltrami().group();
    int gp = int(base.params.size()) - p.genus();
    std::vector<cplx> coeffs(base.params.begin() + gp, base.params.end());
    auto vel = generator_velocities(f);
    std::vector<cplx> hint;
    for (auto& z : p.zeros) hint.push_back(z.z);
    auto family = normalized_family(p.genus());

    struct Sample {
        std::vector<cplx> zeta;
        std::vector<FormJet> h;  // at the base zeros
    };
    auto sample = [&](double w) {
        auto gw = deformed_group(g, f, w, vel);
        auto params = normalized_parameters(gw);
        params.insert(params.end(), coeffs.begin(), coeffs.end());
        ChartPoint c = chart.at(params, hint, false);
        Sample s{c.point.coordinates, {}};
        for (auto& z : p.zeros) s.h.push_back(c.point.basis->combine(coeffs, z.z));
        return s;
    };
    std::vector<Sample> S;
    for (double w : {step, -step, 0.5 * step, -0.5 * step}) S.push_back(sample(w));
    auto rich = [&](auto get) {
        auto d1 = (get(S[0]) - get(S[1])) / (2 * step);
        auto d2 = (get(S[2]) - get(S[3])) / step;
        return (4.0 * d2 - d1) / 3.0;
    };

    TauVariation out;
    int d = p.dimension();
    auto F = dlog_tau_all(p, *base.bergman);
    out.lhs = 0.0;
    for (int i = 0; i < d; ++i) {
        cplx zd = rich([&](const Sample& s) { return s.zeta[i]; });
        out.zeta_dot.push_back(zd);
        out.lhs += 24.0 * F[i].value * zd;
    }

    // (4/pi) int_S (R_B - R_Phi) mu d^2z over the seed disc
    const BumpSeed& b = f.beltrami().bump();
    const BergmanSeries& bs = *base.bergman;
    PolarRule rule = polar_rule(24, 48);
    double dt = 2 * pi / rule.nt;
    std::vector<cplx> terms(rule.s.size() * rule.nt);
    parallel_for(terms.size(), [&](std::size_t k) {
        std::size_t i = k / rule.nt;
        int j = int(k % rule.nt);
        cplx u = b.center + b.radius * rule.s[i] * std::polar(1.0, dt * (j + 0.5));
        cplx rb = bs.projective_connection(u).value;
        cplx rp = projective_connection_of_form(p.form(u));
        terms[k] = (rb - rp) * b(u) * b.radius * b.radius * rule.ws[i] * dt;
    });
    out.integral = 4.0 / pi * pairwise_sum(terms);

    out.rhs = out.integral;
    for (std::size_t k = 0; k < p.zeros.size(); ++k) {
        const ZeroData& z = p.zeros[k];
        FormJet h0 = p.form(z.z);
        cplx hdot = rich([&](const Sample& s) { return s.h[k].h; });
        cplx hdot_z = rich([&](const Sample& s) { return s.h[k].h1; });
        FDotJet fj = f.jet(z.z);
        cplx ht = h0.h1, ht_z = 0.5 * h0.h2;
        // pulled-back form H = h(f_w) (f_w)_z at the zero
        cplx H = hdot + ht * fj.f;
        cplx Hz = hdot_z + 2.0 * ht_z * fj.f + 2.0 * ht * fj.fz;
        cplx t = 3.0 * Hz / ht - 2.0 * ht_z * H / (ht * ht);
        out.zero_terms.push_back(t);
        out.rhs += t;
    }
    out.relative = std::abs(out.lhs - out.rhs) / std::abs(out.rhs);
    return out;
}

}  // namespace sktau
