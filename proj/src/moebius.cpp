#include "sktau/moebius.hpp"

#include <algorithm>
#include <cmath>

namespace sktau {

namespace {

void canonical_sign(cplx& a, cplx& b, cplx& c, cplx& d)
{
    for (cplx* e : {&a, &b, &c, &d}) {
        if (*e == 0.0) continue;
        double arg = std::arg(*e);
        if (arg <= -pi / 2 || arg > pi / 2) {
            a = -a;
            b = -b;
            c = -c;
            d = -d;
        }
        return;
    }
}

}  // namespace

MoebiusMap::MoebiusMap(cplx a_, cplx b_, cplx c_, cplx d_)
{
    cplx det = a_ * d_ - b_ * c_;
    if (std::abs(det) == 0.0 || !std::isfinite(std::abs(det)))
        throw Error(ErrorKind::domain, "degenerate Moebius matrix (det = 0)");
    cplx s = std::sqrt(det);
    a = a_ / s;
    b = b_ / s;
    c = c_ / s;
    d = d_ / s;
    canonical_sign(a, b, c, d);
}

MoebiusMap MoebiusMap::unit_det(cplx a, cplx b, cplx c, cplx d)
{
    MoebiusMap m;
    m.a = a;
    m.b = b;
    m.c = c;
    m.d = d;
    canonical_sign(m.a, m.b, m.c, m.d);
    return m;
}

MoebiusMap MoebiusMap::scaling(cplx k) { return MoebiusMap(k, 0.0, 0.0, 1.0); }
MoebiusMap MoebiusMap::translation(cplx t) { return MoebiusMap(1.0, t, 0.0, 1.0); }

MoebiusMap MoebiusMap::from_fixed_points(SpherePoint att, SpherePoint rep, cplx q)
{
    if (!(std::abs(q) < 1.0) || q == 0.0) throw Error(ErrorKind::domain, "multiplier must satisfy 0<|q|<1");
    if (att == rep) throw Error(ErrorKind::domain, "fixed points must differ");
    // M sends 0 -> att, inf -> rep
    MoebiusMap M;
    if (att.inf)
        M = MoebiusMap(rep.z, 1.0, 1.0, 0.0);  // z -> rep + 1/z
    else if (rep.inf)
        M = MoebiusMap::translation(att.z);
    else
        M = MoebiusMap(rep.z, att.z, 1.0, 1.0);
    return conjugate(MoebiusMap::scaling(q), M);
}

MoebiusMap MoebiusMap::inverse() const { return unit_det(d, -b, -c, a); }

bool MoebiusMap::is_pole(cplx z) const { return c * z + d == 0.0; }

SpherePoint MoebiusMap::apply(SpherePoint p) const
{
    if (p.inf) {
        if (c == 0.0) return SpherePoint::infinity();
        return {a / c, false};
    }
    cplx den = c * p.z + d;
    if (den == 0.0) return SpherePoint::infinity();
    return {(a * p.z + b) / den, false};
}

cplx MoebiusMap::apply(cplx z) const
{
    cplx den = c * z + d;
    if (den == 0.0) throw Error(ErrorKind::domain, "point is the pole of the map");
    return (a * z + b) / den;
}

cplx MoebiusMap::derivative(cplx z) const
{
    cplx den = c * z + d;
    if (den == 0.0) throw Error(ErrorKind::domain, "derivative requested at the pole");
    return 1.0 / (den * den);
}

MoebiusMap compose(const MoebiusMap& g, const MoebiusMap& h)
{
    return MoebiusMap::unit_det(g.a * h.a + g.b * h.c, g.a * h.b + g.b * h.d, g.c * h.a + g.d * h.c, g.c * h.b + g.d * h.d);
}

MoebiusMap conjugate(const MoebiusMap& g, const MoebiusMap& h) { return h * g * h.inverse(); }

MoebiusMap power(const MoebiusMap& g, int n)
{
    MoebiusMap base = n < 0 ? g.inverse() : g, r;
    for (int k = std::abs(n); k > 0; k >>= 1) {
        if (k & 1) r = r * base;
        base = base * base;
    }
    return r;
}

double projective_distance(const MoebiusMap& g, const MoebiusMap& h)
{
    auto dist = [&](double s) {
        return std::max({std::abs(g.a - s * h.a), std::abs(g.b - s * h.b), std::abs(g.c - s * h.c),
                         std::abs(g.d - s * h.d)});
    };
    return std::min(dist(1.0), dist(-1.0));
}

Classification classify(const MoebiusMap& g)
{
    Classification out;
    cplx tr = g.trace();
    cplx disc = tr * tr - 4.0;
    if (projective_distance(g, MoebiusMap::identity()) < 1e-14) {
        out.kind = MoebiusKind::identity;
        return out;
    }
    out.degenerate = std::abs(disc) < 1e-10;
    if (std::abs(disc) < 1e-14) {
        out.kind = MoebiusKind::parabolic;
        return out;
    }
    // eigenvalues k, 1/k of the matrix; multiplier k^2 or k^-2
    cplx sq = std::sqrt(disc);
    cplx k1 = 0.5 * (tr + sq), k2 = 0.5 * (tr - sq);
    cplx k = std::abs(k1) <= std::abs(k2) ? k1 : k2;  // |k| <= 1
    cplx q = k * k;
    if (std::abs(q) >= 1.0 - 1e-12) {
        out.kind = MoebiusKind::elliptic;
        return out;
    }
    out.kind = MoebiusKind::loxodromic;
    LoxodromicData L;
    L.multiplier = q;
    L.length = -std::log(std::abs(q));
    L.holonomy = std::arg(q);
    // fixed points solve c z^2 + (d-a) z - b = 0
    if (g.c == 0.0) {
        // z -> (a z + b)/d, multiplier at finite fixed point is a/d = a^2
        SpherePoint fin{g.b / (g.d - g.a), false};
        if (std::abs(g.a * g.a) < 1.0) {
            L.fixed_attracting = fin;
            L.fixed_repelling = SpherePoint::infinity();
        } else {
            L.fixed_attracting = SpherePoint::infinity();
            L.fixed_repelling = fin;
        }
    } else {
        cplx p = g.a - g.d;
        cplx s = std::sqrt(p * p + 4.0 * g.b * g.c);
        if (std::real(std::conj(p) * s) < 0.0) s = -s;
        // z1 without cancellation, z2 from the product of the roots -b/c
        cplx z1 = (p + s) / (2.0 * g.c), z2 = -2.0 * g.b / (p + s);
        // derivative at a fixed point: 1/(c z + d)^2
        cplx d1 = 0.5 * (g.a + g.d + s);
        if (std::abs(d1) > 1.0) {
            L.fixed_attracting = {z1, false};
            L.fixed_repelling = {z2, false};
        } else {
            L.fixed_attracting = {z2, false};
            L.fixed_repelling = {z1, false};
        }
    }
    out.lox = L;
    return out;
}

LoxodromicData loxodromic_data(const MoebiusMap& g)
{
    Classification c = classify(g);
    if (c.kind != MoebiusKind::loxodromic) throw Error(ErrorKind::not_loxodromic, "map is not loxodromic");
    return *c.lox;
}

}  // namespace sktau
