#include "sktau/schottky.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sktau {

// ---- circles -------------------------------------------------------------

bool SchottkyCircle::in_open_disc(cplx z) const
{
    double r = std::abs(z - center);
    return contains_infinity ? r > radius : r < radius;
}

bool SchottkyCircle::in_closed_disc(cplx z) const
{
    double r = std::abs(z - center);
    return contains_infinity ? r >= radius : r <= radius;
}

bool SchottkyCircle::in_closed_disc(SpherePoint p) const
{
    if (p.inf) return contains_infinity;
    return in_closed_disc(p.z);
}

double SchottkyCircle::clearance(cplx z) const
{
    double r = std::abs(z - center);
    return contains_infinity ? radius - r : r - radius;
}

MoebiusMap MarkedSchottkyGroup::letter_map(Letter l) const
{
    const MoebiusMap& m = generators.at(l / 2);
    return (l & 1u) ? m.inverse() : m;
}

std::vector<MoebiusMap> MarkedSchottkyGroup::letter_maps() const
{
    std::vector<MoebiusMap> out;
    for (Letter l = 0; l < 2 * genus; ++l) out.push_back(letter_map(l));
    return out;
}

std::vector<SchottkyCircle> default_circles(const std::vector<MoebiusMap>& gens)
{
    std::vector<SchottkyCircle> out;
    for (const auto& L : gens) {
        LoxodromicData d = loxodromic_data(L);
        if (std::abs(L.c) < 1e-300) {
            double s = std::sqrt(std::abs(d.multiplier));
            cplx p = d.fixed_attracting.inf ? d.fixed_repelling.z : d.fixed_attracting.z;
            if (d.fixed_repelling.inf) {
                out.push_back({p, 1.0 / s, true});
                out.push_back({p, s, false});
            } else {
                out.push_back({p, s, false});
                out.push_back({p, 1.0 / s, true});
            }
        } else {
            double r = 1.0 / std::abs(L.c);
            out.push_back({-L.d / L.c, r, false});
            out.push_back({L.a / L.c, r, false});
        }
    }
    return out;
}

namespace {

bool discs_disjoint(const SchottkyCircle& a, const SchottkyCircle& b)
{
    double d = std::abs(a.center - b.center);
    if (a.contains_infinity && b.contains_infinity) return false;
    if (a.contains_infinity) return d + b.radius < a.radius;
    if (b.contains_infinity) return d + a.radius < b.radius;
    return d > a.radius + b.radius;
}

std::string circle_name(std::size_t i)
{
    std::ostringstream os;
    os << "C_" << (i % 2 ? "-" : "") << (i / 2 + 1);
    return os.str();
}

}  // namespace

void validate_group(const MarkedSchottkyGroup& g)
{
    if (g.genus < 1 || int(g.generators.size()) != g.genus)
        throw Error(ErrorKind::generator_count, "generator count does not match genus");
    for (std::size_t r = 0; r < g.generators.size(); ++r) {
        Classification c = classify(g.generators[r]);
        if (c.kind != MoebiusKind::loxodromic || c.degenerate)
            throw Error(ErrorKind::not_loxodromic, "generator L_" + std::to_string(r + 1) + " is not loxodromic");
    }
    if (g.circles.empty()) return;
    if (g.circles.size() != 2 * g.generators.size())
        throw Error(ErrorKind::schottky_condition, "expected 2g circles");
    for (std::size_t i = 0; i < g.circles.size(); ++i) {
        if (!(g.circles[i].radius > 0)) throw Error(ErrorKind::schottky_condition, circle_name(i) + " has no radius");
        for (std::size_t j = i + 1; j < g.circles.size(); ++j)
            if (!discs_disjoint(g.circles[i], g.circles[j]))
                throw Error(ErrorKind::schottky_condition,
                            "discs bounded by " + circle_name(i) + " and " + circle_name(j) + " overlap");
    }
    for (std::size_t r = 0; r < g.generators.size(); ++r) {
        const MoebiusMap& L = g.generators[r];
        const SchottkyCircle& cp = g.circles[2 * r];
        const SchottkyCircle& cm = g.circles[2 * r + 1];
        LoxodromicData d = loxodromic_data(L);
        if (!cp.in_closed_disc(d.fixed_repelling) || !cm.in_closed_disc(d.fixed_attracting))
            throw Error(ErrorKind::schottky_condition,
                        "L_" + std::to_string(r + 1) + " fixed points are not inside their discs");
        double scale = std::max(1.0, cm.radius);
        for (int k = 0; k < 64; ++k) {
            cplx z = cp.center + std::polar(cp.radius, 2 * pi * (k + 0.5) / 64);
            if (L.is_pole(z)) throw Error(ErrorKind::schottky_condition, "circle passes through a pole");
            cplx w = L.apply(z);
            if (std::abs(std::abs(w - cm.center) - cm.radius) > 1e-9 * scale)
                throw Error(ErrorKind::schottky_condition,
                            "L_" + std::to_string(r + 1) + " does not map " + circle_name(2 * r) + " onto " +
                                circle_name(2 * r + 1));
        }
    }
}

MarkedSchottkyGroup make_group(const std::vector<MoebiusMap>& generators, const std::vector<SchottkyCircle>& circles)
{
    MarkedSchottkyGroup g;
    g.genus = int(generators.size());
    g.generators = generators;
    if (g.genus < 1) throw Error(ErrorKind::generator_count, "at least one generator required");
    for (std::size_t r = 0; r < generators.size(); ++r) {
        Classification c = classify(generators[r]);
        if (c.kind != MoebiusKind::loxodromic || c.degenerate)
            throw Error(ErrorKind::not_loxodromic, "generator L_" + std::to_string(r + 1) + " is not loxodromic");
    }
    g.circles = circles.empty() ? default_circles(generators) : circles;
    validate_group(g);
    return g;
}

SchottkyCircle transform_circle(const SchottkyCircle& c, const MoebiusMap& h)
{
    cplx w[3];
    for (int k = 0; k < 3; ++k) {
        cplx z = c.center + std::polar(c.radius, 2 * pi * k / 3.0 + 0.1);
        SpherePoint p = h.apply(SpherePoint{z, false});
        if (p.inf) throw Error(ErrorKind::schottky_condition, "circle is mapped to a line");
        w[k] = p.z;
    }
    // circumcircle of the three image points
    cplx a = w[0], b = w[1] - a, cc = w[2] - a;
    double dd = 2.0 * (b.real() * cc.imag() - b.imag() * cc.real());
    if (std::abs(dd) < 1e-300) throw Error(ErrorKind::schottky_condition, "degenerate circle image");
    double ux = (cc.imag() * std::norm(b) - b.imag() * std::norm(cc)) / dd;
    double uy = (b.real() * std::norm(cc) - cc.real() * std::norm(b)) / dd;
    SchottkyCircle out;
    out.center = a + cplx(ux, uy);
    out.radius = std::hypot(ux, uy);
    SpherePoint inner = c.contains_infinity ? SpherePoint::infinity() : SpherePoint{c.center, false};
    SpherePoint img = h.apply(inner);
    out.contains_infinity = img.inf || std::abs(img.z - out.center) > out.radius;
    return out;
}

MarkedSchottkyGroup conjugate_group(const MarkedSchottkyGroup& g, const MoebiusMap& h)
{
    MarkedSchottkyGroup out;
    out.genus = g.genus;
    for (auto& L : g.generators) out.generators.push_back(conjugate(L, h));
    for (auto& c : g.circles) out.circles.push_back(transform_circle(c, h));
    out.normalized = false;
    return out;
}

MarkedSchottkyGroup validate_and_normalize(const MarkedSchottkyGroup& g)
{
    validate_group(g);
    LoxodromicData d1 = loxodromic_data(g.generators[0]);
    // N: A1 -> 0, R1 -> inf, A2 -> 1
    MoebiusMap N;
    const SpherePoint& A = d1.fixed_attracting;
    const SpherePoint& R = d1.fixed_repelling;
    if (A.inf)
        N = MoebiusMap(0.0, 1.0, 1.0, -R.z);  // 1/(z-R)
    else if (R.inf)
        N = MoebiusMap(1.0, -A.z, 0.0, 1.0);
    else
        N = MoebiusMap(1.0, -A.z, 1.0, -R.z);
    if (g.genus >= 2) {
        LoxodromicData d2 = loxodromic_data(g.generators[1]);
        SpherePoint p = N.apply(d2.fixed_attracting);
        if (p.inf || p.z == 0.0)
            throw Error(ErrorKind::schottky_condition, "L_2 attracting fixed point collides with L_1 fixed points");
        N = MoebiusMap::scaling(1.0 / p.z) * N;
    }
    MarkedSchottkyGroup out = conjugate_group(g, N);
    if (!g.circles.empty()) validate_group(out);
    out.normalized = true;
    return out;
}

// ---- words ---------------------------------------------------------------

long word_count(int genus, int n)
{
    long total = 0, shell = 2L * genus;
    for (int k = 1; k <= n; ++k) {
        total += shell;
        shell *= (2L * genus - 1);
    }
    return total;
}

void for_each_word(const MarkedSchottkyGroup& g, int n, const std::function<void(const ReducedWord&)>& fn)
{
    auto maps = g.letter_maps();
    std::vector<ReducedWord> shell;
    for (Letter l = 0; l < 2 * g.genus; ++l) shell.push_back({{l}, maps[l]});
    for (int k = 1; k <= n; ++k) {
        for (auto& w : shell) fn(w);
        if (k == n) break;
        std::vector<ReducedWord> next;
        next.reserve(shell.size() * (2 * g.genus - 1));
        for (auto& w : shell)
            for (Letter l = 0; l < 2 * g.genus; ++l) {
                if (l == inverse_letter(w.letters.back())) continue;
                ReducedWord v{w.letters, compose(w.element, maps[l])};
                v.letters.push_back(l);
                next.push_back(std::move(v));
            }
        shell.swap(next);
    }
}

std::vector<ReducedWord> enumerate_words(const MarkedSchottkyGroup& g, int n)
{
    std::vector<ReducedWord> out;
    for_each_word(g, n, [&](const ReducedWord& w) { out.push_back(w); });
    return out;
}

WordTable build_word_table(const MarkedSchottkyGroup& g, int n)
{
    WordTable t;
    t.max_length = n;
    auto maps = g.letter_maps();
    t.element.push_back(MoebiusMap::identity());
    t.length.push_back(0);
    t.first.push_back(0);
    t.last.push_back(0);
    std::size_t lo = 0, hi = 1;
    for (int k = 1; k <= n; ++k) {
        for (std::size_t i = lo; i < hi; ++i)
            for (Letter l = 0; l < 2 * g.genus; ++l) {
                if (k > 1 && l == inverse_letter(t.last[i])) continue;
                t.element.push_back(compose(t.element[i], maps[l]));
                t.length.push_back(std::uint8_t(k));
                t.first.push_back(k == 1 ? l : t.first[i]);
                t.last.push_back(l);
            }
        lo = hi;
        hi = t.element.size();
    }
    return t;
}

bool is_cyclically_reduced(const std::vector<Letter>& w)
{
    if (w.empty()) return true;
    for (std::size_t i = 0; i + 1 < w.size(); ++i)
        if (w[i + 1] == inverse_letter(w[i])) return false;
    return w.size() == 1 || w.back() != inverse_letter(w.front());
}

bool is_proper_power(const std::vector<Letter>& w)
{
    std::size_t n = w.size();
    for (std::size_t p = 1; p < n; ++p) {
        if (n % p) continue;
        bool per = true;
        for (std::size_t i = p; i < n && per; ++i) per = w[i] == w[i - p];
        if (per) return true;
    }
    return false;
}

std::vector<Letter> minimal_rotation(const std::vector<Letter>& w)
{
    std::vector<Letter> best = w, cur = w;
    for (std::size_t s = 1; s < w.size(); ++s) {
        std::rotate(cur.begin(), cur.begin() + 1, cur.end());
        if (cur < best) best = cur;
    }
    return best;
}

namespace {

// w is a Lyndon word: strictly smaller than each proper rotation
bool is_lyndon(const std::vector<Letter>& w)
{
    std::size_t n = w.size();
    for (std::size_t s = 1; s < n; ++s) {
        for (std::size_t i = 0; i < n; ++i) {
            Letter a = w[i], b = w[(i + s) % n];
            if (a < b) goto next;
            if (a > b) return false;
        }
        return false;  // equal rotation: periodic
    next:;
    }
    return true;
}

}  // namespace

void for_each_primitive_class(const MarkedSchottkyGroup& g, int n, const std::function<void(const PrimitiveClass&)>& fn)
{
    auto maps = g.letter_maps();
    int L = 2 * g.genus;
    for (int len = 1; len <= n; ++len) {
        std::vector<Letter> w(len);
        std::vector<MoebiusMap> prefix(len + 1);
        prefix[0] = MoebiusMap::identity();
        // depth-first in lexicographic order
        std::function<void(int)> rec = [&](int pos) {
            if (pos == len) {
                if (len > 1 && w.back() == inverse_letter(w.front())) return;
                if (!is_lyndon(w)) return;
                const MoebiusMap& e = prefix[len];
                LoxodromicData d = loxodromic_data(e);
                fn(PrimitiveClass{w, e, d.multiplier, d.length, d.holonomy});
                return;
            }
            for (int l = 0; l < L; ++l) {
                if (pos > 0 && Letter(l) == inverse_letter(w[pos - 1])) continue;
                // a Lyndon word starts with its smallest letter
                if (pos > 0 && Letter(l) < w[0]) continue;
                w[pos] = Letter(l);
                prefix[pos + 1] = compose(prefix[pos], maps[l]);
                rec(pos + 1);
            }
        };
        rec(0);
    }
}

std::vector<PrimitiveClass> primitive_classes(const MarkedSchottkyGroup& g, int n)
{
    std::vector<PrimitiveClass> out;
    for_each_primitive_class(g, n, [&](const PrimitiveClass& c) { out.push_back(c); });
    return out;
}

DeltaEstimate delta_estimate(const MarkedSchottkyGroup& g, cplx z0, int n)
{
    if (n < 4) throw Error(ErrorKind::domain, "delta_estimate needs max_length >= 4");
    // log of the spherical derivative |gamma'(z0)| (1+|z0|^2)/(1+|gamma z0|^2), grouped by shell
    std::vector<std::vector<double>> logs(n + 1);
    double base = std::log1p(std::norm(z0));
    for_each_word(g, n, [&](const ReducedWord& w) {
        const MoebiusMap& e = w.element;
        cplx den = e.c * z0 + e.d;
        cplx gz = (e.a * z0 + e.b) / den;
        double v = -2.0 * std::log(std::abs(den)) + base - std::log1p(std::norm(gz));
        logs[w.letters.size()].push_back(v);
    });
    int k0 = std::max(2, n / 2);
    auto fit = [&](double s, double* resid) {
        std::vector<double> x, y;
        for (int k = k0; k <= n; ++k) {
            double m = -1e300;
            for (double v : logs[k]) m = std::max(m, s * v);
            double acc = 0;
            for (double v : logs[k]) acc += std::exp(s * v - m);
            x.push_back(k);
            y.push_back(m + std::log(acc));
        }
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            mx += x[i];
            my += y[i];
        }
        mx /= x.size();
        my /= x.size();
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sxy += (x[i] - mx) * (y[i] - my);
            sxx += (x[i] - mx) * (x[i] - mx);
        }
        double slope = sxy / sxx;
        if (resid) {
            double r = 0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                double e = y[i] - (my + slope * (x[i] - mx));
                r += e * e;
            }
            *resid = std::sqrt(r / x.size());
        }
        return slope;
    };
    DeltaEstimate out{0.0, 0.0};
    double r0;
    if (fit(0.0, &r0) <= 1e-12) {
        out.quality = r0;
        return out;
    }
    // coarse scan over 12 exponents, then bisection on the bracket
    const int ns = 12;
    double lo = 0.0, hi = -1.0;
    for (int i = 1; i <= ns; ++i) {
        double s = 2.0 * i / ns;
        if (fit(s, nullptr) < 0) {
            hi = s;
            lo = 2.0 * (i - 1) / ns;
            break;
        }
    }
    if (hi < 0) {
        out.delta = 2.0;
        fit(2.0, &out.quality);
        return out;
    }
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        (fit(mid, nullptr) > 0 ? lo : hi) = mid;
    }
    out.delta = 0.5 * (lo + hi);
    fit(out.delta, &out.quality);
    return out;
}

// ---- fundamental domain --------------------------------------------------

FundamentalDomain::FundamentalDomain(const MarkedSchottkyGroup& g) : g_(g)
{
    if (g_.circles.empty()) throw Error(ErrorKind::domain, "fundamental domain needs circle data");
}

bool FundamentalDomain::contains(cplx z) const
{
    for (auto& c : g_.circles)
        if (c.in_open_disc(z)) return false;
    return true;
}

bool FundamentalDomain::contains(SpherePoint p) const
{
    if (p.inf) {
        for (auto& c : g_.circles)
            if (c.contains_infinity) return false;
        return true;
    }
    return contains(p.z);
}

double FundamentalDomain::clearance(cplx z) const
{
    double m = 1e300;
    for (auto& c : g_.circles) m = std::min(m, c.clearance(z));
    return m;
}

Reduction FundamentalDomain::reduce(cplx z, int budget) const
{
    Reduction r{z, {}, MoebiusMap::identity()};
    for (int step = 0; step < budget; ++step) {
        int hit = -1;
        for (std::size_t i = 0; i < g_.circles.size(); ++i)
            if (g_.circles[i].in_open_disc(r.point)) {
                hit = int(i);
                break;
            }
        if (hit < 0) return r;
        // inside C_r's disc: apply L_r; inside C_{-r}'s disc: apply L_r^{-1}
        Letter l = Letter(hit);
        MoebiusMap m = g_.letter_map(l);
        r.point = m.apply(r.point);
        r.element = m * r.element;
        r.word.insert(r.word.begin(), l);
    }
    throw Error(ErrorKind::budget, "reduction did not reach the fundamental domain within the word budget");
}

cplx default_base_point(const MarkedSchottkyGroup& g)
{
    FundamentalDomain D(g);
    // scan a polar grid for the point with the largest clearance relative to |z|
    double best = -1e300;
    cplx arg{0.0, 1.0};
    for (int i = 0; i < 48; ++i)
        for (int j = 0; j < 64; ++j) {
            double r = std::exp(-3.0 + 6.0 * i / 47.0);
            cplx z = std::polar(r, 2 * pi * (j + 0.25) / 64);
            double c = D.clearance(z) / (1.0 + std::abs(z));
            if (c > best) {
                best = c;
                arg = z;
            }
        }
    return arg;
}

}  // namespace sktau
