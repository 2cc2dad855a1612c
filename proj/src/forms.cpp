#include "sktau/forms.hpp"

#include <algorithm>
#include <queue>
#include <cmath>
#include <sstream>

namespace sktau {

namespace {

// geometric extrapolation of the shell magnitudes (shell 0 excluded), using
// the slower of the last two decay ratios
double shell_tail(const std::vector<double>& m)
{
    std::size_t n = m.size();
    if (n < 3) return n ? m.back() : 0.0;
    double last = m[n - 1];
    double r = 0;
    for (std::size_t k = std::max<std::size_t>(2, n - 2); k < n; ++k)
        r = std::max(r, m[k - 1] > 0 ? m[k] / m[k - 1] : 1.0);
    if (r >= 1.0) return 10.0 * last;
    return last * r / (1.0 - r);
}

bool segments_cross(cplx a, cplx b, cplx c, cplx d)
{
    auto cross = [](cplx u, cplx v) { return u.real() * v.imag() - u.imag() * v.real(); };
    double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
    double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

bool paths_cross(const Path& p, const Path& q)
{
    auto a = p.sample(64), b = q.sample(64);
    for (std::size_t i = 0; i + 1 < a.size(); ++i)
        for (std::size_t j = 0; j + 1 < b.size(); ++j)
            if (segments_cross(a[i], a[i + 1], b[j], b[j + 1])) return true;
    return false;
}

double min_radius(const MarkedSchottkyGroup& g)
{
    double r = 1e300;
    for (auto& c : g.circles) r = std::min(r, c.radius);
    return r;
}

}  // namespace

double path_distance(const Path& p, cplx z)
{
    double m = 1e300;
    for (cplx w : p.sample(200)) m = std::min(m, std::abs(w - z));
    return m;
}

bool is_full_circle(const Path& path)
{
    return path.pieces().size() == 1 && path.pieces()[0].full_circle();
}

// ---- holomorphic basis ---------------------------------------------------

HolomorphicBasis::HolomorphicBasis(const MarkedSchottkyGroup& g, int n, bool check_delta)
    : group_(g), max_length_(n)
{
    if (n < 0) throw Error(ErrorKind::domain, "word length must be non-negative");
    if (check_delta && g.genus >= 2) {
        delta_ = delta_estimate(g, default_base_point(g), std::max(4, std::min(n, 8))).delta;
        if (!(delta_ < 1.0))
            throw Error(ErrorKind::domain,
                        "Poincare series diverge: exponent of convergence estimate " + std::to_string(delta_));
    }
    WordTable t = build_word_table(g, n);
    int gg = g.genus;
    poles_.resize(gg);
    shells_.resize(gg);
    for (int j = 0; j < gg; ++j) {
        LoxodromicData d = loxodromic_data(g.generators[j]);
        int cur = -1;
        for (std::size_t i = 0; i < t.element.size(); ++i) {
            if (i > 0 && (t.last[i] >> 1) == j) continue;
            int len = t.length[i];
            while (cur < len) {
                shells_[j].push_back(poles_[j].size());
                ++cur;
            }
            const MoebiusMap& m = t.element[i];
            SpherePoint A = m.apply(d.fixed_attracting);
            SpherePoint B = m.apply(d.fixed_repelling);
            if (A.inf && B.inf) continue;
            // homogeneous form: gamma A - gamma B = (A1 B2 - A2 B1) / ((c A1 + d A2)(c B1 + d B2))
            cplx a1 = d.fixed_attracting.inf ? 1.0 : d.fixed_attracting.z, a2 = d.fixed_attracting.inf ? 0.0 : 1.0;
            cplx b1 = d.fixed_repelling.inf ? 1.0 : d.fixed_repelling.z, b2 = d.fixed_repelling.inf ? 0.0 : 1.0;
            cplx diff = 0.0;
            if (!A.inf && !B.inf) diff = (a1 * b2 - a2 * b1) / ((m.c * a1 + m.d * a2) * (m.c * b1 + m.d * b2));
            poles_[j].push_back({A.inf ? 0.0 : A.z, B.inf ? 0.0 : B.z, diff, !A.inf, !B.inf});
        }
        while (cur < n) {
            shells_[j].push_back(poles_[j].size());
            ++cur;
        }
        shells_[j].push_back(poles_[j].size());
    }
    raw_periods_.resize(gg, gg);
    QuadratureConfig cfg;
    cfg.target_tolerance = 1e-14;
    for (int i = 0; i < gg; ++i) {
        Path a = a_cycle(g, i);
        for (int j = 0; j < gg; ++j) {
            auto r = contour_integral(
                [&](cplx z) {
                    cplx h, h1, h2;
                    double e;
                    raw(z, j, h, h1, h2, e);
                    return h;
                },
                a, cfg);
            raw_periods_(i, j) = r.value;
        }
    }
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(raw_periods_);
    if (!lu.isInvertible()) throw Error(ErrorKind::numerical, "a-period matrix of the raw series is singular");
    inv_ = lu.inverse();
    norm_residual_ = (raw_periods_ * inv_ - Eigen::MatrixXcd::Identity(gg, gg)).cwiseAbs().maxCoeff();
}

void HolomorphicBasis::raw(cplx z, int j, cplx& h, cplx& h1, cplx& h2, double& err) const
{
    const auto& P = poles_[j];
    const auto& S = shells_[j];
    cplx s0 = 0, s1 = 0, s2 = 0;
    double zr = z.real(), zi = z.imag();
    std::vector<double> mags;
    std::size_t nshell = S.size() - 1;
    for (std::size_t k = 0; k < nshell; ++k) {
        double r0 = 0, i0 = 0, r1 = 0, i1 = 0, r2 = 0, i2 = 0;
        for (std::size_t i = S[k]; i < S[k + 1]; ++i) {
            const Pole& q = P[i];
            if (q.has_a && q.has_b) {
                // t = diff uA uB, t (uA + uB), t (uA^2 + uA uB + uB^2)
                double ax = zr - q.a.real(), ay = zi - q.a.imag(), bx = zr - q.b.real(), by = zi - q.b.imag();
                double ma = 1.0 / (ax * ax + ay * ay), mb = 1.0 / (bx * bx + by * by);
                double uar = ax * ma, uai = -ay * ma, ubr = bx * mb, ubi = -by * mb;
                double pr = uar * ubr - uai * ubi, pi_ = uar * ubi + uai * ubr;
                double tr = q.diff.real() * pr - q.diff.imag() * pi_, ti = q.diff.real() * pi_ + q.diff.imag() * pr;
                double sr = uar + ubr, si = uai + ubi;
                double qr = uar * uar - uai * uai + ubr * ubr - ubi * ubi + pr;
                double qi = 2 * uar * uai + 2 * ubr * ubi + pi_;
                r0 += tr;
                i0 += ti;
                r1 += tr * sr - ti * si;
                i1 += tr * si + ti * sr;
                r2 += tr * qr - ti * qi;
                i2 += tr * qi + ti * qr;
            } else {
                cplx p = q.has_a ? q.a : q.b;
                double sg = q.has_a ? 1.0 : -1.0;
                double dx = zr - p.real(), dy = zi - p.imag();
                double m = 1.0 / (dx * dx + dy * dy);
                double tr = dx * m, ti = -dy * m;  // 1 / (z - p)
                double t2r = tr * tr - ti * ti, t2i = 2 * tr * ti;
                double t3r = t2r * tr - t2i * ti, t3i = t2r * ti + t2i * tr;
                r0 += sg * tr;
                i0 += sg * ti;
                r1 += sg * t2r;
                i1 += sg * t2i;
                r2 += sg * t3r;
                i2 += sg * t3i;
            }
        }
        cplx a0(r0, i0), a1(r1, i1), a2(r2, i2);
        s0 += a0;
        s1 += a1;
        s2 += a2;
        mags.push_back(std::abs(a0));
    }
    cplx f = 1.0 / (2.0 * pi * I);
    h = f * s0;
    h1 = -f * s1;
    h2 = 2.0 * f * s2;
    err = std::abs(f) * shell_tail(mags);
    if (!std::isfinite(std::abs(h)) || !std::isfinite(std::abs(h2)))
        throw Error(ErrorKind::numerical, "holomorphic series evaluated at a pole");
}

void HolomorphicBasis::eval(cplx z, cplx* w, cplx* w1, cplx* w2, double* err) const
{
    int gg = genus();
    std::vector<cplx> r0(gg), r1(gg), r2(gg);
    double e = 0;
    for (int j = 0; j < gg; ++j) {
        double ej;
        raw(z, j, r0[j], r1[j], r2[j], ej);
        e = std::max(e, ej);
    }
    for (int k = 0; k < gg; ++k) {
        cplx a = 0, b = 0, c = 0;
        for (int j = 0; j < gg; ++j) {
            a += r0[j] * inv_(j, k);
            b += r1[j] * inv_(j, k);
            c += r2[j] * inv_(j, k);
        }
        if (w) w[k] = a;
        if (w1) w1[k] = b;
        if (w2) w2[k] = c;
    }
    if (err) *err = e * inv_.cwiseAbs().maxCoeff() * gg;
}

std::vector<cplx> HolomorphicBasis::values(cplx z) const
{
    std::vector<cplx> w(genus());
    eval(z, w.data(), nullptr, nullptr);
    return w;
}

FormJet HolomorphicBasis::combine(const std::vector<cplx>& coeffs, cplx z) const
{
    int gg = genus();
    if (int(coeffs.size()) != gg) throw Error(ErrorKind::domain, "coefficient vector has the wrong length");
    std::vector<cplx> w(gg), w1(gg), w2(gg);
    double e;
    eval(z, w.data(), w1.data(), w2.data(), &e);
    FormJet j{0.0, 0.0, 0.0, 0.0};
    double cmax = 0;
    for (int k = 0; k < gg; ++k) {
        j.h += coeffs[k] * w[k];
        j.h1 += coeffs[k] * w1[k];
        j.h2 += coeffs[k] * w2[k];
        cmax += std::abs(coeffs[k]);
    }
    j.error = e * cmax;
    return j;
}

// ---- Bergman series ------------------------------------------------------

BergmanSeries::BergmanSeries(const MarkedSchottkyGroup& g, int n) : table_(build_word_table(g, n))
{
    int cur = -1;
    for (std::size_t i = 0; i < table_.element.size(); ++i)
        while (cur < table_.length[i]) {
            shells_.push_back(i);
            ++cur;
        }
    while (cur < n) {
        shells_.push_back(table_.element.size());
        ++cur;
    }
    shells_.push_back(table_.element.size());
}

namespace {

template <class Term>
TruncationReport shell_sum(const std::vector<std::size_t>& shells, std::size_t first, Term term)
{
    TruncationReport r;
    std::vector<double> mags;
    std::size_t ns = shells.size() - 1;
    for (std::size_t k = 0; k < ns; ++k) {
        cplx a = 0;
        for (std::size_t i = std::max(first, shells[k]); i < shells[k + 1]; ++i) a += term(i);
        r.value += a;
        mags.push_back(std::abs(a));
    }
    r.terms_used = long(shells.back());
    if (first > 0 && !mags.empty()) mags.erase(mags.begin());
    r.error_estimate = shell_tail(mags);
    r.converged = std::isfinite(std::abs(r.value));
    return r;
}

}  // namespace

TruncationReport BergmanSeries::bidifferential(cplx z, cplx w) const
{
    const auto& E = table_.element;
    for (const auto& m : E) {
        if (m.is_pole(w)) continue;
        if (std::abs(z - m.apply(w)) < 1e-8)
            throw Error(ErrorKind::domain, "Bergman kernel evaluated near its pole z = gamma w");
    }
    return shell_sum(shells_, 0, [&](std::size_t i) {
        const MoebiusMap& m = E[i];
        cplx den = z * (m.c * w + m.d) - m.a * w - m.b;
        cplx d2 = den * den;
        return std::conj(d2) / std::norm(d2);
    });
}

TruncationReport BergmanSeries::projective_connection(cplx z) const
{
    const auto& E = table_.element;
    auto r = shell_sum(shells_, 1, [&](std::size_t i) {
        const MoebiusMap& m = E[i];
        cplx den = (m.c * z + (m.d - m.a)) * z - m.b;
        cplx d2 = den * den;
        return std::conj(d2) / std::norm(d2);
    });
    r.value *= 6.0;
    r.error_estimate *= 6.0;
    if (!std::isfinite(std::abs(r.value)))
        throw Error(ErrorKind::numerical, "projective connection evaluated at a fixed point");
    return r;
}

cplx projective_connection_of_form(const FormJet& j)
{
    if (!(std::abs(j.h) > 1e-300)) throw Error(ErrorKind::domain, "projective connection at a zero of the form");
    cplx u = j.h1 / j.h;
    return j.h2 / j.h - 1.5 * u * u;
}

// ---- cycles --------------------------------------------------------------

Path a_cycle(const MarkedSchottkyGroup& g, int i)
{
    const SchottkyCircle& c = g.circles.at(2 * i + 1);
    return Path::circle(c.center, c.radius, true);
}

Path b_cycle(const MarkedSchottkyGroup& g, int i, double angle, const std::vector<double>& breaks)
{
    const SchottkyCircle& c = g.circles.at(2 * i);
    cplx P = c.center + std::polar(c.radius, angle);
    cplx Q = g.generators[i].apply(P);
    std::vector<cplx> pts{P};
    for (double s : breaks) pts.push_back(P + s * (Q - P));
    pts.push_back(Q);
    return Path::polyline(pts);
}

std::vector<double> grade_segment(const MarkedSchottkyGroup& g, cplx a, cplx b)
{
    auto eff = [&](cplx z) {
        double best = 1e300, r = 0;
        for (const auto& c : g.circles) {
            double d = c.clearance(z);
            if (std::abs(d) < best) {
                best = std::abs(d);
                r = c.radius;
            }
        }
        double cl = 1e300;
        for (const auto& c : g.circles) cl = std::min(cl, c.clearance(z));
        return std::max(cl, 0.0) + 0.25 * r;
    };
    std::vector<double> out;
    double len = std::abs(b - a);
    std::function<void(double, double, int)> split = [&](double s0, double s1, int depth) {
        double m = 0.5 * (s0 + s1);
        double e = std::min({eff(a + s0 * (b - a)), eff(a + m * (b - a)), eff(a + s1 * (b - a))});
        if ((s1 - s0) * len <= e || depth > 40) return;
        split(s0, m, depth + 1);
        out.push_back(m);
        split(m, s1, depth + 1);
    };
    split(0.0, 1.0, 0);
    return out;
}

void complete_b_cycles(const MarkedSchottkyGroup& g, CycleChoice& choice)
{
    if (choice.b_angles.empty()) choice.b_angles = default_b_angles(g);
    if (choice.b_breaks.empty())
        for (int i = 0; i < g.genus; ++i) {
            Path p = b_cycle(g, i, choice.b_angles[i]);
            choice.b_breaks.push_back(grade_segment(g, p.start(), p.end()));
        }
}

std::vector<double> default_b_angles(const MarkedSchottkyGroup& g)
{
    if (g.genus == 1) return {0.0};
    FundamentalDomain D(g);
    double margin = 0.02 * min_radius(g);
    std::vector<double> out;
    std::vector<Path> chosen;
    for (int i = 0; i < g.genus; ++i) {
        double best = -1, best_angle = 0;
        for (int k = 0; k < 144; ++k) {
            double th = 2 * pi * k / 144;
            Path p = b_cycle(g, i, th);
            cplx a = p.start(), b = p.end();
            double score = 1e300;
            for (int s = 1; s < 200; ++s) {
                double u = s / 200.0;
                cplx z = a + u * (b - a);
                double c = D.clearance(z);
                if (c <= 0) {
                    score = -1;
                    break;
                }
                if (u > 0.05 && u < 0.95) score = std::min(score, c);
            }
            if (score < margin) continue;
            bool crosses = false;
            for (auto& q : chosen) crosses = crosses || segments_cross(a, b, q.start(), q.end());
            if (crosses) continue;
            if (score > best) {
                best = score;
                best_angle = th;
            }
        }
        if (best < 0) throw Error(ErrorKind::path, "no b-cycle chord inside the fundamental domain for generator " +
                                                       std::to_string(i + 1));
        out.push_back(best_angle);
        chosen.push_back(b_cycle(g, i, best_angle));
    }
    return out;
}

PeriodMatrix period_matrix(const HolomorphicBasis& basis, const std::vector<double>& angles)
{
    CycleChoice c;
    c.b_angles = angles;
    return period_matrix(basis, c);
}

CycleNodes cycle_nodes(const HolomorphicBasis& basis, const Path& path, const CycleChoice& choice)
{
    CycleNodes c;
    c.rule = contour_rule_fixed(path, is_full_circle(path) ? choice.circle_panels : choice.panels);
    std::size_t n = c.rule.z.size(), gg = std::size_t(basis.genus());
    c.w.resize(n * gg);
    c.w1.resize(n * gg);
    c.w2.resize(n * gg);
    c.err.resize(n);
    parallel_for(n, [&](std::size_t k) {
        basis.eval(c.rule.z[k], &c.w[k * gg], &c.w1[k * gg], &c.w2[k * gg], &c.err[k]);
    });
    return c;
}

namespace {

cplx node_period(const CycleNodes& c, int gg, int j)
{
    std::vector<cplx> v(c.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = c.w[k * gg + j];
    return c.rule.apply(v);
}

}  // namespace

PeriodMatrix period_matrix(const HolomorphicBasis& basis, CycleChoice choice)
{
    complete_b_cycles(basis.group(), choice);
    int gg = basis.genus();
    PeriodMatrix pm;
    pm.tau.resize(gg, gg);
    Eigen::MatrixXcd A(gg, gg);
    for (int i = 0; i < gg; ++i) {
        auto b = cycle_nodes(basis, b_cycle(basis.group(), i, choice.b_angles.at(i), choice.b_breaks.at(i)), choice);
        auto a = cycle_nodes(basis, a_cycle(basis.group(), i), choice);
        for (int j = 0; j < gg; ++j) {
            pm.tau(i, j) = node_period(b, gg, j);
            A(i, j) = node_period(a, gg, j);
        }
    }
    pm.a_normalization_residual = (A - Eigen::MatrixXcd::Identity(gg, gg)).cwiseAbs().maxCoeff();
    pm.symmetry_residual = (pm.tau - pm.tau.transpose()).cwiseAbs().maxCoeff();
    Eigen::MatrixXd im = 0.5 * (pm.tau.imag() + pm.tau.imag().transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(im);
    pm.min_imag_eigenvalue = es.eigenvalues().minCoeff();
    return pm;
}

// ---- zeros ---------------------------------------------------------------

int count_zeros(const HolomorphicBasis& basis, const std::vector<cplx>& coeffs)
{
    QuadratureConfig cfg;
    cfg.target_tolerance = 1e-8;
    cplx total = 0;
    for (const auto& c : basis.group().circles) {
        // the domain lies inside a circle containing infinity, outside the others
        Path p = Path::circle(c.center, c.radius, c.contains_infinity);
        auto r = contour_integral(
            [&](cplx z) {
                FormJet j = basis.combine(coeffs, z);
                return j.h1 / j.h;
            },
            p, cfg);
        total += r.value;
    }
    cplx n = total / (2.0 * pi * I);
    if (std::abs(n - std::round(n.real())) > 0.1)
        throw Error(ErrorKind::stratum, "argument principle gives a non-integer count; a zero lies on the "
                                        "domain boundary, perturb the data");
    return int(std::lround(n.real()));
}

namespace {

bool newton_zero(const HolomorphicBasis& b, const std::vector<cplx>& co, cplx& z, int iters = 60)
{
    for (int it = 0; it < iters; ++it) {
        FormJet j = b.combine(co, z);
        if (!(std::abs(j.h1) > 0)) return false;
        cplx step = j.h / j.h1;
        double lim = 0.2 * (1 + std::abs(z));
        if (std::abs(step) > lim) step *= lim / std::abs(step);
        z -= step;
        if (!std::isfinite(std::abs(z))) return false;
        if (std::abs(step) < 1e-15 * (1 + std::abs(z))) return true;
    }
    FormJet j = b.combine(co, z);
    return std::abs(j.h / j.h1) < 1e-12 * (1 + std::abs(z));
}

ZeroData zero_data(const HolomorphicBasis& b, const std::vector<cplx>& co, cplx z)
{
    FormJet j = b.combine(co, z);
    if (!(std::abs(j.h1) > 1e-12 * (std::abs(j.h2) + 1e-300)))
        throw Error(ErrorKind::stratum, "zero is not simple; perturb the coefficients");
    return {z, j.h1, j.h2 / (2.0 * j.h1)};
}

}  // namespace

std::vector<ZeroData> find_zeros(const HolomorphicBasis& basis, const std::vector<cplx>& coeffs,
                                 const std::vector<cplx>& hint)
{
    const auto& g = basis.group();
    int expect = 2 * g.genus - 2;
    std::vector<ZeroData> out;
    if (expect == 0) return out;
    FundamentalDomain D(g);
    if (!hint.empty()) {
        for (cplx z : hint) {
            if (!newton_zero(basis, coeffs, z)) throw Error(ErrorKind::numerical, "zero tracking failed to converge");
            out.push_back(zero_data(basis, coeffs, z));
        }
        return out;
    }
    // seeds: local minima of |h| on a grid with a short series
    HolomorphicBasis coarse(g, std::min(basis.max_word_length(), 4), false);
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    bool bounded = false;
    for (const auto& c : g.circles) {
        x0 = std::min(x0, c.center.real() - c.radius);
        x1 = std::max(x1, c.center.real() + c.radius);
        y0 = std::min(y0, c.center.imag() - c.radius);
        y1 = std::max(y1, c.center.imag() + c.radius);
        if (c.contains_infinity) {
            x0 = c.center.real() - c.radius;
            x1 = c.center.real() + c.radius;
            y0 = c.center.imag() - c.radius;
            y1 = c.center.imag() + c.radius;
            bounded = true;
            break;
        }
    }
    if (!bounded) {
        double w = std::max(x1 - x0, y1 - y0);
        x0 -= w;
        x1 += w;
        y0 -= w;
        y1 += w;
    }
    const int N = 64;
    std::vector<double> mag(N * N, 1e300);
    auto at = [&](int i, int k) { return cplx(x0 + (x1 - x0) * (i + 0.5) / N, y0 + (y1 - y0) * (k + 0.5) / N); };
    for (int i = 0; i < N; ++i)
        for (int k = 0; k < N; ++k) {
            cplx z = at(i, k);
            if (D.clearance(z) <= 0) continue;
            mag[i * N + k] = std::abs(coarse.combine(coeffs, z).h);
        }
    std::vector<cplx> found;
    for (int i = 0; i < N; ++i)
        for (int k = 0; k < N; ++k) {
            double m = mag[i * N + k];
            if (m >= 1e300) continue;
            bool local = true;
            for (int di = -1; di <= 1 && local; ++di)
                for (int dk = -1; dk <= 1; ++dk) {
                    int a = i + di, b = k + dk;
                    if ((di || dk) && a >= 0 && b >= 0 && a < N && b < N && mag[a * N + b] < m) {
                        local = false;
                        break;
                    }
                }
            if (!local) continue;
            cplx z = at(i, k);
            if (!newton_zero(coarse, coeffs, z) || !newton_zero(basis, coeffs, z)) continue;
            if (!D.contains(z)) {
                try {
                    z = D.reduce(z).point;
                } catch (const Error&) {
                    continue;
                }
                if (!newton_zero(basis, coeffs, z)) continue;
            }
            bool dup = false;
            for (cplx w : found) dup = dup || std::abs(w - z) < 1e-8 * (1 + std::abs(z));
            if (!dup) found.push_back(z);
        }
    int counted = count_zeros(basis, coeffs);
    if (counted != expect || int(found.size()) != expect) {
        std::ostringstream os;
        os << "expected " << expect << " simple zeros in the fundamental domain, argument principle gives "
           << counted << ", Newton found " << found.size() << "; perturb the coefficients";
        throw Error(ErrorKind::stratum, os.str());
    }
    std::sort(found.begin(), found.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
    for (cplx z : found) out.push_back(zero_data(basis, coeffs, z));
    return out;
}

// ---- Hurwitz coordinates --------------------------------------------------

Path HurwitzPoint::s_cycle(int i) const
{
    int g = genus();
    if (i < 0 || i >= dimension()) throw Error(ErrorKind::domain, "coordinate index out of range");
    if (i < g) return b_paths[i].reversed();
    if (i < 2 * g) return a_paths[i - g];
    return zero_circles[i - 2 * g];
}

CycleNodes HurwitzPoint::s_nodes(int i) const
{
    int g = genus();
    if (i < g && i < int(b_nodes.size())) {
        CycleNodes c = b_nodes[i];
        for (auto& w : c.rule.w) w = -w;
        return c;
    }
    return cycle_nodes(*basis, s_cycle(i), choice);
}

namespace {

Path l_path(cplx a, cplx b, const std::vector<cplx>& way, const std::vector<double>& breaks = {})
{
    std::vector<cplx> v{a};
    v.insert(v.end(), way.begin(), way.end());
    v.push_back(b);
    std::vector<cplx> pts{a};
    std::size_t leg = 0;
    for (double s : breaks) {
        if (s < 0) {
            pts.push_back(v[++leg]);
            continue;
        }
        pts.push_back(v[leg] + s * (v[leg + 1] - v[leg]));
    }
    for (++leg; leg < v.size(); ++leg) pts.push_back(v[leg]);
    return Path::polyline(pts);
}

std::vector<double> grade_l_path(const MarkedSchottkyGroup& g, cplx a, cplx b, const std::vector<cplx>& way)
{
    std::vector<cplx> v{a};
    v.insert(v.end(), way.begin(), way.end());
    v.push_back(b);
    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
        if (k) out.push_back(-1.0);
        auto br = grade_segment(g, v[k], v[k + 1]);
        out.insert(out.end(), br.begin(), br.end());
    }
    return out;
}

bool l_path_ok(const Path& p, const FundamentalDomain& D, const std::vector<Path>& bpaths,
               const std::vector<ZeroData>& zeros, std::size_t from, std::size_t to, double margin,
               double keep_off = 0.0)
{
    for (cplx z : p.sample(100))
        if (D.clearance(z) <= keep_off) return false;
    for (auto& b : bpaths)
        if (paths_cross(p, b)) return false;
    for (std::size_t k = 0; k < zeros.size(); ++k)
        if (k != from && k != to && path_distance(p, zeros[k].z) < margin) return false;
    return true;
}


// shortest grid route from zero 0 to zero j inside the domain, not crossing
// b-chords, shortcut greedily; returns the interior vertices
std::vector<cplx> route_l_path(const MarkedSchottkyGroup& g, const FundamentalDomain& D,
                               const std::vector<Path>& bpaths, const std::vector<ZeroData>& zeros, int j,
                               double margin, double keep_off)
{
    cplx a = zeros[0].z, b = zeros[j].z;
    keep_off = std::min(keep_off, 0.5 * std::min(D.clearance(a), D.clearance(b)));
    auto ok = [&](cplx u, cplx v) {
        return l_path_ok(Path::segment(u, v), D, bpaths, zeros, 0, std::size_t(j), margin, keep_off);
    };
    if (ok(a, b)) return {};
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& c : g.circles) {
        double r = c.contains_infinity ? c.radius : c.radius * 1.5;
        x0 = std::min(x0, c.center.real() - r);
        x1 = std::max(x1, c.center.real() + r);
        y0 = std::min(y0, c.center.imag() - r);
        y1 = std::max(y1, c.center.imag() + r);
    }
    const int N = 48;
    auto node = [&](int i, int k) { return cplx(x0 + (x1 - x0) * i / (N - 1), y0 + (y1 - y0) * k / (N - 1)); };
    std::vector<char> valid(N * N);
    double node_margin = std::max(margin, keep_off);
    for (int i = 0; i < N; ++i)
        for (int k = 0; k < N; ++k) valid[i * N + k] = D.clearance(node(i, k)) > node_margin;
    // Dijkstra from a virtual source connected to every grid node visible from a
    std::vector<double> dist(N * N + 1, 1e300);
    std::vector<int> prev(N * N + 1, -1);
    std::vector<char> done(N * N + 1, 0);
    using Q = std::pair<double, int>;
    std::priority_queue<Q, std::vector<Q>, std::greater<Q>> pq;
    for (int i = 0; i < N; ++i)
        for (int k = 0; k < N; ++k) {
            cplx z = node(i, k);
            if (!valid[i * N + k] || std::abs(z - a) > 3.0 * (x1 - x0) / N) continue;
            if (!ok(a, z)) continue;
            dist[i * N + k] = std::abs(z - a);
            pq.push({dist[i * N + k], i * N + k});
        }
    int target = N * N;
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (done[u]) continue;
        done[u] = 1;
        if (u == target) break;
        int i = u / N, k = u % N;
        cplx zu = node(i, k);
        if (std::abs(zu - b) <= 3.0 * (x1 - x0) / N && ok(zu, b)) {
            double nd = d + std::abs(zu - b);
            if (nd < dist[target]) {
                dist[target] = nd;
                prev[target] = u;
                pq.push({nd, target});
            }
        }
        for (int di = -1; di <= 1; ++di)
            for (int dk = -1; dk <= 1; ++dk) {
                int ii = i + di, kk = k + dk;
                if ((!di && !dk) || ii < 0 || kk < 0 || ii >= N || kk >= N || !valid[ii * N + kk]) continue;
                int v = ii * N + kk;
                cplx zv = node(ii, kk);
                bool cross = false;
                for (auto& bp : bpaths) cross = cross || segments_cross(zu, zv, bp.start(), bp.end());
                if (cross || D.clearance(0.5 * (zu + zv)) <= node_margin) continue;
                double nd = d + std::abs(zv - zu);
                if (nd < dist[v]) {
                    dist[v] = nd;
                    prev[v] = u;
                    pq.push({nd, v});
                }
            }
    }
    if (prev[target] < 0)
        throw Error(ErrorKind::path, "no admissible path between zeros 1 and " + std::to_string(j + 1));
    std::vector<cplx> route{b};
    for (int u = prev[target]; u >= 0; u = prev[u]) route.push_back(node(u / N, u % N));
    route.push_back(a);
    std::reverse(route.begin(), route.end());
    // greedy shortcutting
    std::vector<cplx> out;
    std::size_t cur = 0;
    while (cur + 1 < route.size()) {
        std::size_t nxt = route.size() - 1;
        while (nxt > cur + 1 && !ok(route[cur], route[nxt])) --nxt;
        if (nxt != route.size() - 1) out.push_back(route[nxt]);
        cur = nxt;
    }
    return out;
}

}  // namespace

HurwitzPoint hurwitz_coordinates(std::shared_ptr<const HolomorphicBasis> basis, const std::vector<cplx>& coeffs,
                                 CycleChoice choice, const std::vector<cplx>& hint)
{
    HurwitzPoint p;
    p.basis = basis;
    p.coeffs = coeffs;
    const auto& g = basis->group();
    int gg = g.genus;
    p.zeros = find_zeros(*basis, coeffs, hint);
    int m = int(p.zeros.size());
    complete_b_cycles(g, choice);
    for (int i = 0; i < gg; ++i) {
        p.a_paths.push_back(a_cycle(g, i));
        p.b_paths.push_back(b_cycle(g, i, choice.b_angles[i], choice.b_breaks[i]));
    }
    FundamentalDomain D(g);
    double margin = 0.05 * min_radius(g);
    if (m > 0) {
        for (int k = 0; k < m; ++k)
            for (auto& b : p.b_paths)
                if (path_distance(b, p.zeros[k].z) < 1e-6)
                    throw Error(ErrorKind::path, "b-cycle passes through a zero of the form");
        if (choice.l_waypoints.empty())
            for (int j = 1; j < m; ++j)
                try {
                    // keep well clear of the circles when possible, fewer graded pieces
                    choice.l_waypoints.push_back(route_l_path(g, D, p.b_paths, p.zeros, j, margin, 6 * margin));
                } catch (const Error&) {
                    choice.l_waypoints.push_back(route_l_path(g, D, p.b_paths, p.zeros, j, margin, 0.0));
                }
        if (choice.l_breaks.empty())
            for (int j = 1; j < m; ++j)
                choice.l_breaks.push_back(grade_l_path(g, p.zeros[0].z, p.zeros[j].z, choice.l_waypoints[j - 1]));
        for (int j = 1; j < m; ++j) {
            Path l = l_path(p.zeros[0].z, p.zeros[j].z, choice.l_waypoints.at(j - 1), choice.l_breaks.at(j - 1));
            for (int k = 0; k < m; ++k)
                if (k != 0 && k != j && path_distance(l, p.zeros[k].z) < 1e-6)
                    throw Error(ErrorKind::path, "l-path passes through a zero of the form");
            p.l_paths.push_back(l);
        }
        if (choice.zero_radii.empty()) {
            for (int j = 1; j < m; ++j) {
                cplx z = p.zeros[j].z;
                double r = D.clearance(z);
                for (int k = 0; k < m; ++k)
                    if (k != j) r = std::min(r, std::abs(p.zeros[k].z - z));
                choice.zero_radii.push_back(0.5 * r);
            }
        }
        for (int j = 1; j < m; ++j) p.zero_circles.push_back(Path::circle(p.zeros[j].z, choice.zero_radii.at(j - 1)));
    }
    p.choice = choice;
    for (auto& b : p.b_paths) p.b_nodes.push_back(cycle_nodes(*basis, b, choice));
    for (auto& l : p.l_paths) p.l_nodes.push_back(cycle_nodes(*basis, l, choice));
    p.tau.resize(gg, gg);
    double err = basis->normalization_residual();
    for (int i = 0; i < gg; ++i)
        for (int j = 0; j < gg; ++j) p.tau(i, j) = node_period(p.b_nodes[i], gg, j);
    auto integrate_phi = [&](const CycleNodes& c) {
        std::vector<cplx> v(c.size());
        double e = 0;
        for (std::size_t k = 0; k < v.size(); ++k) {
            for (int j = 0; j < gg; ++j) v[k] += coeffs[j] * c.w[k * gg + j];
            e += std::abs(c.rule.w[k]) * c.err[k];
        }
        double cmax = 0;
        for (auto& a : coeffs) cmax += std::abs(a);
        err += e * cmax;
        return c.rule.apply(v);
    };
    for (int i = 0; i < gg; ++i) p.coordinates.push_back(coeffs[i]);
    for (int i = 0; i < gg; ++i) p.coordinates.push_back(integrate_phi(p.b_nodes[i]));
    for (auto& l : p.l_nodes) p.coordinates.push_back(integrate_phi(l));
    p.error_estimate = err;
    return p;
}

}  // namespace sktau
