#include "sktau/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <queue>
#include <sstream>
#include <thread>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gsl/gsl_integration.h>

namespace sktau {

void QuadratureConfig::validate() const
{
    if (!(target_tolerance > 0)) throw Error(ErrorKind::domain, "target_tolerance must be positive");
    if (!(excision_radius > 0)) throw Error(ErrorKind::domain, "excision_radius must be positive");
    if (max_subdivisions < 1) throw Error(ErrorKind::domain, "max_subdivisions must be >= 1");
    for (std::size_t i = 0; i < limit_grid.size(); ++i) {
        if (!(limit_grid[i] > 0)) throw Error(ErrorKind::domain, "limit_grid entries must be positive");
        if (i > 0 && !(limit_grid[i] < limit_grid[i - 1]))
            throw Error(ErrorKind::domain, "limit_grid must be strictly decreasing");
    }
}

// ---- threading -----------------------------------------------------------

namespace {
std::atomic<int> g_threads{1};
}

void set_max_threads(int n) { g_threads = std::max(1, n); }
int max_threads() { return g_threads; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn)
{
    int nt = std::min<int>(g_threads, static_cast<int>(n));
    if (nt <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    // static block partition: the work assignment never affects results
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex m;
    for (int t = 0; t < nt; ++t) {
        pool.emplace_back([&, t] {
            std::size_t lo = n * t / nt, hi = n * (t + 1) / nt;
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(m);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

template <class T>
static T pairwise_impl(const T* p, std::size_t n)
{
    if (n <= 8) {
        T s{};
        for (std::size_t i = 0; i < n; ++i) s += p[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_impl(p, h) + pairwise_impl(p + h, n - h);
}

cplx pairwise_sum(const std::vector<cplx>& v) { return pairwise_impl(v.data(), v.size()); }
double pairwise_sum(const std::vector<double>& v) { return pairwise_impl(v.data(), v.size()); }

// ---- paths ---------------------------------------------------------------

cplx PathPiece::point(double s) const
{
    if (kind == Kind::segment) return a + s * (b - a);
    double t = theta0 + s * (theta1 - theta0);
    return center + std::polar(radius, t);
}

cplx PathPiece::tangent(double s) const
{
    if (kind == Kind::segment) return b - a;
    double t = theta0 + s * (theta1 - theta0);
    return I * std::polar(radius, t) * (theta1 - theta0);
}

bool PathPiece::full_circle() const
{
    return kind == Kind::arc && std::abs(std::abs(theta1 - theta0) - 2 * pi) < 1e-14;
}

Path Path::segment(cplx a, cplx b)
{
    Path p;
    PathPiece q;
    q.kind = PathPiece::Kind::segment;
    q.a = a;
    q.b = b;
    p.pieces_.push_back(q);
    return p;
}

Path Path::arc(cplx c, double r, double t0, double t1)
{
    Path p;
    PathPiece q;
    q.kind = PathPiece::Kind::arc;
    q.center = c;
    q.radius = r;
    q.theta0 = t0;
    q.theta1 = t1;
    p.pieces_.push_back(q);
    return p;
}

Path Path::circle(cplx c, double r, bool ccw) { return ccw ? arc(c, r, 0.0, 2 * pi) : arc(c, r, 2 * pi, 0.0); }

Path Path::polyline(const std::vector<cplx>& pts)
{
    Path p;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) p.append(segment(pts[i], pts[i + 1]));
    return p;
}

Path& Path::append(const Path& other)
{
    pieces_.insert(pieces_.end(), other.pieces_.begin(), other.pieces_.end());
    return *this;
}

Path Path::reversed() const
{
    Path p;
    for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it) {
        PathPiece q = *it;
        std::swap(q.a, q.b);
        std::swap(q.theta0, q.theta1);
        p.pieces_.push_back(q);
    }
    return p;
}

cplx Path::start() const { return pieces_.front().point(0.0); }
cplx Path::end() const { return pieces_.back().point(1.0); }

std::vector<cplx> Path::sample(int per_piece) const
{
    std::vector<cplx> out;
    for (const auto& q : pieces_)
        for (int i = 0; i <= per_piece; ++i) out.push_back(q.point(double(i) / per_piece));
    return out;
}

// ---- contour quadrature --------------------------------------------------

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
using G7 = boost::math::quadrature::gauss<double, 7>;

struct PanelResult {
    cplx value;
    double err;
};

cplx checked(const ComplexFn& f, const PathPiece& q, double s)
{
    cplx z = q.point(s);
    cplx v = f(z);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        std::ostringstream os;
        os.precision(17);
        os << "non-finite integrand sample at path parameter s=" << s << " (z=" << z.real() << "+" << z.imag()
           << "i)";
        throw Error(ErrorKind::numerical, os.str());
    }
    return v * q.tangent(s);
}

PanelResult gk15(const ComplexFn& f, const PathPiece& q, double s0, double s1)
{
    const auto& xk = GK::abscissa();
    const auto& wk = GK::weights();
    const auto& wg = G7::weights();
    double c = 0.5 * (s0 + s1), h = 0.5 * (s1 - s0);
    cplx fc = checked(f, q, c);
    cplx k = fc * wk[0], g = fc * wg[0];
    for (std::size_t i = 1; i < xk.size(); ++i) {
        cplx fp = checked(f, q, c + h * xk[i]);
        cplx fm = checked(f, q, c - h * xk[i]);
        k += (fp + fm) * wk[i];
        if (i % 2 == 0) g += (fp + fm) * wg[i / 2];
    }
    return {k * h, std::abs(k - g) * h};
}

struct Interval {
    double s0, s1;
    PanelResult r;
    bool operator<(const Interval& o) const { return r.err < o.r.err; }
};

}  // namespace

TruncationReport contour_integral(const ComplexFn& f, const Path& path, const QuadratureConfig& cfg)
{
    TruncationReport rep;
    rep.converged = true;
    double tol = cfg.target_tolerance;
    std::size_t npieces = path.pieces().size();
    for (const auto& q : path.pieces()) {
        double ptol = tol / npieces;
        if (q.full_circle()) {
            // periodic integrand: trapezoid converges geometrically
            int n = 16;
            std::vector<cplx> vals;
            auto trap = [&](int m) {
                std::vector<cplx> v(m);
                for (int i = 0; i < m; ++i) v[i] = checked(f, q, double(i) / m);
                return v;
            };
            vals = trap(n);
            cplx prev = pairwise_sum(vals) / double(n);
            rep.terms_used += n;
            bool ok = false;
            double err = 0;
            while (n < 16 * (1 << 16)) {
                std::vector<cplx> v2(2 * n);
                for (int i = 0; i < n; ++i) {
                    v2[2 * i] = vals[i];
                    v2[2 * i + 1] = checked(f, q, (2.0 * i + 1) / (2 * n));
                }
                rep.terms_used += n;
                n *= 2;
                vals.swap(v2);
                cplx cur = pairwise_sum(vals) / double(n);
                err = std::abs(cur - prev);
                prev = cur;
                if (err <= ptol && n >= 64) {
                    ok = true;
                    break;
                }
                if (n / 15 > cfg.max_subdivisions * 16) break;
            }
            rep.value += prev;
            rep.error_estimate += err;
            if (!ok) rep.converged = false;
            continue;
        }
        std::priority_queue<Interval> pq;
        Interval root{0.0, 1.0, gk15(f, q, 0.0, 1.0)};
        rep.terms_used += 15;
        pq.push(root);
        double total_err = root.r.err;
        int splits = 0;
        while (total_err > ptol && splits < cfg.max_subdivisions) {
            Interval top = pq.top();
            pq.pop();
            double m = 0.5 * (top.s0 + top.s1);
            Interval l{top.s0, m, gk15(f, q, top.s0, m)};
            Interval r{m, top.s1, gk15(f, q, m, top.s1)};
            rep.terms_used += 30;
            total_err += l.r.err + r.r.err - top.r.err;
            pq.push(l);
            pq.push(r);
            ++splits;
        }
        // canonical order for the final reduction
        std::vector<Interval> all;
        while (!pq.empty()) {
            all.push_back(pq.top());
            pq.pop();
        }
        std::sort(all.begin(), all.end(), [](const Interval& a, const Interval& b) { return a.s0 < b.s0; });
        std::vector<cplx> v;
        double e = 0;
        for (auto& iv : all) {
            v.push_back(iv.r.value);
            e += iv.r.err;
        }
        rep.value += pairwise_sum(v);
        rep.error_estimate += e;
        if (e > ptol) rep.converged = false;
    }
    if (!rep.converged) rep.diagnostic = "contour quadrature hit the subdivision limit";
    return rep;
}

TruncationReport contour_integral_fixed(const ComplexFn& f, const Path& path, int panels)
{
    TruncationReport rep;
    for (const auto& q : path.pieces()) {
        if (q.full_circle()) {
            int n = 15 * panels;
            std::vector<cplx> v(n), vh;
            for (int i = 0; i < n; ++i) v[i] = checked(f, q, double(i) / n);
            cplx full = pairwise_sum(v) / double(n);
            cplx half = 0.0;
            if (n % 2 == 0) {
                for (int i = 0; i < n; i += 2) vh.push_back(v[i]);
                half = pairwise_sum(vh) / double(n / 2);
            } else {
                for (int i = 0; i < n; i += 3) vh.push_back(v[i]);
                half = pairwise_sum(vh) / double(vh.size());
            }
            rep.value += full;
            rep.error_estimate += std::abs(full - half);
            rep.terms_used += n;
            continue;
        }
        std::vector<cplx> v(panels);
        double e = 0;
        for (int p = 0; p < panels; ++p) {
            auto r = gk15(f, q, double(p) / panels, double(p + 1) / panels);
            v[p] = r.value;
            e += r.err;
        }
        rep.value += pairwise_sum(v);
        rep.error_estimate += e;
        rep.terms_used += 15 * panels;
    }
    rep.converged = true;
    return rep;
}

ContourRule contour_rule_fixed(const Path& path, int panels)
{
    ContourRule r;
    const auto& xk = GK::abscissa();
    const auto& wk = GK::weights();
    for (const auto& q : path.pieces()) {
        if (q.full_circle()) {
            int n = 15 * panels;
            for (int i = 0; i < n; ++i) {
                double s = double(i) / n;
                r.z.push_back(q.point(s));
                r.w.push_back(q.tangent(s) / double(n));
            }
            continue;
        }
        for (int p = 0; p < panels; ++p) {
            double c = (p + 0.5) / panels, h = 0.5 / panels;
            auto add = [&](double s, double w) {
                r.z.push_back(q.point(s));
                r.w.push_back(q.tangent(s) * (w * h));
            };
            add(c, wk[0]);
            for (std::size_t i = 1; i < xk.size(); ++i) {
                add(c - h * xk[i], wk[i]);
                add(c + h * xk[i], wk[i]);
            }
        }
    }
    return r;
}

cplx ContourRule::apply(const std::vector<cplx>& values) const
{
    std::vector<cplx> t(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) t[i] = w[i] * values.at(i);
    return pairwise_sum(t);
}

// ---- Gauss-Legendre tables ------------------------------------------------

const GaussRule& gauss_legendre(int n)
{
    static std::map<int, GaussRule> cache;
    static std::mutex m;
    std::lock_guard<std::mutex> lk(m);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(n);
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) gsl_integration_glfixed_point(-1.0, 1.0, i, &r.x[i], &r.w[i], t);
    gsl_integration_glfixed_table_free(t);
    return cache.emplace(n, std::move(r)).first->second;
}

// ---- 2D regions ----------------------------------------------------------

bool CircleDomain::contains(cplx z) const
{
    if (std::abs(z - outer_center) >= outer_radius) return false;
    for (auto& h : holes)
        if (std::abs(z - h.first) <= h.second) return false;
    return true;
}

cplx annulus_integral_fixed(const ComplexFn& f, const Annulus& a, int n_r, int n_t)
{
    const GaussRule& g = gauss_legendre(n_r);
    std::vector<cplx> rows(n_r);
    bool disc = a.r_inner <= 0.0;
    double l0 = disc ? 0.0 : std::log(a.r_inner), l1 = disc ? a.r_outer : std::log(a.r_outer);
    double c = 0.5 * (l0 + l1), h = 0.5 * (l1 - l0);
    for (int i = 0; i < n_r; ++i) {
        double s = c + h * g.x[i];
        double r = disc ? s : std::exp(s);
        double jac = disc ? r : r * r;  // d^2z = r dr dt = r^2 ds dt
        std::vector<cplx> ring(n_t);
        for (int j = 0; j < n_t; ++j) {
            cplx z = a.center + std::polar(r, 2 * pi * j / n_t);
            cplx v = f(z);
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw Error(ErrorKind::numerical, "non-finite density sample at r=" + std::to_string(r));
            ring[j] = v;
        }
        rows[i] = pairwise_sum(ring) * (2 * pi / n_t) * jac * g.w[i] * h;
    }
    return pairwise_sum(rows);
}

namespace {

TruncationReport annulus_adaptive(const ComplexFn& f, const Annulus& a, const QuadratureConfig& cfg)
{
    TruncationReport rep;
    int nr = 16, nt = 32;
    cplx prev = annulus_integral_fixed(f, a, nr, nt);
    rep.terms_used = long(nr) * nt;
    for (int it = 0; it < 8; ++it) {
        nr *= 2;
        nt *= 2;
        cplx cur = annulus_integral_fixed(f, a, nr, nt);
        rep.terms_used += long(nr) * nt;
        rep.error_estimate = std::abs(cur - prev);
        rep.value = cur;
        prev = cur;
        if (rep.error_estimate <= cfg.target_tolerance) {
            rep.converged = true;
            return rep;
        }
    }
    rep.converged = false;
    rep.diagnostic = "polar quadrature did not converge (density singular inside region?)";
    return rep;
}

// Square cell [x0,x0+s]x[y0,y0+s]
struct Cell {
    double x0, y0, s;
};

double dist_point_square(cplx p, const Cell& c)
{
    double dx = std::max({c.x0 - p.real(), 0.0, p.real() - (c.x0 + c.s)});
    double dy = std::max({c.y0 - p.imag(), 0.0, p.imag() - (c.y0 + c.s)});
    return std::hypot(dx, dy);
}

double maxdist_point_square(cplx p, const Cell& c)
{
    double dx = std::max(std::abs(p.real() - c.x0), std::abs(p.real() - c.x0 - c.s));
    double dy = std::max(std::abs(p.imag() - c.y0), std::abs(p.imag() - c.y0 - c.s));
    return std::hypot(dx, dy);
}

enum class CellClass { inside, outside, straddle };

CellClass classify_cell(const CircleDomain& d, const Cell& c)
{
    if (dist_point_square(d.outer_center, c) >= d.outer_radius) return CellClass::outside;
    bool straddle = maxdist_point_square(d.outer_center, c) > d.outer_radius;
    for (auto& h : d.holes) {
        if (maxdist_point_square(h.first, c) <= h.second) return CellClass::outside;
        if (dist_point_square(h.first, c) < h.second) straddle = true;
    }
    return straddle ? CellClass::straddle : CellClass::inside;
}

cplx cell_rule(const ComplexFn& f, const Cell& c, int n, const CircleDomain* mask)
{
    const GaussRule& g = gauss_legendre(n);
    std::vector<cplx> v;
    v.reserve(n * n);
    double h = 0.5 * c.s;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            cplx z(c.x0 + h * (1 + g.x[i]), c.y0 + h * (1 + g.x[j]));
            if (mask && !mask->contains(z)) continue;
            cplx val = f(z);
            if (!std::isfinite(val.real()) || !std::isfinite(val.imag()))
                throw Error(ErrorKind::numerical, "non-finite density sample in region integral");
            v.push_back(val * g.w[i] * g.w[j] * h * h);
        }
    return pairwise_sum(v);
}

TruncationReport cells_adaptive(const ComplexFn& f, const CircleDomain& d, const QuadratureConfig& cfg)
{
    TruncationReport rep;
    const int n = 6;
    double R = d.outer_radius;
    std::vector<Cell> work{{d.outer_center.real() - R, d.outer_center.imag() - R, 2 * R}};
    std::vector<cplx> parts;
    double err = 0;
    const double total_area = 4 * R * R;
    const int max_depth = 6 + cfg.max_subdivisions / 40;
    // breadth-first in a fixed order keeps the summation order canonical
    for (int depth = 0; !work.empty(); ++depth) {
        std::vector<Cell> next;
        for (const Cell& c : work) {
            CellClass k = classify_cell(d, c);
            if (k == CellClass::outside) continue;
            double share = cfg.target_tolerance * (c.s * c.s) / total_area;
            if (k == CellClass::inside) {
                cplx coarse = cell_rule(f, c, n, nullptr);
                double hs = 0.5 * c.s;
                cplx fine = 0;
                for (int q = 0; q < 4; ++q) fine += cell_rule(f, {c.x0 + hs * (q % 2), c.y0 + hs * (q / 2), hs}, n, nullptr);
                rep.terms_used += 5 * n * n;
                double e = std::abs(fine - coarse);
                if (e <= share || depth >= max_depth) {
                    parts.push_back(fine);
                    err += e;
                    continue;
                }
            } else if (depth >= max_depth) {
                cplx masked = cell_rule(f, c, 2 * n, &d);
                cplx masked_lo = cell_rule(f, c, n, &d);
                rep.terms_used += 5 * n * n;
                parts.push_back(masked);
                err += std::abs(masked - masked_lo);
                continue;
            }
            double hs = 0.5 * c.s;
            for (int q = 0; q < 4; ++q) next.push_back({c.x0 + hs * (q % 2), c.y0 + hs * (q / 2), hs});
        }
        work.swap(next);
    }
    rep.value = pairwise_sum(parts);
    rep.error_estimate = err;
    rep.converged = err <= cfg.target_tolerance;
    if (!rep.converged) rep.diagnostic = "cell quadrature did not meet tolerance";
    return rep;
}

}  // namespace

TruncationReport region_integral_excised(const ComplexFn& f, const Region& region,
                                         const std::vector<Excision>& excisions, const QuadratureConfig& cfg)
{
    for (std::size_t i = 0; i < excisions.size(); ++i)
        for (std::size_t j = i + 1; j < excisions.size(); ++j)
            if (std::abs(excisions[i].center - excisions[j].center) < excisions[i].radius + excisions[j].radius)
                throw Error(ErrorKind::domain, "excision discs overlap");

    if (const Annulus* a = std::get_if<Annulus>(&region)) {
        Annulus b = *a;
        bool concentric = true;
        for (auto& e : excisions) {
            if (std::abs(e.center - a->center) > 1e-15 * (1 + std::abs(a->center))) {
                concentric = false;
                break;
            }
            b.r_inner = std::max(b.r_inner, e.radius);
        }
        if (concentric) {
            if (b.r_inner >= b.r_outer) return TruncationReport{0.0, 0.0, 1, true, {}};
            return annulus_adaptive(f, b, cfg);
        }
        CircleDomain d{a->center, a->r_outer, {}};
        if (a->r_inner > 0) d.holes.push_back({a->center, a->r_inner});
        for (auto& e : excisions) d.holes.push_back({e.center, e.radius});
        return cells_adaptive(f, d, cfg);
    }
    CircleDomain d = std::get<CircleDomain>(region);
    for (auto& e : excisions) d.holes.push_back({e.center, e.radius});
    return cells_adaptive(f, d, cfg);
}

// ---- extrapolation -------------------------------------------------------

LimitResult limit_extrapolate(const std::vector<std::pair<double, cplx>>& samples, LimitModel model,
                              double flag_threshold)
{
    std::size_t n = samples.size();
    if (n < 3) throw Error(ErrorKind::domain, "limit_extrapolate needs at least 3 samples");
    for (std::size_t i = 1; i < n; ++i)
        if (!(samples[i].first < samples[i - 1].first) || !(samples[i].first > 0))
            throw Error(ErrorKind::domain, "limit parameters must be positive and strictly decreasing");

    LimitResult out;
    std::vector<double> e(n);
    std::vector<cplx> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        e[i] = samples[i].first;
        v[i] = samples[i].second;
    }

    // linear least squares for complex data against real basis functions
    auto lsq = [&](const std::vector<std::function<double(double)>>& basis, std::vector<cplx>& coef) {
        std::size_t m = basis.size();
        std::vector<double> A(n * m);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) A[i * m + j] = basis[j](e[i]);
        // normal equations are fine at this size; scale columns first
        std::vector<double> sc(m, 0.0);
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t i = 0; i < n; ++i) sc[j] = std::max(sc[j], std::abs(A[i * m + j]));
            if (sc[j] == 0) sc[j] = 1;
            for (std::size_t i = 0; i < n; ++i) A[i * m + j] /= sc[j];
        }
        std::vector<double> N(m * m, 0.0);
        std::vector<cplx> rhs(m, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                rhs[j] += A[i * m + j] * v[i];
                for (std::size_t k = 0; k < m; ++k) N[j * m + k] += A[i * m + j] * A[i * m + k];
            }
        // Gaussian elimination with partial pivoting
        for (std::size_t c = 0; c < m; ++c) {
            std::size_t p = c;
            for (std::size_t r = c + 1; r < m; ++r)
                if (std::abs(N[r * m + c]) > std::abs(N[p * m + c])) p = r;
            for (std::size_t k = 0; k < m; ++k) std::swap(N[c * m + k], N[p * m + k]);
            std::swap(rhs[c], rhs[p]);
            for (std::size_t r = c + 1; r < m; ++r) {
                double fct = N[r * m + c] / N[c * m + c];
                for (std::size_t k = c; k < m; ++k) N[r * m + k] -= fct * N[c * m + k];
                rhs[r] -= fct * rhs[c];
            }
        }
        coef.assign(m, 0.0);
        for (std::size_t c = m; c-- > 0;) {
            cplx s = rhs[c];
            for (std::size_t k = c + 1; k < m; ++k) s -= N[c * m + k] * coef[k];
            coef[c] = s / N[c * m + c];
        }
        double res = 0;
        for (std::size_t i = 0; i < n; ++i) {
            cplx fit = 0;
            for (std::size_t j = 0; j < m; ++j) fit += A[i * m + j] * coef[j];
            res += std::norm(fit - v[i]);
        }
        for (std::size_t j = 0; j < m; ++j) coef[j] /= sc[j];
        return std::sqrt(res / n);
    };

    if (model == LimitModel::power_plus_log) {
        std::vector<cplx> c;
        out.residual = lsq({[](double) { return 1.0; }, [](double x) { return x * std::log(x); },
                            [](double x) { return x; }},
                           c);
        out.limit = c[0];
        out.order = 1.0;
    } else {
        // exponent from the last three samples, then a + b eps^p by least squares
        cplx d1 = v[n - 3] - v[n - 2], d2 = v[n - 2] - v[n - 1];
        double scale = std::max({std::abs(v[n - 1]), 1e-300});
        if (std::abs(d1) <= 1e-15 * scale || std::abs(d2) <= 1e-15 * scale) {
            out.limit = v[n - 1];
            out.order = 0.0;
            double res = 0;
            for (auto& x : v) res += std::norm(x - v[n - 1]);
            out.residual = std::sqrt(res / n);
        } else {
            double e0 = e[n - 3], e1 = e[n - 2], e2 = e[n - 1];
            double target = std::abs(d1 / d2);
            // solve (e0^p - e1^p)/(e1^p - e2^p) = target for p > 0 by bisection
            auto ratio = [&](double p) {
                return (std::pow(e0, p) - std::pow(e1, p)) / (std::pow(e1, p) - std::pow(e2, p));
            };
            double lo = 1e-3, hi = 12.0;
            double p;
            if (target <= ratio(lo)) {
                p = lo;
            } else if (target >= ratio(hi)) {
                p = hi;
            } else {
                for (int it = 0; it < 200; ++it) {
                    double mid = 0.5 * (lo + hi);
                    (ratio(mid) < target ? lo : hi) = mid;
                }
                p = 0.5 * (lo + hi);
            }
            std::vector<cplx> c;
            out.residual = lsq({[](double) { return 1.0; }, [p](double x) { return std::pow(x, p); }}, c);
            out.limit = c[0];
            out.order = p;
        }
    }
    out.flagged = out.residual > flag_threshold;
    return out;
}

HoloDerivative holomorphic_fd(const ComplexFn& g, cplx w0, double h)
{
    cplx gx = (g(w0 + h) - g(w0 - h)) / (2 * h);
    cplx gy = (g(w0 + I * h) - g(w0 - I * h)) / (2 * h);
    return {0.5 * (gx - I * gy), std::abs(0.5 * (gx + I * gy))};
}

HoloDerivative holomorphic_fd_richardson(const ComplexFn& g, cplx w0, double h)
{
    cplx gx1 = (g(w0 + h) - g(w0 - h)) / (2 * h), gy1 = (g(w0 + I * h) - g(w0 - I * h)) / (2 * h);
    cplx gx2 = (g(w0 + 0.5 * h) - g(w0 - 0.5 * h)) / h, gy2 = (g(w0 + 0.5 * I * h) - g(w0 - 0.5 * I * h)) / h;
    cplx gx = (4.0 * gx2 - gx1) / 3.0, gy = (4.0 * gy2 - gy1) / 3.0;
    return {0.5 * (gx - I * gy), std::abs(0.5 * (gx + I * gy))};
}

}  // namespace sktau
