#include "sktau/taufn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "sktau/zograf.hpp"

namespace sktau {

namespace {

double inf_norm(const std::vector<cplx>& v)
{
    double m = 0;
    for (auto& x : v) m = std::max(m, std::abs(x));
    return m;
}

void check_clear_of_zeros(const HurwitzPoint& p, int i)
{
    Path s = p.s_cycle(i);
    for (auto& z : p.zeros)
        if (path_distance(s, z.z) < 1e-6) throw Error(ErrorKind::path, "cycle s_" + std::to_string(i) + " passes through a zero");
}

TruncationReport dlog_on_nodes(const HurwitzPoint& p, const BergmanSeries& bs, const CycleNodes& c)
{
    int g = p.genus();
    std::size_t n = c.size();
    std::vector<cplx> f(n);
    std::vector<double> e(n);
    double cabs = 0;
    for (auto& a : p.coeffs) cabs += std::abs(a);
    parallel_for(n, [&](std::size_t k) {
        FormJet j{0.0, 0.0, 0.0};
        for (int m = 0; m < g; ++m) {
            j.h += p.coeffs[m] * c.w[k * g + m];
            j.h1 += p.coeffs[m] * c.w1[k * g + m];
            j.h2 += p.coeffs[m] * c.w2[k * g + m];
        }
        auto rb = bs.projective_connection(c.rule.z[k]);
        cplx rphi = projective_connection_of_form(j);
        double ah = std::abs(j.h);
        f[k] = (rb.value - rphi) / j.h;
        e[k] = (rb.error_estimate + 3.0 * std::abs(rphi) * c.err[k] * cabs / ah) / ah;
    });
    TruncationReport r;
    cplx pref = I / (12.0 * pi);
    r.value = pref * c.rule.apply(f);
    double err = 0;
    for (std::size_t k = 0; k < n; ++k) err += std::abs(c.rule.w[k]) * e[k];
    r.error_estimate = std::abs(pref) * err;
    r.terms_used = long(n);
    r.converged = std::isfinite(std::abs(r.value));
    return r;
}

}  // namespace

TruncationReport dlog_tau(const HurwitzPoint& p, const BergmanSeries& bs, int i)
{
    check_clear_of_zeros(p, i);
    return dlog_on_nodes(p, bs, p.s_nodes(i));
}

std::vector<TruncationReport> dlog_tau_all(const HurwitzPoint& p, const BergmanSeries& bs)
{
    std::vector<TruncationReport> out;
    for (int i = 0; i < p.dimension(); ++i) out.push_back(dlog_tau(p, bs, i));
    return out;
}

// ---- families ------------------------------------------------------------

GroupFamily normalized_family(int genus)
{
    if (genus < 1) throw Error(ErrorKind::generator_count, "genus must be positive");
    GroupFamily f;
    f.genus = genus;
    f.size = genus == 1 ? 1 : 3 * genus - 3;
    f.make = [genus](const std::vector<cplx>& p) {
        std::vector<MoebiusMap> gens{MoebiusMap::scaling(p.at(0))};
        if (genus >= 2) gens.push_back(MoebiusMap::from_fixed_points({1.0, false}, {p.at(2), false}, p.at(1)));
        for (int r = 2; r < genus; ++r) {
            std::size_t o = 3 + 3 * (r - 2);
            gens.push_back(MoebiusMap::from_fixed_points({p.at(o), false}, {p.at(o + 1), false}, p.at(o + 2)));
        }
        auto g = make_group(gens);
        g.normalized = true;
        return g;
    };
    return f;
}

std::vector<cplx> normalized_parameters(const MarkedSchottkyGroup& g)
{
    std::vector<cplx> p;
    auto d0 = loxodromic_data(g.generators.at(0));
    bool rep_inf = d0.fixed_repelling.inf || std::abs(d0.fixed_repelling.z) > 1e12;
    if (!d0.fixed_attracting.inf && std::abs(d0.fixed_attracting.z) < 1e-12 && rep_inf)
        p.push_back(d0.multiplier);
    else
        throw Error(ErrorKind::domain, "L_1 is not z -> q z");
    for (int r = 1; r < g.genus; ++r) {
        auto d = loxodromic_data(g.generators[r]);
        if (d.fixed_attracting.inf || d.fixed_repelling.inf)
            throw Error(ErrorKind::domain, "fixed point at infinity outside L_1");
        if (r == 1) {
            if (std::abs(d.fixed_attracting.z - 1.0) > 1e-10)
                throw Error(ErrorKind::domain, "L_2 does not attract to 1");
            p.push_back(d.multiplier);
            p.push_back(d.fixed_repelling.z);
        } else {
            p.push_back(d.fixed_attracting.z);
            p.push_back(d.fixed_repelling.z);
            p.push_back(d.multiplier);
        }
    }
    return p;
}

// ---- chart ---------------------------------------------------------------

CoordinateChart::CoordinateChart(GroupFamily family, const std::vector<cplx>& base_params, int n, CycleChoice choice)
    : family_(std::move(family)), n_(n), choice_(std::move(choice))
{
    if (int(base_params.size()) != family_.size + family_.genus)
        throw Error(ErrorKind::domain, "parameter vector has the wrong length");
    auto g = family_.make(base_params);
    // the delta gate is checked once, here
    HolomorphicBasis check(g, std::min(n, 8), true);
    (void)check;
    base_ = at(base_params, {}, true);
    choice_ = base_.point.choice;
    // forward differences for the Newton Jacobian
    int d = int(base_params.size());
    jac_.resize(base_.point.dimension(), d);
    std::vector<cplx> hint;
    for (auto& z : base_.point.zeros) hint.push_back(z.z);
    for (int k = 0; k < d; ++k) {
        auto p = base_params;
        double h = 1e-6 * std::max(std::abs(p[k]), 1e-2);
        p[k] += h;
        auto cp = at(p, hint, false);
        for (int i = 0; i < jac_.rows(); ++i)
            jac_(i, k) = (cp.point.coordinates[i] - base_.point.coordinates[i]) / h;
    }
    base_.jac = jac_;
}

ChartPoint CoordinateChart::at(const std::vector<cplx>& params, const std::vector<cplx>& hint, bool with_bergman) const
{
    int gp = family_.size;
    std::vector<cplx> gpar(params.begin(), params.begin() + gp), co(params.begin() + gp, params.end());
    auto g = family_.make(gpar);
    auto basis = std::make_shared<HolomorphicBasis>(g, n_, false);
    ChartPoint c;
    c.params = params;
    c.point = hurwitz_coordinates(basis, co, choice_, hint);
    if (with_bergman) c.bergman = std::make_shared<BergmanSeries>(g, n_);
    return c;
}

ChartPoint CoordinateChart::solve(const std::vector<cplx>& zeta, const ChartPoint& start) const
{
    int d = dimension();
    if (int(zeta.size()) != d) throw Error(ErrorKind::domain, "coordinate vector has the wrong length");
    Eigen::MatrixXcd J = start.jac.size() ? start.jac : jac_;
    ChartPoint cur = start;
    auto resid = [&](const ChartPoint& c) {
        Eigen::VectorXcd r(d);
        for (int i = 0; i < d; ++i) r(i) = c.point.coordinates[i] - zeta[i];
        return r;
    };
    Eigen::VectorXcd r = resid(cur);
    double scale = std::max(1.0, inf_norm(zeta));
    double tol = 1e-13 * scale;
    int it = 0;
    for (; it < 20 && r.cwiseAbs().maxCoeff() > tol; ++it) {
        Eigen::VectorXcd dp = J.colPivHouseholderQr().solve(r);
        bool accepted = false;
        double lam = 1.0;
        for (int back = 0; back < 6 && !accepted; ++back, lam *= 0.5) {
            std::vector<cplx> p = cur.params;
            for (int k = 0; k < int(p.size()); ++k) p[k] -= lam * dp(k);
            std::vector<cplx> hint;
            for (auto& z : cur.point.zeros) hint.push_back(z.z);
            try {
                ChartPoint cand = at(p, hint, false);
                Eigen::VectorXcd rn = resid(cand);
                if (rn.cwiseAbs().maxCoeff() < r.cwiseAbs().maxCoeff()) {
                    // Broyden update
                    Eigen::VectorXcd s = -lam * dp, y = rn - r;
                    J += (y - J * s) * s.adjoint() / s.squaredNorm();
                    cur = std::move(cand);
                    r = rn;
                    accepted = true;
                }
            } catch (const Error&) {
            }
        }
        if (!accepted) break;
    }
    cur.residual = r.cwiseAbs().maxCoeff();
    cur.iterations = it;
    cur.jac = J;
    if (cur.residual > 1e-10 * scale) {
        std::ostringstream os;
        os << "coordinate inversion did not converge (residual " << cur.residual << ")";
        throw Error(ErrorKind::numerical, os.str());
    }
    if (!cur.bergman) cur.bergman = std::make_shared<BergmanSeries>(cur.point.basis->group(), n_);
    return cur;
}

CompatibilityResult compatibility_check(const CoordinateChart& chart, const ChartPoint& at,
                                        const std::vector<std::pair<int, int>>& pairs, double step)
{
    int d = chart.dimension();
    CompatibilityResult out;
    out.residual = Eigen::MatrixXd::Zero(d, d);
    std::set<int> idx;
    for (auto [i, j] : pairs) {
        if (i < 0 || j < 0 || i >= d || j >= d) throw Error(ErrorKind::domain, "coordinate index out of range");
        idx.insert(i);
        idx.insert(j);
    }
    const auto& z0 = at.point.coordinates;
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(d, d);  // D(i, k) = d_k F_i
    for (int k : idx) {
        if (step > 1e-2 * std::abs(z0[k])) {
            std::ostringstream os;
            os << "step " << step << " is large relative to coordinate " << k << " (|zeta| = " << std::abs(z0[k]) << ")";
            out.warnings.push_back(os.str());
        }
        std::vector<cplx> fp, fm;
        for (int s : {1, -1}) {
            auto target = z0;
            target[k] += double(s) * step;
            ChartPoint cp = chart.solve(target, at);
            auto F = dlog_tau_all(cp.point, *cp.bergman);
            for (auto& f : F) out.max_dlog_error = std::max(out.max_dlog_error, f.error_estimate);
            auto& dst = s > 0 ? fp : fm;
            for (auto& f : F) dst.push_back(f.value);
        }
        for (int i = 0; i < d; ++i) D(i, k) = (fp[i] - fm[i]) / (2.0 * step);
    }
    for (auto [i, j] : pairs) {
        double r = std::abs(D(i, j) - D(j, i));
        out.residual(i, j) = out.residual(j, i) = r;
        out.max_residual = std::max(out.max_residual, r);
    }
    return out;
}

// ---- paths ---------------------------------------------------------------

CoordinatePath CoordinatePath::line(const std::vector<cplx>& a, const std::vector<cplx>& b, int pieces)
{
    if (a.size() != b.size() || pieces < 1) throw Error(ErrorKind::domain, "bad coordinate path");
    CoordinatePath p;
    for (int s = 0; s <= pieces; ++s) {
        double t = double(s) / pieces;
        std::vector<cplx> z(a.size());
        for (std::size_t k = 0; k < a.size(); ++k) z[k] = a[k] + t * (b[k] - a[k]);
        p.samples.push_back(z);
    }
    return p;
}

CoordinatePath CoordinatePath::rectangle(const std::vector<cplx>& a, const std::vector<cplx>& u,
                                         const std::vector<cplx>& v, int n)
{
    auto add = [](std::vector<cplx> x, const std::vector<cplx>& y, double s) {
        for (std::size_t k = 0; k < x.size(); ++k) x[k] += s * y[k];
        return x;
    };
    std::vector<std::vector<cplx>> corners{a, add(a, u, 1), add(add(a, u, 1), v, 1), add(a, v, 1), a};
    CoordinatePath p;
    p.samples.push_back(a);
    for (int c = 0; c < 4; ++c) {
        auto seg = line(corners[c], corners[c + 1], n);
        p.samples.insert(p.samples.end(), seg.samples.begin() + 1, seg.samples.end());
    }
    return p;
}

double CoordinatePath::max_relative_step() const
{
    double m = 0;
    for (std::size_t s = 0; s + 1 < samples.size(); ++s)
        for (std::size_t k = 0; k < samples[s].size(); ++k) {
            double dz = std::abs(samples[s + 1][k] - samples[s][k]);
            if (dz == 0) continue;
            double sc = std::max(std::abs(samples[s][k]), std::abs(samples[s + 1][k]));
            m = std::max(m, sc > 0 ? dz / sc : 1e300);
        }
    return m;
}

TauValue integrate_tau(const CoordinateChart& chart, const CoordinatePath& path, int nodes)
{
    return integrate_tau(chart, path, chart.base(), nodes);
}

TauValue integrate_tau(const CoordinateChart& chart, const CoordinatePath& path, const ChartPoint& start, int nodes)
{
    if (path.samples.empty()) throw Error(ErrorKind::path, "empty coordinate path");
    for (auto& s : path.samples)
        if (int(s.size()) != chart.dimension()) throw Error(ErrorKind::path, "coordinate sample has the wrong length");
    double rel = path.max_relative_step();
    if (rel > 0.05) {
        std::ostringstream os;
        os << "coordinate path steps by " << rel << " relative; refine to 5% or less";
        throw Error(ErrorKind::path, os.str());
    }
    TauValue out;
    out.path = path;
    ChartPoint cur = chart.solve(path.samples[0], start);
    const GaussRule& gl = gauss_legendre(nodes);
    std::vector<int> order(nodes);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return gl.x[a] < gl.x[b]; });
    std::vector<cplx> contrib;
    for (std::size_t s = 0; s + 1 < path.samples.size(); ++s) {
        const auto& a = path.samples[s];
        const auto& b = path.samples[s + 1];
        std::vector<cplx> dz(a.size());
        for (std::size_t k = 0; k < a.size(); ++k) dz[k] = b[k] - a[k];
        if (inf_norm(dz) == 0) continue;
        for (int q : order) {
            double t = 0.5 * (1.0 + gl.x[q]);
            std::vector<cplx> z(a.size());
            for (std::size_t k = 0; k < a.size(); ++k) z[k] = a[k] + t * dz[k];
            cur = chart.solve(z, cur);
            auto F = dlog_tau_all(cur.point, *cur.bergman);
            cplx v = 0;
            for (std::size_t k = 0; k < a.size(); ++k) {
                v += F[k].value * dz[k];
                out.error_estimate += 0.5 * gl.w[q] * F[k].error_estimate * std::abs(dz[k]);
            }
            contrib.push_back(0.5 * gl.w[q] * v);
        }
    }
    out.log_tau = pairwise_sum(contrib);
    out.tau24 = std::exp(24.0 * out.log_tau);
    cur = chart.solve(path.samples.back(), cur);
    out.end_params = cur.params;
    return out;
}

double holonomy_defect(cplx dlog)
{
    cplx x = 24.0 * dlog;
    double k = std::round(x.imag() / (2 * pi));
    return std::abs(x - cplx(0.0, 2 * pi * k));
}

TauValue genus1_tau(cplx tau)
{
    if (!(tau.imag() > 0)) throw Error(ErrorKind::domain, "tau must lie in the upper half plane");
    auto e = eta(tau);
    TauValue t;
    t.log_tau = 2.0 * e.log_value;
    t.tau24 = std::exp(24.0 * t.log_tau);
    t.error_estimate = 2.0 * e.tail_bound;
    return t;
}

cplx isomonodromic_tau48(cplx tau24)
{
    if (tau24 == 0.0 || !std::isfinite(std::abs(tau24))) throw Error(ErrorKind::domain, "tau24 must be finite and nonzero");
    return 1.0 / tau24;
}

}  // namespace sktau
