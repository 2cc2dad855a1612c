#include "sktau/hurwitz.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sktau {

namespace {

// s(x) and x-derivatives up to third order
void s_jet(cplx q, cplx x, cplx out[4])
{
    out[0] = out[1] = out[2] = out[3] = 0.0;
    double aq = std::abs(q);
    double scale = std::max(std::abs(x), 1.0 / std::abs(x));
    cplx a = 1.0;  // q^n
    for (int n = 0; n < 400; ++n) {
        // -a x / (1 - a x) = 1 - 1/(1 - a x)
        cplx u = 1.0 / (1.0 - a * x);
        out[0] += 1.0 - u;
        cplx au = a * u;
        out[1] -= au * u;
        out[2] -= 2.0 * au * au * u;
        out[3] -= 6.0 * au * au * au * u;
        if (n >= 1) {
            cplx v = 1.0 / (x - a);
            out[0] += a * v;
            out[1] -= a * v * v;
            out[2] += 2.0 * a * v * v * v;
            out[3] -= 6.0 * a * v * v * v * v;
        }
        if (n >= 1 && std::pow(aq, n) * scale < 1e-18) break;
        a *= q;
    }
}

}  // namespace

LambdaJet TwoPoleLambda::jet(cplx z) const
{
    cplx s1[4], s2[4];
    s_jet(q, z / p1, s1);
    s_jet(q, z / p2, s2);
    LambdaJet j;
    j.v = A * (s1[0] - s2[0]) + B;
    j.d1 = A * (s1[1] / p1 - s2[1] / p2);
    j.d2 = A * (s1[2] / (p1 * p1) - s2[2] / (p2 * p2));
    j.d3 = A * (s1[3] / (p1 * p1 * p1) - s2[3] / (p2 * p2 * p2));
    return j;
}

MarkedSchottkyGroup TwoPoleLambda::group() const
{
    auto g = make_group({MoebiusMap::scaling(q)});
    g.normalized = true;
    return g;
}

TwoPoleLambda TwoPoleLambda::with_params(const std::vector<cplx>& p) const
{
    TwoPoleLambda l = *this;
    l.q = p.at(0);
    l.p2 = p.at(1);
    l.A = p.at(2);
    l.B = p.at(3);
    return l;
}

cplx schwarzian(const LambdaJet& j)
{
    if (!(std::abs(j.d1) > 1e-300)) throw Error(ErrorKind::domain, "Schwarzian at a critical point");
    cplx u = j.d2 / j.d1;
    return j.d3 / j.d1 - 1.5 * u * u;
}

namespace {

bool newton_critical(const TwoPoleLambda& l, cplx& z)
{
    for (int it = 0; it < 60; ++it) {
        auto j = l.jet(z);
        if (!std::isfinite(std::abs(j.d1)) || std::abs(j.d2) < 1e-300) return false;
        cplx dz = j.d1 / j.d2;
        z -= dz;
        if (!std::isfinite(std::abs(z)) || std::abs(z) < 1e-12) return false;
        if (std::abs(dz) < 1e-15 * std::abs(z)) return true;
    }
    return std::abs(l.jet(z).d1) < 1e-10;
}

double min_distance_to_translates(cplx z, cplx w, cplx q)
{
    return std::min({std::abs(z - w), std::abs(z - q * w), std::abs(z - w / q)});
}

}  // namespace

HurwitzModePoint hurwitz_mode_point(const TwoPoleLambda& l, const std::vector<cplx>& hint,
                                    const std::vector<double>& radii)
{
    auto g = l.group();
    FundamentalDomain D(g);
    HurwitzModePoint p;
    p.lambda = l;
    const int expected = 4;  // two double poles of d lambda
    std::vector<cplx> found;
    auto add = [&](cplx z) {
        z = D.reduce(z).point;
        for (cplx w : {l.p1, l.p2})
            if (min_distance_to_translates(z, w, l.q) < 1e-6) return;
        for (cplx w : found)
            if (min_distance_to_translates(z, w, l.q) < 1e-8) return;
        found.push_back(z);
    };
    if (!hint.empty()) {
        for (cplx z : hint) {
            cplx w = z;
            if (!newton_critical(l, w)) throw Error(ErrorKind::numerical, "critical point tracking failed");
            found.push_back(D.reduce(w).point);
        }
    } else {
        double rs = std::sqrt(std::abs(l.q));
        const int NR = 40, NT = 80;
        std::vector<double> mag(NR * NT);
        auto node = [&](int i, int k) {
            double r = std::exp(std::log(rs) + (-2.0 * std::log(rs)) * (i + 0.5) / NR);
            return std::polar(r, 2 * pi * k / NT);
        };
        for (int i = 0; i < NR; ++i)
            for (int k = 0; k < NT; ++k) {
                cplx z = node(i, k);
                auto j = l.jet(z);
                mag[i * NT + k] = std::isfinite(std::abs(j.d1)) ? std::abs(j.d1) * std::abs(z) : 1e300;
            }
        for (int i = 0; i < NR; ++i)
            for (int k = 0; k < NT; ++k) {
                double m = mag[i * NT + k];
                bool local = true;
                for (int di = -1; di <= 1 && local; ++di)
                    for (int dk = -1; dk <= 1; ++dk) {
                        int ii = i + di, kk = (k + dk + NT) % NT;
                        if ((!di && !dk) || ii < 0 || ii >= NR) continue;
                        if (mag[ii * NT + kk] < m) {
                            local = false;
                            break;
                        }
                    }
                if (!local) continue;
                cplx z = node(i, k);
                if (newton_critical(l, z)) add(z);
            }
        std::sort(found.begin(), found.end(), [](cplx a, cplx b) {
            if (std::abs(std::abs(a) - std::abs(b)) > 1e-12) return std::abs(a) < std::abs(b);
            return std::arg(a) < std::arg(b);
        });
    }
    if (int(found.size()) != expected) {
        std::ostringstream os;
        os << "found " << found.size() << " critical points, expected " << expected
           << "; perturb the function to a generic point";
        throw Error(ErrorKind::stratum, os.str());
    }
    p.critical_points = found;
    for (cplx z : found) p.critical_values.push_back(l.jet(z).v);
    if (!radii.empty()) {
        p.radii = radii;
    } else {
        for (std::size_t k = 0; k < found.size(); ++k) {
            double r = D.clearance(found[k]);
            for (cplx w : {l.p1, l.p2}) r = std::min(r, min_distance_to_translates(found[k], w, l.q));
            for (std::size_t o = 0; o < found.size(); ++o)
                if (o != k) r = std::min(r, min_distance_to_translates(found[k], found[o], l.q));
            p.radii.push_back(0.4 * r);
        }
    }
    return p;
}

TruncationReport hurwitz_dlog_tau(const HurwitzModePoint& p, const BergmanSeries& bs, int i)
{
    if (i < 0 || i >= p.m()) throw Error(ErrorKind::domain, "critical value index out of range");
    ContourRule rule = contour_rule_fixed(p.s_cycle(i), 8);
    std::size_t n = rule.z.size();
    std::vector<cplx> f(n);
    std::vector<double> e(n);
    parallel_for(n, [&](std::size_t k) {
        auto j = p.lambda.jet(rule.z[k]);
        auto rb = bs.projective_connection(rule.z[k]);
        f[k] = (rb.value - schwarzian(j)) / j.d1;
        e[k] = rb.error_estimate / std::abs(j.d1);
    });
    TruncationReport r;
    cplx pref = I / (12.0 * pi);
    r.value = pref * rule.apply(f);
    double err = 0;
    for (std::size_t k = 0; k < n; ++k) err += std::abs(rule.w[k]) * e[k];
    r.error_estimate = std::abs(pref) * err;
    r.terms_used = long(n);
    r.converged = std::isfinite(std::abs(r.value));
    return r;
}

std::vector<double> pole_residue_defects(const TwoPoleLambda& l, double radius)
{
    std::vector<double> out;
    for (cplx c : {l.p1, l.p2}) {
        ContourRule rule = contour_rule_fixed(Path::circle(c, radius), 8);
        std::vector<cplx> f1(rule.z.size()), f2(rule.z.size());
        for (std::size_t k = 0; k < rule.z.size(); ++k) {
            cplx d = l.jet(rule.z[k]).d1;
            f1[k] = d;
            f2[k] = (rule.z[k] - c) * d;
        }
        cplx cm1 = rule.apply(f1), cm2 = rule.apply(f2);  // both times 2 pi i
        out.push_back(std::abs(cm1 / cm2));
    }
    return out;
}

namespace {

struct HurwitzEval {
    std::vector<cplx> params;
    HurwitzModePoint point;
};

HurwitzEval hurwitz_eval(const TwoPoleLambda& base, const std::vector<cplx>& params, const std::vector<cplx>& hint,
                         const std::vector<double>& radii)
{
    return {params, hurwitz_mode_point(base.with_params(params), hint, radii)};
}

HurwitzEval hurwitz_solve(const TwoPoleLambda& base, const std::vector<cplx>& target, const HurwitzEval& start,
                          Eigen::MatrixXcd J, const std::vector<double>& radii)
{
    HurwitzEval cur = start;
    int d = int(target.size());
    auto resid = [&](const HurwitzEval& e) {
        Eigen::VectorXcd r(d);
        for (int i = 0; i < d; ++i) r(i) = e.point.critical_values[i] - target[i];
        return r;
    };
    Eigen::VectorXcd r = resid(cur);
    double scale = 1.0;
    for (auto& t : target) scale = std::max(scale, std::abs(t));
    for (int it = 0; it < 30 && r.cwiseAbs().maxCoeff() > 1e-14 * scale; ++it) {
        Eigen::VectorXcd dp = J.colPivHouseholderQr().solve(r);
        bool accepted = false;
        double lam = 1.0;
        for (int back = 0; back < 6 && !accepted; ++back, lam *= 0.5) {
            auto p = cur.params;
            for (int k = 0; k < d; ++k) p[k] -= lam * dp(k);
            try {
                auto cand = hurwitz_eval(base, p, cur.point.critical_points, radii);
                Eigen::VectorXcd rn = resid(cand);
                if (rn.cwiseAbs().maxCoeff() < r.cwiseAbs().maxCoeff()) {
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
    if (r.cwiseAbs().maxCoeff() > 1e-11 * scale)
        throw Error(ErrorKind::numerical, "critical value inversion did not converge");
    return cur;
}

}  // namespace

HurwitzCompatibility hurwitz_compatibility(const TwoPoleLambda& base, double step, int n)
{
    auto b0 = hurwitz_eval(base, base.params(), {}, {});
    const auto& radii = b0.point.radii;
    int d = b0.point.m();
    if (d != 4) throw Error(ErrorKind::stratum, "expected four critical values");
    // forward-difference Jacobian d lambda_i / d P_k
    Eigen::MatrixXcd J(d, d);
    for (int k = 0; k < d; ++k) {
        auto p = b0.params;
        double h = 1e-7 * std::max(std::abs(p[k]), 1e-2);
        p[k] += h;
        auto e = hurwitz_eval(base, p, b0.point.critical_points, radii);
        for (int i = 0; i < d; ++i) J(i, k) = (e.point.critical_values[i] - b0.point.critical_values[i]) / h;
    }
    auto dlogs = [&](const HurwitzEval& e) {
        BergmanSeries bs(e.point.lambda.group(), n);
        std::vector<cplx> v;
        for (int i = 0; i < d; ++i) v.push_back(hurwitz_dlog_tau(e.point, bs, i).value);
        return v;
    };
    HurwitzCompatibility out;
    out.dlog.push_back(dlogs(b0));
    Eigen::MatrixXcd Dm(d, d);
    for (int k = 0; k < d; ++k) {
        std::vector<cplx> fp, fm;
        for (int s : {1, -1}) {
            auto target = b0.point.critical_values;
            target[k] += double(s) * step;
            auto e = hurwitz_solve(base, target, b0, J, radii);
            (s > 0 ? fp : fm) = dlogs(e);
        }
        for (int i = 0; i < d; ++i) Dm(i, k) = (fp[i] - fm[i]) / (2.0 * step);
    }
    out.residual = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            double r = std::abs(Dm(i, j) - Dm(j, i));
            out.residual(i, j) = out.residual(j, i) = r;
            out.max_residual = std::max(out.max_residual, r);
        }
    return out;
}

}  // namespace sktau
