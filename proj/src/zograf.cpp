#include "sktau/zograf.hpp"

#include <cmath>

namespace sktau {

QSeriesConfig QSeriesConfig::for_modulus(double aq, double eps)
{
    if (!(aq < 1.0)) throw Error(ErrorKind::domain, "q-series needs |q| < 1");
    int n = aq == 0.0 ? 1 : std::max(1, int(std::ceil(std::log(eps) / std::log(aq))));
    return with_truncation(aq, n);
}

QSeriesConfig QSeriesConfig::with_truncation(double aq, int n)
{
    QSeriesConfig c;
    c.truncation = n;
    c.tail_bound = std::pow(aq, n + 1) / ((1 - aq) * (1 - aq));
    return c;
}

namespace {

// log(1 - x) without cancellation for small |x|
cplx log_one_minus(cplx x)
{
    double re = 0.5 * std::log1p(-2.0 * x.real() + std::norm(x));
    double im = std::atan2(-x.imag(), 1.0 - x.real());
    return {re, im};
}

}  // namespace

cplx log_euler_product(cplx q, const QSeriesConfig& cfg)
{
    std::vector<cplx> terms(cfg.truncation);
    cplx qm = 1.0;
    for (int m = 1; m <= cfg.truncation; ++m) {
        qm *= q;
        terms[m - 1] = log_one_minus(qm);
    }
    return pairwise_sum(terms);
}

cplx pentagonal_series(cplx q, double eps)
{
    cplx s = 1.0;
    for (long k = 1;; ++k) {
        cplx a = std::pow(q, double(k * (3 * k - 1) / 2));
        cplx b = std::pow(q, double(k * (3 * k + 1) / 2));
        double sgn = (k % 2) ? -1.0 : 1.0;
        s += sgn * (a + b);
        if (std::abs(a) < eps) break;
    }
    return s;
}

cplx eisenstein_e2(cplx tau)
{
    cplx q = std::exp(2 * pi * I * tau);
    auto cfg = QSeriesConfig::for_modulus(std::abs(q), 1e-18);
    std::vector<cplx> t;
    cplx qn = 1.0;
    for (int n = 1; n <= cfg.truncation; ++n) {
        qn *= q;
        t.push_back(double(n) * qn / (1.0 - qn));
    }
    return 1.0 - 24.0 * pairwise_sum(t);
}

EtaValue eta(cplx tau) { return eta(tau, QSeriesConfig::for_modulus(std::exp(-2 * pi * tau.imag()))); }

EtaValue eta(cplx tau, const QSeriesConfig& cfg)
{
    if (!(tau.imag() > 0)) throw Error(ErrorKind::domain, "eta needs Im tau > 0");
    cplx q = std::exp(2 * pi * I * tau);
    EtaValue e;
    e.log_value = 2 * pi * I * tau / 24.0 + log_euler_product(q, cfg);
    e.value = std::exp(e.log_value);
    e.tail_bound = cfg.tail_bound;
    e.terms = cfg.truncation;
    return e;
}

FProductResult f_product(const MarkedSchottkyGroup& g, int n, const FProductOptions& opt)
{
    FProductResult r;
    r.max_word_length = n;
    r.value = 1.0;
    r.log_value = 0.0;
    if (n <= 0) return r;
    if (opt.check_delta) {
        cplx z0 = g.circles.empty() ? cplx(0.3, 0.7) : default_base_point(g);
        DeltaEstimate d = delta_estimate(g, z0, std::max(4, opt.delta_length));
        r.delta_gate = d.delta;
        if (!(d.delta < 1.0))
            throw Error(ErrorKind::domain, "validity gate: exponent of convergence estimate " +
                                               std::to_string(d.delta) + " is not below 1");
    }
    std::vector<cplx> per_length(n + 1, 0.0);
    std::vector<std::vector<cplx>> parts(n + 1);
    double inner_tail = 0.0;
    for_each_primitive_class(g, n, [&](const PrimitiveClass& c) {
        if (r.classes_used >= opt.class_budget) {
            r.partial = true;
            return;
        }
        double aq = std::abs(c.multiplier);
        // re-assert |q| = exp(-length) at the point of use
        if (std::abs(aq - std::exp(-c.length)) > 1e-12 * std::max(aq, 1e-300))
            throw Error(ErrorKind::numerical, "multiplier modulus inconsistent with geodesic length");
        auto cfg = QSeriesConfig::for_modulus(aq, opt.inner_eps);
        parts[c.representative.size()].push_back(log_euler_product(c.multiplier, cfg));
        inner_tail += cfg.tail_bound;
        ++r.classes_used;
    });
    for (int k = 1; k <= n; ++k) per_length[k] = pairwise_sum(parts[k]);
    std::vector<cplx> tot(per_length.begin() + 1, per_length.end());
    r.log_value = pairwise_sum(tot);
    r.value = std::exp(r.log_value);
    // word-length truncation: extrapolate the geometric decay of the last shells
    double last = std::abs(per_length[n]);
    double prev = n >= 2 ? std::abs(per_length[n - 1]) : 0.0;
    double ratio = prev > 0 ? last / prev : 0.0;
    if (g.genus == 1)
        r.error_estimate = inner_tail;  // all classes have length one
    else
        r.error_estimate = inner_tail + (ratio < 1 ? last * ratio / (1 - ratio) : last);
    return r;
}

HolomorphyCheck f_holomorphy_check(const std::function<MarkedSchottkyGroup(cplx)>& family, cplx w0, int n,
                                   double step)
{
    FProductOptions opt;
    opt.check_delta = false;
    {
        // gate once at the base point
        FProductOptions gate;
        f_product(family(w0), 1, gate);
    }
    auto logF = [&](cplx w) { return f_product(family(w), n, opt).log_value; };
    auto d = holomorphic_fd_richardson(logF, w0, step);
    return {d.derivative, d.cr_residual};
}

}  // namespace sktau
