#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <random>

#include "sktau/numerics.hpp"

using namespace sktau;

TEST_CASE("contour integrals on the unit circle")
{
    QuadratureConfig cfg;
    cfg.target_tolerance = 1e-12;
    Path c = Path::circle(0.0, 1.0);
    auto r1 = contour_integral([](cplx z) { return 1.0 / z; }, c, cfg);
    CHECK(r1.converged);
    CHECK(std::abs(r1.value - 2.0 * pi * I) < 1e-12);
    auto r2 = contour_integral([](cplx z) { return z; }, c, cfg);
    CHECK(std::abs(r2.value) < 1e-12);
    auto r3 = contour_integral([](cplx z) { return 1.0 / (z * z * z); }, c, cfg);
    CHECK(std::abs(r3.value) < 1e-12);
    CHECK(r1.terms_used > 0);
    CHECK(r1.error_estimate <= cfg.target_tolerance);
}

TEST_CASE("closed contours of random polynomials integrate to zero")
{
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    QuadratureConfig cfg;
    cfg.target_tolerance = 1e-10;
    for (int t = 0; t < 10; ++t) {
        std::vector<cplx> co(6);
        for (auto& c : co) c = {nd(rng), nd(rng)};
        auto p = [co](cplx z) {
            cplx s = 0;
            for (auto it = co.rbegin(); it != co.rend(); ++it) s = s * z + *it;
            return s;
        };
        // a circle and a closed polygon
        auto a = contour_integral(p, Path::circle({nd(rng), nd(rng)}, 0.5 + std::abs(nd(rng))), cfg);
        auto b = contour_integral(p, Path::polyline({0.0, {1, 0.2}, {0.3, 1.1}, {-0.7, 0.4}, 0.0}), cfg);
        CHECK(std::abs(a.value) < 1e-9);
        CHECK(std::abs(b.value) < 1e-9);
    }
}

TEST_CASE("segment and arc integrals")
{
    QuadratureConfig cfg;
    cfg.target_tolerance = 1e-12;
    auto r = contour_integral([](cplx z) { return std::exp(z); }, Path::segment(0.0, {1, 1}), cfg);
    CHECK(std::abs(r.value - (std::exp(cplx(1, 1)) - 1.0)) < 1e-12);
    auto h = contour_integral([](cplx z) { return 1.0 / z; }, Path::arc(0.0, 2.0, 0.0, pi), cfg);
    CHECK(std::abs(h.value - pi * I) < 1e-12);
    auto f = contour_integral_fixed([](cplx z) { return 1.0 / z; }, Path::arc(0.0, 2.0, 0.0, pi), 4);
    CHECK(std::abs(f.value - pi * I) < 1e-12);
    auto rev = contour_integral([](cplx z) { return z * z; }, Path::segment(0.0, {1, 1}).reversed(), cfg);
    CHECK(std::abs(rev.value + std::pow(cplx(1, 1), 3) / 3.0) < 1e-12);
}

TEST_CASE("non-finite samples are reported with their parameter")
{
    QuadratureConfig cfg;
    try {
        contour_integral([](cplx z) { return 1.0 / (z - 0.5); }, Path::segment(0.0, 1.0), cfg);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::numerical);
        CHECK(std::string(e.what()).find("s=0.5") != std::string::npos);
    }
}

TEST_CASE("subdivision limit gives a non-converged report")
{
    QuadratureConfig cfg;
    cfg.target_tolerance = 1e-14;
    cfg.max_subdivisions = 2;
    auto r = contour_integral([](cplx z) { return std::sin(200.0 * z); }, Path::segment(0.0, 3.0), cfg);
    CHECK_FALSE(r.converged);
    CHECK(r.error_estimate > cfg.target_tolerance);
}

TEST_CASE("region integrals")
{
    QuadratureConfig cfg;
    cfg.target_tolerance = 1e-10;
    double delta = 1e-3;
    auto r = region_integral_excised([](cplx z) { return 1.0 / std::norm(z); }, Annulus{0.0, delta, 1.0}, {}, cfg);
    CHECK(r.converged);
    CHECK(std::abs(r.value - 2 * pi * std::log(1 / delta)) < 1e-9);
    auto a = region_integral_excised([](cplx) { return cplx(1.0); }, Annulus{0.0, 0.5, 1.0}, {}, cfg);
    CHECK(std::abs(a.value - 0.75 * pi) < 1e-10);
    // concentric excision
    auto e = region_integral_excised([](cplx z) { return 1.0 / std::norm(z); }, Annulus{0.0, 0.0, 1.0},
                                     {{0.0, delta}}, cfg);
    CHECK(std::abs(e.value - 2 * pi * std::log(1 / delta)) < 1e-9);
}

TEST_CASE("invariant density over two fundamental domains of a cyclic group")
{
    // z -> q z with q = 0.3 i; 1/|z|^2 d^2z is invariant
    cplx q(0.0, 0.3);
    QuadratureConfig cfg;
    cfg.target_tolerance = 2e-3;
    auto f = [](cplx z) { return cplx(1.0 / std::norm(z)); };
    auto d1 = region_integral_excised(f, Annulus{0.0, std::abs(q), 1.0}, {}, cfg);
    // second domain: between |z - 0.1| = 1 and its image |z - 0.1 q| = |q|
    CircleDomain dom{0.1, 1.0, {{0.1 * q, std::abs(q)}}};
    auto d2 = region_integral_excised(f, dom, {}, cfg);
    double exact = 2 * pi * std::log(1 / std::abs(q));
    CHECK(std::abs(d1.value - exact) < 1e-8);
    CHECK(std::abs(d2.value - exact) < 5e-3);
    CHECK(std::abs(d2.value - d1.value) < 5e-3);
}

TEST_CASE("overlapping excisions are rejected")
{
    QuadratureConfig cfg;
    CHECK_THROWS_AS(region_integral_excised([](cplx) { return cplx(1); }, Annulus{0.0, 0.1, 1.0},
                                            {{0.5, 0.1}, {0.55, 0.1}}, cfg),
                    Error);
}

TEST_CASE("limit extrapolation")
{
    auto gen = [](auto fn) {
        std::vector<std::pair<double, cplx>> s;
        for (double e : {0.1, 0.05, 0.025}) s.push_back({e, fn(e)});
        return s;
    };
    auto r1 = limit_extrapolate(gen([](double e) { return cplx(1.5, -0.5) + 3.0 * e * e; }), LimitModel::pure_power);
    CHECK(std::abs(r1.limit - cplx(1.5, -0.5)) < 1e-12);
    CHECK(r1.residual <= 1e-10);
    CHECK(std::abs(r1.order - 2.0) < 1e-8);
    auto r2 = limit_extrapolate(gen([](double e) { return cplx(0.25) + 2.0 * e * std::log(e); }),
                                LimitModel::power_plus_log);
    CHECK(std::abs(r2.limit - 0.25) < 1e-12);
    auto r3 = limit_extrapolate(gen([](double) { return cplx(4.0, 1.0); }), LimitModel::pure_power);
    CHECK(std::abs(r3.limit - cplx(4.0, 1.0)) < 1e-15);
    // four samples of a model the fit cannot represent get flagged
    std::vector<std::pair<double, cplx>> bad{{0.1, 1.0}, {0.05, 2.0}, {0.025, 0.0}, {0.0125, 5.0}};
    auto r4 = limit_extrapolate(bad, LimitModel::pure_power, 1e-6);
    CHECK(r4.flagged);
    CHECK_THROWS(limit_extrapolate({{0.1, 1.0}, {0.2, 1.0}, {0.05, 1.0}}, LimitModel::pure_power));
}

TEST_CASE("holomorphic finite differences")
{
    auto d = holomorphic_fd([](cplx w) { return w * w; }, 1.0, 1e-4);
    CHECK(std::abs(d.derivative - 2.0) < 1e-8);
    CHECK(d.cr_residual < 1e-8);
    auto n = holomorphic_fd([](cplx w) { return cplx(std::norm(w)); }, 1.0, 1e-4);
    CHECK(std::abs(n.cr_residual - 1.0) < 1e-8);
    auto e = holomorphic_fd_richardson([](cplx w) { return std::exp(w); }, cplx(0.3, 0.2), 1e-3);
    CHECK(std::abs(e.derivative - std::exp(cplx(0.3, 0.2))) < 1e-9);
}

TEST_CASE("reports are bit-identical across runs and thread counts")
{
    QuadratureConfig cfg;
    cfg.target_tolerance = 1e-11;
    auto f = [](cplx z) { return std::exp(z) / (z - 3.0); };
    auto a = contour_integral(f, Path::circle(0.0, 1.0), cfg);
    set_max_threads(4);
    auto b = contour_integral(f, Path::circle(0.0, 1.0), cfg);
    std::vector<double> v(1000);
    parallel_for(v.size(), [&](std::size_t i) { v[i] = std::sin(double(i)); });
    double s4 = pairwise_sum(v);
    set_max_threads(1);
    parallel_for(v.size(), [&](std::size_t i) { v[i] = std::sin(double(i)); });
    double s1 = pairwise_sum(v);
    CHECK(std::memcmp(&a.value, &b.value, sizeof(cplx)) == 0);
    CHECK(a.error_estimate == b.error_estimate);
    CHECK(std::memcmp(&s1, &s4, sizeof(double)) == 0);
}

TEST_CASE("quadrature config invariants")
{
    QuadratureConfig c;
    CHECK_NOTHROW(c.validate());
    c.limit_grid = {0.1, 0.2};
    CHECK_THROWS_AS(c.validate(), Error);
    c = QuadratureConfig{};
    c.excision_radius = 0;
    CHECK_THROWS_AS(c.validate(), Error);
}
