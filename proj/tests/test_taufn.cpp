#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>

#include "sktau/taufn.hpp"
#include "sktau/zograf.hpp"
#include "fixtures.hpp"

using namespace sktau;

namespace {

CoordinateChart genus1_chart(cplx tau, int n = 10)
{
    return CoordinateChart(normalized_family(1), {std::exp(2 * pi * I * tau), 1.0}, n);
}

}  // namespace

TEST_CASE("genus one B-direction derivative")
{
    cplx tau(0.0, 1.3);
    auto chart = genus1_chart(tau);
    const auto& b = chart.base();
    auto F = dlog_tau_all(b.point, *b.bergman);
    REQUIRE(F.size() == 2);
    cplx want = pi * I * eisenstein_e2(tau) / 6.0;
    CHECK(std::abs(F[1].value - want) < 1e-5);
    MESSAGE("A-direction " << F[0].value << " vs -tau*B " << -tau * F[1].value);
}

TEST_CASE("genus one path in B")
{
    cplx t0(0.0, 1.2), t1(0.2, 1.4);
    auto chart = genus1_chart(t0);
    auto path = CoordinatePath::line({1.0, t0}, {1.0, t1}, 8);
    CHECK(path.max_relative_step() <= 0.05);
    auto r = integrate_tau(chart, path);
    cplx want = genus1_tau(t1).log_tau - genus1_tau(t0).log_tau;
    CHECK(std::abs(r.log_tau - want) < 1e-5);
    auto zero = integrate_tau(chart, CoordinatePath{{{1.0, t0}}});
    CHECK(zero.log_tau == 0.0);
    CHECK(zero.tau24 == 1.0);
    CHECK_THROWS_AS(integrate_tau(chart, CoordinatePath::line({1.0, t0}, {1.0, t1}, 2)), Error);
}

TEST_CASE("genus one compatibility")
{
    auto chart = genus1_chart(cplx(0.05, 1.1));
    auto c = compatibility_check(chart, chart.base(), {{0, 1}}, 1e-4);
    CHECK(c.max_residual <= 1e-5);
    CHECK(c.warnings.empty());
    CHECK_THROWS_AS(compatibility_check(chart, chart.base(), {{0, 2}}, 1e-4), Error);
}

TEST_CASE("genus one closed form")
{
    // eta(i) = Gamma(1/4) / (2 pi^(3/4))
    double eta_i = std::tgamma(0.25) / (2.0 * std::pow(pi, 0.75));
    CHECK(eta_i == doctest::Approx(0.768225).epsilon(1e-6));
    auto t = genus1_tau(I);
    CHECK(std::abs(std::exp(t.log_tau) - eta_i * eta_i) < 1e-13);
    CHECK(std::abs(std::exp(t.log_tau) - 0.590170) < 1e-6);

    double q = std::exp(-10.0 * pi);
    double two_term = std::exp(-5.0 * pi / 6.0) * (1.0 - 2.0 * q);
    CHECK(std::abs(std::exp(genus1_tau(5.0 * I).log_tau) / two_term - 1.0) <= 1e-12);

    // eta(-1/tau)^24 = (-i tau)^12 eta(tau)^24, squared
    cplx tau(0.0, 2.0);
    cplx lhs = genus1_tau(-1.0 / tau).tau24;
    cplx rhs = std::pow(-I * tau, 24) * genus1_tau(tau).tau24;
    CHECK(std::abs(lhs / rhs - 1.0) <= 1e-10);
}

TEST_CASE("isomonodromic tau")
{
    CHECK(isomonodromic_tau48(2.0) == cplx(0.5, 0.0));
    CHECK_THROWS_AS(isomonodromic_tau48(0.0), Error);
    for (cplx tau : {cplx(0.1, 0.9), cplx(-0.3, 1.4)}) {
        cplx t24 = genus1_tau(tau).tau24;
        cplx t48 = isomonodromic_tau48(t24);
        CHECK(std::abs(std::abs(t48) * std::abs(t24) - 1.0) < 1e-12);
        // eta^-48 from a direct product
        cplx q = std::exp(2.0 * pi * I * tau), prod = 1.0;
        for (int m = 1; m < 200; ++m) prod *= 1.0 - std::pow(q, m);
        cplx eta = std::exp(2.0 * pi * I * tau / 24.0) * prod;
        CHECK(std::abs(t48 * std::pow(eta, 48) - 1.0) < 1e-10);
    }
}

TEST_CASE("holonomy defect")
{
    CHECK(holonomy_defect(0.0) == 0.0);
    CHECK(holonomy_defect(2.0 * pi * I / 24.0) < 1e-14);
    CHECK(holonomy_defect(0.01) == doctest::Approx(0.24));
}

namespace {

std::vector<cplx> genus2_params()
{
    auto P = normalized_parameters(fixtures::genus2_group());
    P.push_back(1.0);
    P.push_back(cplx(0.3, 0.2));
    return P;
}

}  // namespace

TEST_CASE("genus two directional derivatives")
{
    CoordinateChart chart(normalized_family(2), genus2_params(), 10);
    const auto& b = chart.base();
    REQUIRE(chart.dimension() == 5);
    auto F = dlog_tau_all(b.point, *b.bergman);
    REQUIRE(F.size() == 5);
    BergmanSeries b8(b.point.basis->group(), 8);
    auto F8 = dlog_tau_all(b.point, b8);
    for (int i = 0; i < 5; ++i) {
        CHECK(std::isfinite(std::abs(F[i].value)));
        CHECK(F[i].error_estimate <= 1e-4);
        CHECK(std::abs(F[i].value - F8[i].value) <= 1e-4);
    }

    // halve the zero circle
    auto choice = b.point.choice;
    for (auto& r : choice.zero_radii) r *= 0.5;
    std::vector<cplx> hint;
    for (auto& z : b.point.zeros) hint.push_back(z.z);
    auto half = hurwitz_coordinates(b.point.basis, b.point.coeffs, choice, hint);
    CHECK(std::abs(dlog_tau(half, *b.bergman, 4).value - F[4].value) <= 1e-9);
}

TEST_CASE("genus two loop and homotopic paths")
{
    CoordinateChart chart(normalized_family(2), genus2_params(), 8);
    auto a = chart.base().point.coordinates;
    std::vector<cplx> u(5, 0.0), v(5, 0.0);
    u[1] = 0.01;
    v[4] = cplx(0.0, 0.02);
    auto add = [](std::vector<cplx> x, const std::vector<cplx>& y) {
        for (std::size_t k = 0; k < x.size(); ++k) x[k] += y[k];
        return x;
    };
    CoordinatePath p1{{a, add(a, u), add(add(a, u), v)}};
    CoordinatePath p2{{a, add(a, v), add(add(a, u), v)}};
    CHECK(p1.max_relative_step() <= 0.05);
    auto r1 = integrate_tau(chart, p1, 4);
    auto r2 = integrate_tau(chart, p2, 4);
    CHECK(std::abs(r1.tau24 / r2.tau24 - 1.0) <= 1e-3);
    CHECK(holonomy_defect(r1.log_tau - r2.log_tau) <= 1e-5);
    CHECK(std::abs(r1.log_tau) > 1e-4);

    // same loop through CoordinatePath::rectangle
    auto loop = integrate_tau(chart, CoordinatePath::rectangle(a, u, v, 1), 4);
    CHECK(holonomy_defect(loop.log_tau) <= 1e-5);
    CHECK(std::abs(loop.log_tau - (r1.log_tau - r2.log_tau)) <= 1e-8);
}

TEST_CASE("genus two l path choice")
{
    auto P = genus2_params();
    CoordinateChart chart(normalized_family(2), P, 8);
    const auto& b = chart.base().point;
    // nudge the interior vertices of l_1 without crossing a circle
    CycleChoice alt;
    alt.l_waypoints = b.choice.l_waypoints;
    const auto& circles = b.basis->group().circles;
    for (auto& w : alt.l_waypoints[0]) {
        cplx moved = w * cplx(1.05, 0.03);
        bool clear = true;
        for (auto& c : circles) clear = clear && std::abs(std::abs(moved - c.center) - c.radius) > 0.05;
        if (clear) w = moved;
    }
    CoordinateChart other(normalized_family(2), P, 8, alt);
    REQUIRE(other.base().point.l_paths.size() == 1);
    for (int i = 0; i < 5; ++i)
        CHECK(std::abs(other.base().point.coordinates[i] - b.coordinates[i]) <= 1e-10);
    auto a = b.coordinates;
    auto e = a;
    e[4] += cplx(0.02, -0.01);
    auto path = CoordinatePath::line(a, e, 1);
    auto r = integrate_tau(chart, path, 4);
    auto s = integrate_tau(other, path, 4);
    CHECK(std::abs(s.tau24 / r.tau24 - 1.0) <= 1e-6);
}
