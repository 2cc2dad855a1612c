#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sktau/hurwitz.hpp"

using namespace sktau;

namespace {

TwoPoleLambda fixture()
{
    cplx tau(0.1, 0.8);
    return {std::exp(2 * pi * I * tau), 1.0, cplx(-0.6, 0.9), 1.0, 0.0};
}

}  // namespace

TEST_CASE("two-pole function: periodicity, poles, derivatives")
{
    auto l = fixture();
    for (cplx z : {cplx(0.4, 0.3), cplx(-1.2, 0.5), cplx(0.1, -2.0)}) {
        auto a = l.jet(z), b = l.jet(l.q * z);
        CHECK(std::abs(a.v - b.v) < 1e-12 * std::max(1.0, std::abs(a.v)));
        // lambda_z transforms with weight 1
        CHECK(std::abs(b.d1 * l.q - a.d1) < 1e-11 * std::max(1.0, std::abs(a.d1)));
        // finite-difference oracle for the derivatives
        double h = 1e-5;
        auto p = l.jet(z + h), m = l.jet(z - h);
        CHECK(std::abs((p.v - m.v) / (2 * h) - a.d1) < 1e-7 * std::max(1.0, std::abs(a.d1)));
        CHECK(std::abs((p.d1 - m.d1) / (2 * h) - a.d2) < 1e-6 * std::max(1.0, std::abs(a.d2)));
        CHECK(std::abs((p.d2 - m.d2) / (2 * h) - a.d3) < 1e-5 * std::max(1.0, std::abs(a.d3)));
    }
    // residue of lambda at p1 is A p1
    double e = 1e-6;
    cplx z = l.p1 + e;
    CHECK(std::abs(l.jet(z).v * e - l.A * l.p1) < 1e-5);
    auto d = pole_residue_defects(l, 0.05);
    REQUIRE(d.size() == 2);
    CHECK(d[0] <= 1e-8);
    CHECK(d[1] <= 1e-8);
}

TEST_CASE("critical points")
{
    auto l = fixture();
    auto p = hurwitz_mode_point(l);
    REQUIRE(p.m() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(l.jet(p.critical_points[i]).d1) < 1e-10);
        CHECK(std::abs(l.jet(p.critical_points[i]).d2) > 1e-6);
    }
    auto again = hurwitz_mode_point(l, {p.critical_points[2], p.critical_points[0], p.critical_points[1],
                                        p.critical_points[3]});
    CHECK(std::abs(again.critical_points[0] - p.critical_points[2]) < 1e-12);
}

TEST_CASE("tau derivatives in critical values")
{
    auto l = fixture();
    auto p = hurwitz_mode_point(l);
    BergmanSeries bs(l.group(), 10), bs8(l.group(), 8);
    auto shifted = l;
    shifted.B += cplx(0.7, -0.2);
    auto ps = hurwitz_mode_point(shifted);
    for (int i = 0; i < 4; ++i) {
        auto v = hurwitz_dlog_tau(p, bs, i);
        CHECK(std::isfinite(std::abs(v.value)));
        CHECK(std::abs(v.value - hurwitz_dlog_tau(p, bs8, i).value) < 1e-8);
        auto half = p;
        half.radii[i] *= 0.5;
        CHECK(std::abs(hurwitz_dlog_tau(half, bs, i).value - v.value) <= 1e-8);
        CHECK(std::abs(ps.critical_values[i] - p.critical_values[i] - cplx(0.7, -0.2)) < 1e-12);
        CHECK(std::abs(hurwitz_dlog_tau(ps, bs, i).value - v.value) <= 1e-12);
    }
}

TEST_CASE("closedness in critical values")
{
    auto c = hurwitz_compatibility(fixture(), 1e-4, 10);
    MESSAGE("max residual " << c.max_residual);
    CHECK(c.max_residual <= 1e-3);
}
