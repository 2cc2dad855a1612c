#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "sktau/forms.hpp"
#include "sktau/zograf.hpp"
#include "fixtures.hpp"

using namespace sktau;

namespace {

const cplx phi_coeffs[2] = {1.0, cplx(0.3, 0.2)};

std::shared_ptr<HolomorphicBasis> genus2_basis(int n = 8)
{
    static std::map<int, std::shared_ptr<HolomorphicBasis>> cache;
    auto& b = cache[n];
    if (!b) b = std::make_shared<HolomorphicBasis>(fixtures::genus2_group(), n);
    return b;
}

std::vector<cplx> coeffs() { return {phi_coeffs[0], phi_coeffs[1]}; }

// points of the fundamental domain away from the circles
std::vector<cplx> domain_samples(const MarkedSchottkyGroup& g, int n, unsigned seed)
{
    FundamentalDomain D(g);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-3, 3);
    std::vector<cplx> out;
    while (int(out.size()) < n) {
        cplx z(u(rng), u(rng));
        if (D.clearance(z) > 0.1) out.push_back(z);
    }
    return out;
}

// Weierstrass p by row sums of cosecants (lattice 1, tau)
cplx wp(cplx u, cplx tau)
{
    auto csc2 = [](cplx x) {
        cplx s = std::sin(pi * x);
        return pi * pi / (s * s);
    };
    cplx s = csc2(u) - pi * pi / 3.0;
    for (int n = 1; n < 60; ++n) {
        cplx nt = double(n) * tau;
        s += csc2(u + nt) + csc2(u - nt) - 2.0 * csc2(nt);
    }
    return s;
}

}  // namespace

TEST_CASE("genus one differential and period")
{
    cplx tau(0.1, 0.9);
    cplx q = std::exp(2 * pi * I * tau);
    auto g = make_group({MoebiusMap::scaling(q)});
    HolomorphicBasis b(g, 10);
    for (cplx z : {cplx(0.5, 0.2), cplx(-1.1, 0.7), cplx(0.3, -2.0)})
        CHECK(std::abs(b.values(z)[0] - 1.0 / (2 * pi * I * z)) < 1e-15);
    QuadratureConfig cfg;
    cfg.target_tolerance = 1e-13;
    auto r = contour_integral([&](cplx z) { return b.values(z)[0]; }, Path::circle(0.0, 1.0), cfg);
    CHECK(std::abs(r.value - 1.0) < 1e-13);
    auto pm = period_matrix(b, default_b_angles(g));
    CHECK(std::abs(pm.tau(0, 0) - std::log(q) / (2 * pi * I)) < 1e-10);
    CHECK(std::abs(pm.tau(0, 0) - tau) < 1e-10);
    auto hp = hurwitz_coordinates(std::make_shared<HolomorphicBasis>(g, 10), {1.0});
    REQUIRE(hp.dimension() == 2);
    CHECK(std::abs(hp.coordinates[0] - 1.0) < 1e-12);
    CHECK(std::abs(hp.coordinates[1] - tau) < 1e-10);
    CHECK(hp.zeros.empty());
}

TEST_CASE("genus one Bergman projective connection and kernel")
{
    cplx tau(0.1, 0.9);
    cplx q = std::exp(2 * pi * I * tau);
    auto g = make_group({MoebiusMap::scaling(q)});
    BergmanSeries bs(g, 12);
    cplx e2 = eisenstein_e2(tau);
    for (cplx z : {cplx(0.5, 0.2), cplx(-1.1, 0.7)}) {
        auto r = bs.projective_connection(z);
        CHECK(std::abs(r.value - (1.0 - e2) / (2.0 * z * z)) < 1e-12);
    }
    // torus chart: (2 pi i)^2 z w B = wp(u - v) + pi^2 E2 / 3
    cplx z(0.8, 0.3), w(-0.2, 0.9);
    cplx u = std::log(z) / (2 * pi * I), v = std::log(w) / (2 * pi * I);
    cplx lhs = std::pow(2 * pi * I, 2) * z * w * bs.bidifferential(z, w).value;
    cplx rhs = wp(u - v, tau) + pi * pi * e2 / 3.0;
    CHECK(std::abs(lhs - rhs) < 1e-9 * std::abs(rhs));
    // degenerate limit
    auto tiny = make_group({MoebiusMap::scaling(1e-9)});
    CHECK(std::abs(BergmanSeries(tiny, 6).projective_connection(cplx(0.3, 0.1)).value) < 1e-6);
}

TEST_CASE("projective connection of a form")
{
    cplx z(0.4, -0.3);
    FormJet j{1.0 / z, -1.0 / (z * z), 2.0 / (z * z * z)};
    CHECK(std::abs(projective_connection_of_form(j) - 1.0 / (2.0 * z * z)) < 1e-13);
    CHECK(std::abs(projective_connection_of_form({1.0, 0.0, 0.0})) == 0.0);
    // h = (z - a)(z + 2): leading term -3/2 (z - a)^-2
    cplx a(0.3, 0.1);
    for (double eps : {1e-3, 1e-4}) {
        cplx x = a + eps;
        FormJet k{(x - a) * (x + 2.0), 2.0 * x + 2.0 - a, 2.0};
        CHECK(std::abs(projective_connection_of_form(k) * eps * eps + 1.5) < 10 * eps);
    }
    CHECK_THROWS_AS(projective_connection_of_form({0.0, 1.0, 0.0}), Error);
}

TEST_CASE("genus two basis: normalization and invariance")
{
    auto b = genus2_basis();
    CHECK(b->normalization_residual() <= 1e-8);
    CHECK(std::abs(b->raw_a_periods().determinant()) > 1e-6);
    const auto& g = b->group();
    auto words = enumerate_words(g, 3);
    auto zs = domain_samples(g, 32, 11);
    double worst = 0, est = 0;
    for (std::size_t i = 0; i < zs.size(); ++i) {
        const auto& gam = words[(7 * i) % words.size()].element;
        cplx z = zs[i];
        std::vector<cplx> w0(2), w1(2);
        double e0, e1;
        b->eval(z, w0.data(), nullptr, nullptr, &e0);
        b->eval(gam.apply(z), w1.data(), nullptr, nullptr, &e1);
        for (int j = 0; j < 2; ++j) worst = std::max(worst, std::abs(w1[j] * gam.derivative(z) - w0[j]));
        est = std::max(est, e0 + e1 * std::abs(gam.derivative(z)));
    }
    CHECK(worst <= 10 * est + 1e-13);
}

TEST_CASE("genus two Bergman kernel")
{
    const auto& g = genus2_basis()->group();
    BergmanSeries bs(g, 8);
    auto zs = domain_samples(g, 16, 5);
    for (int i = 0; i + 1 < 16; i += 2) {
        auto a = bs.bidifferential(zs[i], zs[i + 1]), c = bs.bidifferential(zs[i + 1], zs[i]);
        CHECK(std::abs(a.value - c.value) <= 10 * (a.error_estimate + c.error_estimate) + 1e-13);
    }
    cplx z(0.5, 0.6);
    for (double d : {1e-3, 1e-4}) {
        cplx w = z + d * cplx(0.6, 0.8);
        CHECK(std::abs((z - w) * (z - w) * bs.bidifferential(z, w).value - 1.0) < 10 * d * d);
    }
    CHECK_THROWS_AS(bs.bidifferential(z, z), Error);
    auto words = enumerate_words(g, 2);
    for (int i = 0; i < 32; ++i) {
        cplx x = zs[i % 16];
        const auto& gam = words[(5 * i) % words.size()].element;
        auto r0 = bs.projective_connection(x), r1 = bs.projective_connection(gam.apply(x));
        cplx d = gam.derivative(x);
        CHECK(std::abs(r1.value * d * d - r0.value) <= 10 * (r0.error_estimate + r1.error_estimate * std::norm(d)) + 1e-12);
    }
}

TEST_CASE("genus two period matrix")
{
    auto b = genus2_basis(10);
    auto angles = default_b_angles(b->group());
    auto pm = period_matrix(*b, angles);
    CHECK(pm.symmetry_residual <= 1e-6);
    CHECK(pm.min_imag_eigenvalue > 0);
    CHECK(pm.a_normalization_residual < 1e-10);
    // different base points on the circles give the same periods
    std::vector<double> moved{angles[0] + 0.05, angles[1] - 0.05};
    auto pm2 = period_matrix(*b, moved);
    CHECK((pm.tau - pm2.tau).cwiseAbs().maxCoeff() < 1e-6);
    // truncation self-consistency
    auto pm6 = period_matrix(*genus2_basis(5), angles);
    CHECK((pm.tau - pm6.tau).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("genus two zeros and coordinates")
{
    auto b = genus2_basis();
    auto co = coeffs();
    auto zeros = find_zeros(*b, co);
    REQUIRE(zeros.size() == 2);
    CHECK(count_zeros(*b, co) == 2);
    CHECK(std::abs(zeros[0].z) <= std::abs(zeros[1].z));
    for (auto& z : zeros) {
        cplx h = b->combine(co, z.z + 1e-5).h;
        CHECK(std::abs(h / 1e-5 - z.htilde) <= 1e-3 * std::abs(z.htilde));
        // small loop around a zero of a holomorphic form
        auto r = contour_integral_fixed([&](cplx x) { return b->combine(co, x).h; }, Path::circle(z.z, 0.01), 4);
        CHECK(std::abs(r.value) < 1e-12);
    }
    auto hp = hurwitz_coordinates(b, co);
    CHECK(hp.dimension() == 2 * 2 + 2 - 1);
    CHECK(std::abs(hp.coordinates[0] - co[0]) < 1e-12);
    // zero tracking keeps the order
    auto again = find_zeros(*b, co, {zeros[1].z, zeros[0].z});
    CHECK(std::abs(again[0].z - zeros[1].z) < 1e-12);
    for (int i = 0; i < 2; ++i) {
        cplx bi = hp.tau(i, 0) * co[0] + hp.tau(i, 1) * co[1];
        CHECK(std::abs(hp.coordinates[2 + i] - bi) < 1e-12);
    }
    auto s0 = hp.s_nodes(0);
    CHECK(s0.size() == hp.b_nodes[0].size());
    CHECK_THROWS_AS(find_zeros(*b, {0.0, 0.0}), Error);
}
