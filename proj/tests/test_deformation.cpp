#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sktau/deformation.hpp"
#include "fixtures.hpp"

using namespace sktau;

namespace {

const BumpSeed bump{cplx(0.0, 1.2), 0.3, cplx(0.3, 0.2)};

const MarkedSchottkyGroup& group2()
{
    static const MarkedSchottkyGroup g = fixtures::genus2_group();
    return g;
}

const DeformationField& field2()
{
    static const DeformationField f(BeltramiDifferential(group2(), bump));
    return f;
}

std::vector<cplx> support_points(const BumpSeed& s, int n)
{
    std::vector<cplx> out;
    for (int k = 0; k < n; ++k) {
        double r = s.radius * (0.1 + 0.8 * ((k * 7) % n) / double(n));
        out.push_back(s.center + std::polar(r, 2 * pi * k / n + 0.3));
    }
    return out;
}

}  // namespace

TEST_CASE("zero seed")
{
    BeltramiDifferential mu(group2(), BumpSeed{cplx(0.0, 1.2), 0.3, 0.0});
    DeformationField f(mu);
    for (cplx z : {cplx(0.0, 1.2), cplx(0.5, 0.5), cplx(-2.0, 0.3)}) {
        CHECK(mu(z) == 0.0);
        CHECK(f.value(z).value == 0.0);
    }
}

TEST_CASE("invariant extension")
{
    BeltramiDifferential mu(group2(), bump);
    auto words = enumerate_words(group2(), 3);
    auto pts = support_points(bump, 8);
    int pairs = 0;
    double worst = 0, seed_max = 0, translate_max = 0;
    for (std::size_t k = 0; k < words.size(); k += 3) {
        const MoebiusMap& g = words[k].element;
        for (cplx z : pts) {
            cplx d = g.derivative(z);
            cplx lhs = mu(g.apply(z)) * std::conj(d) / d;
            worst = std::max(worst, std::abs(lhs - mu(z)));
            seed_max = std::max(seed_max, std::abs(mu(z)));
            translate_max = std::max(translate_max, std::abs(mu(g.apply(z))));
            ++pairs;
        }
    }
    CHECK(pairs >= 32);
    CHECK(worst <= 1e-10);
    CHECK(std::abs(translate_max - seed_max) <= 1e-10);
    CHECK(std::abs(mu(bump.center)) == doctest::Approx(mu.sup()).epsilon(1e-14));
    CHECK(mu.sup() < 1.0);
}

TEST_CASE("seed must sit inside the domain")
{
    // circle pair of L2 is centred near +-1
    CHECK_THROWS_AS(BeltramiDifferential(group2(), BumpSeed{cplx(1.0, 0.0), 0.3, 0.2}), Error);
    CHECK_THROWS_AS(BeltramiDifferential(group2(), BumpSeed{cplx(0.0, 1.2), 0.3, 1.0}), Error);
    FundamentalDomain D(group2());
    double c = D.clearance(bump.center);
    CHECK_THROWS_AS(BeltramiDifferential(group2(), BumpSeed{bump.center, c, 0.2}), Error);
    CHECK_NOTHROW(BeltramiDifferential(group2(), BumpSeed{bump.center, 0.9 * c, 0.2}));
}

TEST_CASE("fdot solves dbar f = mu")
{
    const auto& f = field2();
    const auto& mu = f.beltrami();
    CHECK(std::abs(f.dbar(bump.center + cplx(0.05, 0.02), 1e-4) - mu(bump.center + cplx(0.05, 0.02))) <= 1e-3);
    double worst = 0;
    for (cplx z : support_points(bump, 16)) worst = std::max(worst, std::abs(f.dbar(z, 1e-4) - mu(z)));
    CHECK(worst <= 1e-4);
    // holomorphic outside the support
    CHECK(std::abs(f.dbar(cplx(0.5, -0.5), 1e-4)) <= 1e-6);
    CHECK(std::abs(f.value(0.0).value) <= 1e-14);
    CHECK(std::abs(f.value(1.0).value) <= 1e-14);
    MESSAGE("translates " << f.translates() << " up to length " << f.word_length_used());
}

TEST_CASE("fdot jet")
{
    const auto& f = field2();
    for (cplx z : {cplx(0.5938, -0.1052), cplx(-1.6330, -0.2892)}) {
        double h = 1e-4;
        auto j = f.jet(z);
        cplx fp = f.value(z + h).value, f0 = f.value(z).value, fm = f.value(z - h).value;
        CHECK(std::abs(j.f - f0) <= 1e-12);
        CHECK(std::abs(j.fz - (fp - fm) / (2 * h)) <= 1e-8);
        CHECK(std::abs(j.fzz - (fp - 2.0 * f0 + fm) / (h * h)) <= 1e-5);
    }
}

TEST_CASE("real linearity")
{
    const auto& f = field2();
    for (double a : {2.5, -1.0}) {
        DeformationField fa(f.beltrami().scaled(a));
        for (cplx z : {cplx(0.5, -0.5), cplx(-1.7, 0.4), cplx(0.1, 1.25)})
            CHECK(std::abs(fa.value(z).value - a * f.value(z).value) <= 1e-12 * std::max(1.0, std::abs(f.value(z).value)));
    }
}

TEST_CASE("deformed group")
{
    const auto& f = field2();
    const auto& g = group2();
    auto v = generator_velocities(f);
    REQUIRE(v.size() == 2);
    for (auto& x : v) CHECK(x.fit_residual <= 1e-10);

    auto g0 = deformed_group(g, f, 0.0, v);
    for (int r = 0; r < 2; ++r) CHECK(projective_distance(g0.generators[r], g.generators[r]) <= 1e-12);

    for (int r = 0; r < 2; ++r) {
        double d1 = conjugation_defect(f, v, r, 1e-2), d2 = conjugation_defect(f, v, r, 5e-3);
        CHECK(d1 / d2 == doctest::Approx(4.0).epsilon(0.1));
    }

    for (int r = 0; r < 2; ++r) {
        double h = 1e-5;
        cplx qp = loxodromic_data(exp_times(v[r].X, h, g.generators[r])).multiplier;
        cplx qm = loxodromic_data(exp_times(v[r].X, -h, g.generators[r])).multiplier;
        CHECK(std::abs((qp - qm) / (2 * h) - multiplier_velocity(g.generators[r], v[r].X)) <= 1e-4);
    }

    // the renormalized group keeps 0, 1 and infinity and moves with the raw one
    auto gw = deformed_group(g, f, 1e-3, v);
    auto raw = loxodromic_data(exp_times(v[1].X, 1e-3, g.generators[1]));
    auto got = loxodromic_data(gw.generators[1]);
    CHECK(std::abs(got.fixed_attracting.z - 1.0) <= 1e-12);
    CHECK(std::abs(got.fixed_repelling.z - raw.fixed_repelling.z) <= 1e-9);
    CHECK(std::abs(got.multiplier - raw.multiplier) <= 1e-12);

    CHECK_THROWS_AS(deformed_group(g, f, 1.0, v), Error);
}

TEST_CASE("antisymmetry")
{
    const auto& f = field2();
    DeformationField fm(f.beltrami().scaled(-1.0));
    auto v = generator_velocities(f), vm = generator_velocities(fm);
    for (int r = 0; r < 2; ++r) CHECK((v[r].X + vm[r].X).cwiseAbs().maxCoeff() <= 1e-12);
    auto gp = deformed_group(group2(), f, 1e-3, v);
    auto gm = deformed_group(group2(), fm, 1e-3, vm);
    for (int r = 0; r < 2; ++r) {
        cplx q0 = loxodromic_data(group2().generators[r]).multiplier;
        cplx dp = loxodromic_data(gp.generators[r]).multiplier - q0;
        cplx dm = loxodromic_data(gm.generators[r]).multiplier - q0;
        CHECK(std::abs(dp + dm) <= 1e-3 * std::abs(dp) + 1e-14);
    }
}

TEST_CASE("genus one variation of tau")
{
    cplx q = std::exp(2 * pi * I * cplx(0.1, 1.1));
    auto fam = normalized_family(1);
    auto g = fam.make({q});
    DeformationField f(BeltramiDifferential(g, BumpSeed{cplx(0.0, 1.0), 0.3, cplx(0.3, 0.2)}));
    CoordinateChart chart(fam, {q, 1.0}, 8);
    auto tv = tau_variation_check(chart, f, 1e-3);
    CHECK(tv.zero_terms.empty());
    CHECK(tv.relative <= 1e-6);
}

TEST_CASE("genus two variation of tau")
{
    const auto& f = field2();
    auto P = normalized_parameters(group2());
    P.push_back(1.0);
    P.push_back(cplx(0.3, 0.2));
    CoordinateChart chart(normalized_family(2), P, 8);
    auto tv = tau_variation_check(chart, f, 1e-3);
    REQUIRE(tv.zero_terms.size() == 2);
    REQUIRE(tv.zeta_dot.size() == 5);
    // A coordinates stay fixed under the normalized deformation
    CHECK(std::abs(tv.zeta_dot[0]) <= 1e-12);
    CHECK(std::abs(tv.zeta_dot[1]) <= 1e-12);
    CHECK(tv.relative <= 1e-4);
    MESSAGE("lhs " << tv.lhs << " rhs " << tv.rhs << " relative " << tv.relative);
}
