#pragma once

#include <cmath>

#include "sktau/schottky.hpp"

namespace fixtures {

using sktau::cplx;
using sktau::MoebiusMap;
using sktau::SpherePoint;

// L1 = diag, L2 with attracting 1 and repelling -1; normalized
inline sktau::MarkedSchottkyGroup genus2_group(cplx q1 = 0.03, cplx q2 = std::polar(0.03, 0.4))
{
    auto L1 = MoebiusMap::scaling(q1);
    auto L2 = MoebiusMap::from_fixed_points({1.0, false}, {-1.0, false}, q2);
    auto g = sktau::make_group({L1, L2});
    g.normalized = true;
    return g;
}

inline sktau::MarkedSchottkyGroup genus2_small_circles(double scale = 1.0)
{
    return genus2_group(0.01 * scale, std::polar(0.01 * scale, -0.3));
}

inline sktau::MarkedSchottkyGroup genus3_group()
{
    auto L1 = MoebiusMap::scaling(0.03);
    auto L2 = MoebiusMap::from_fixed_points({1.0, false}, {-1.0, false}, 0.03);
    auto L3 = MoebiusMap::from_fixed_points({cplx(0, 1), false}, {cplx(0, -1), false}, cplx(0.02, 0.01));
    return sktau::make_group({L1, L2, L3});
}

// frozen from the first run of the delta estimator on genus2_small_circles()
inline constexpr double golden_delta_small_circles = 0.26606572382385718;

}  // namespace fixtures
