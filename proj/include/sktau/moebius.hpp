#pragma once

#include <optional>

#include "sktau/numerics.hpp"

namespace sktau {

// Point of the Riemann sphere. `inf` wins over `z`.
struct SpherePoint {
    cplx z{0.0, 0.0};
    bool inf = false;

    static SpherePoint infinity() { return {cplx{}, true}; }
    bool operator==(const SpherePoint&) const = default;
};

struct MoebiusMap {
    cplx a{1.0}, b{0.0}, c{0.0}, d{1.0};

    MoebiusMap() = default;
    // normalizes to det 1 and canonical sign; throws on det 0
    MoebiusMap(cplx a, cplx b, cplx c, cplx d);

    // entries already of det 1; only the sign is canonicalized
    static MoebiusMap unit_det(cplx a, cplx b, cplx c, cplx d);

    static MoebiusMap identity() { return {}; }
    static MoebiusMap scaling(cplx k);  // z -> k z
    static MoebiusMap translation(cplx t);
    // loxodromic map with given attracting / repelling fixed points and multiplier q (|q|<1)
    static MoebiusMap from_fixed_points(SpherePoint attracting, SpherePoint repelling, cplx q);

    cplx det() const { return a * d - b * c; }
    cplx trace() const { return a + d; }
    MoebiusMap inverse() const;

    SpherePoint apply(SpherePoint p) const;
    cplx apply(cplx z) const;  // throws if z is the pole
    cplx derivative(cplx z) const;
    bool is_pole(cplx z) const;
};

MoebiusMap compose(const MoebiusMap& g, const MoebiusMap& h);  // g after h
inline MoebiusMap operator*(const MoebiusMap& g, const MoebiusMap& h) { return compose(g, h); }
MoebiusMap conjugate(const MoebiusMap& g, const MoebiusMap& h);  // h g h^-1
MoebiusMap power(const MoebiusMap& g, int n);

// min over signs of the max-norm distance between matrices
double projective_distance(const MoebiusMap& g, const MoebiusMap& h);

struct LoxodromicData {
    SpherePoint fixed_attracting;
    SpherePoint fixed_repelling;
    cplx multiplier;  // |q| < 1
    double length;    // -log|q|
    double holonomy;  // arg q
};

enum class MoebiusKind { identity, parabolic, elliptic, loxodromic };

struct Classification {
    MoebiusKind kind;
    std::optional<LoxodromicData> lox;
    bool degenerate = false;  // |tr^2 - 4| < 1e-10
};

Classification classify(const MoebiusMap& g);
// throws Error(not_loxodromic) if g is not loxodromic
LoxodromicData loxodromic_data(const MoebiusMap& g);

}  // namespace sktau
