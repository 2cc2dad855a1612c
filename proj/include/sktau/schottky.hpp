#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sktau/moebius.hpp"

namespace sktau {

// Circle bounding one of the 2g Schottky discs. The disc is the side that
// contains infinity when `contains_infinity` is set, the bounded side otherwise.
struct SchottkyCircle {
    cplx center;
    double radius = 0.0;
    bool contains_infinity = false;

    bool in_open_disc(cplx z) const;
    bool in_closed_disc(cplx z) const;
    bool in_closed_disc(SpherePoint p) const;
    // signed distance to the circle, positive outside the disc
    double clearance(cplx z) const;
};

// Letters are encoded as 2*r (L_{r+1}) and 2*r+1 (its inverse).
using Letter = std::uint8_t;
inline Letter inverse_letter(Letter l) { return l ^ 1u; }

struct MarkedSchottkyGroup {
    int genus = 0;
    std::vector<MoebiusMap> generators;
    // circles[2r] = C_{r+1} (repelling side of L_{r+1}), circles[2r+1] = C_{-(r+1)}
    std::vector<SchottkyCircle> circles;
    bool normalized = false;

    MoebiusMap letter_map(Letter l) const;  // inverse generator for odd letters
    std::vector<MoebiusMap> letter_maps() const;
};

// Circle data when none is supplied: isometric circles, or concentric circles
// |z-p| = |q|^{+-1/2} about the finite fixed point of a generator fixing infinity.
std::vector<SchottkyCircle> default_circles(const std::vector<MoebiusMap>& generators);

// Builds a group from generators (+ optional circles), validating everything.
// Circles, when given, are checked as supplied; otherwise default_circles are used.
MarkedSchottkyGroup make_group(const std::vector<MoebiusMap>& generators,
                               const std::vector<SchottkyCircle>& circles = {});

// Throws Error(not_loxodromic / schottky_condition) with a message.
void validate_group(const MarkedSchottkyGroup& g);

MarkedSchottkyGroup validate_and_normalize(const MarkedSchottkyGroup& g);

// Conjugate every generator by h (h L h^-1) and move the circles along.
MarkedSchottkyGroup conjugate_group(const MarkedSchottkyGroup& g, const MoebiusMap& h);
SchottkyCircle transform_circle(const SchottkyCircle& c, const MoebiusMap& h);

// ---- words ---------------------------------------------------------------

struct ReducedWord {
    std::vector<Letter> letters;
    MoebiusMap element;
};

// All reduced words of length 1..n, shell by shell, lexicographic inside a shell.
std::vector<ReducedWord> enumerate_words(const MarkedSchottkyGroup& g, int max_length);
void for_each_word(const MarkedSchottkyGroup& g, int max_length, const std::function<void(const ReducedWord&)>& fn);
long word_count(int genus, int max_length);

// Flat table of group elements up to a word length, identity first.
struct WordTable {
    std::vector<MoebiusMap> element;
    std::vector<std::uint8_t> length;
    std::vector<Letter> first, last;  // meaningless for the identity (index 0)
    int max_length = 0;
};

WordTable build_word_table(const MarkedSchottkyGroup& g, int max_length);

struct PrimitiveClass {
    std::vector<Letter> representative;
    MoebiusMap element;
    cplx multiplier;
    double length;
    double holonomy;
};

std::vector<PrimitiveClass> primitive_classes(const MarkedSchottkyGroup& g, int max_length);
// streaming variant (word-length order, canonical inside a length)
void for_each_primitive_class(const MarkedSchottkyGroup& g, int max_length,
                              const std::function<void(const PrimitiveClass&)>& fn);

bool is_cyclically_reduced(const std::vector<Letter>& w);
bool is_proper_power(const std::vector<Letter>& w);
std::vector<Letter> minimal_rotation(const std::vector<Letter>& w);

struct DeltaEstimate {
    double delta;
    double quality;  // residual of the shell fit at the critical exponent
};

DeltaEstimate delta_estimate(const MarkedSchottkyGroup& g, cplx z0, int max_length);

// ---- fundamental domain --------------------------------------------------

struct Reduction {
    cplx point;
    std::vector<Letter> word;  // reduced point = word(z), letters applied right to left
    MoebiusMap element;
};

class FundamentalDomain {
public:
    explicit FundamentalDomain(const MarkedSchottkyGroup& g);
    bool contains(cplx z) const;
    bool contains(SpherePoint p) const;
    // distance from z to the nearest disc, negative inside a disc
    double clearance(cplx z) const;
    Reduction reduce(cplx z, int budget = 400) const;
    const MarkedSchottkyGroup& group() const { return g_; }

private:
    MarkedSchottkyGroup g_;
};

// A point of the fundamental domain well away from every circle.
cplx default_base_point(const MarkedSchottkyGroup& g);

}  // namespace sktau
