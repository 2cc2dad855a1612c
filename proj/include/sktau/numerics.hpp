#pragma once

#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace sktau {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

// Error kinds double as CLI exit codes.
enum class ErrorKind {
    usage = 1,
    schema = 2,
    malformed_json = 3,
    not_loxodromic = 4,
    schottky_condition = 5,
    generator_count = 6,
    numerical = 7,
    domain = 8,
    path = 9,
    stratum = 10,
    budget = 11,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }
    int exit_code() const { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

struct TruncationReport {
    cplx value{0.0, 0.0};
    double error_estimate = 0.0;
    long terms_used = 0;
    bool converged = false;
    std::string diagnostic;
};

struct QuadratureConfig {
    double target_tolerance = 1e-6;
    int max_subdivisions = 200;
    double excision_radius = 1e-2;
    std::vector<double> limit_grid{0.1, 0.05, 0.025};

    // throws Error(domain) when the invariants fail
    void validate() const;
};

// ---- threading -----------------------------------------------------------

void set_max_threads(int n);
int max_threads();

// Calls fn(i) for i in [0, n) across workers. fn must only write slot i of
// caller-owned storage; reductions are done afterwards in index order.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Pairwise (tree) summation in index order.
cplx pairwise_sum(const std::vector<cplx>& v);
double pairwise_sum(const std::vector<double>& v);

// ---- paths ---------------------------------------------------------------

struct PathPiece {
    enum class Kind { segment, arc } kind = Kind::segment;
    cplx a, b;                 // segment endpoints
    cplx center;               // arc data
    double radius = 0.0;
    double theta0 = 0.0, theta1 = 0.0;

    cplx point(double s) const;    // s in [0,1]
    cplx tangent(double s) const;  // dz/ds
    bool full_circle() const;
};

class Path {
public:
    static Path segment(cplx a, cplx b);
    static Path circle(cplx c, double r, bool ccw = true);
    static Path arc(cplx c, double r, double theta0, double theta1);
    static Path polyline(const std::vector<cplx>& pts);

    Path& append(const Path& other);
    Path reversed() const;
    cplx start() const;
    cplx end() const;
    const std::vector<PathPiece>& pieces() const { return pieces_; }
    // dense samples for geometric checks (distance to obstacles)
    std::vector<cplx> sample(int per_piece) const;

private:
    std::vector<PathPiece> pieces_;
};

using ComplexFn = std::function<cplx(cplx)>;

// Adaptive Gauss-Kronrod (segments/arcs) and trapezoid doubling (circles).
TruncationReport contour_integral(const ComplexFn& f, const Path& path, const QuadratureConfig& cfg);

// Fixed node set: `panels` GK15 panels per open piece, 15*panels trapezoid
// nodes per full circle. Smooth in any parameter f depends on, which makes it
// the right choice inside finite-difference stencils.
TruncationReport contour_integral_fixed(const ComplexFn& f, const Path& path, int panels);

// Nodes and weights of the fixed rule: integral of f dz ~ sum w_k f(z_k).
struct ContourRule {
    std::vector<cplx> z, w;
    cplx apply(const std::vector<cplx>& values) const;
};
ContourRule contour_rule_fixed(const Path& path, int panels);

// ---- 2D regions ----------------------------------------------------------

struct Annulus {
    cplx center;
    double r_inner;  // 0 for a disc
    double r_outer;
};

// Bounded domain: inside the outer circle, outside every hole.
struct CircleDomain {
    cplx outer_center;
    double outer_radius;
    std::vector<std::pair<cplx, double>> holes;
    bool contains(cplx z) const;
};

using Region = std::variant<Annulus, CircleDomain>;

struct Excision {
    cplx center;
    double radius;
};

// integral of f d^2z over region minus the excised discs
TruncationReport region_integral_excised(const ComplexFn& f, const Region& region,
                                         const std::vector<Excision>& excisions,
                                         const QuadratureConfig& cfg);

// Tensor rule on an annulus sector-free polar grid: n_r Gauss nodes in log r
// (or r for discs), n_t trapezoid nodes in angle. No adaptivity.
cplx annulus_integral_fixed(const ComplexFn& f, const Annulus& a, int n_r, int n_t);

// ---- extrapolation and differentiation ----------------------------------

enum class LimitModel { pure_power, power_plus_log };

struct LimitResult {
    cplx limit;
    double residual = 0.0;
    double order = 0.0;  // fitted exponent (pure_power)
    bool flagged = false;
};

LimitResult limit_extrapolate(const std::vector<std::pair<double, cplx>>& samples, LimitModel model,
                              double flag_threshold = 1e-6);

struct HoloDerivative {
    cplx derivative;
    double cr_residual;
};

HoloDerivative holomorphic_fd(const ComplexFn& g, cplx w0, double step);
// Richardson combination of steps h and h/2
HoloDerivative holomorphic_fd_richardson(const ComplexFn& g, cplx w0, double step);

// Gauss-Legendre nodes/weights on [-1,1]
struct GaussRule {
    std::vector<double> x, w;
};
const GaussRule& gauss_legendre(int n);

}  // namespace sktau
