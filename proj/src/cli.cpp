#include "sktau/cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "sktau/cs3d.hpp"
#include "sktau/hurwitz.hpp"
#include "sktau/polyakov.hpp"
#include "sktau/taufn.hpp"
#include "sktau/zograf.hpp"

namespace sktau::cli {

namespace {

bool parse_real(std::string_view t, double& v)
{
    if (!t.empty() && t[0] == '+') {
        t.remove_prefix(1);
        if (!t.empty() && t[0] == '-') return false;
    }
    if (t.empty()) return false;
    auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    return r.ec == std::errc() && r.ptr == t.data() + t.size() && std::isfinite(v);
}

json jc(cplx z) { return json::array({z.real(), z.imag()}); }

json jc(const std::vector<cplx>& v)
{
    json a = json::array();
    for (auto& z : v) a.push_back(jc(z));
    return a;
}

json jpoint(const SpherePoint& p) { return p.inf ? json("inf") : jc(p.z); }

cplx from_pair(const json& j, const std::string& what)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw Error(ErrorKind::schema, what + " must be a [re, im] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<cplx> from_pairs(const json& j, const std::string& what)
{
    if (!j.is_array()) throw Error(ErrorKind::schema, what + " must be a list of [re, im] pairs");
    std::vector<cplx> out;
    for (auto& e : j) out.push_back(from_pair(e, what));
    return out;
}

std::string read_text(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::usage, "cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

json parse_json(const std::string& text, const std::string& what)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::malformed_json, what + ": " + e.what());
    }
}

struct Options {
    std::string out, csv;
    int threads = 0;
    int max_word_length = 10;
    int delta_length = 8;
    double tol = 1e-6;
    double delta = 1e-2;
    std::vector<double> grid{0.1, 0.05, 0.025};
    unsigned long seed = 0;
    bool acceptance = false;

    QuadratureConfig quadrature() const
    {
        QuadratureConfig c;
        c.target_tolerance = tol;
        c.excision_radius = delta;
        c.limit_grid = grid;
        c.validate();
        return c;
    }
};

class Report {
public:
    json results = json::array();
    json checks = json::array();
    json data = json::object();

    void result(const std::string& name, const TruncationReport& r)
    {
        results.push_back({{"name", name},
                           {"value", jc(r.value)},
                           {"error_estimate", r.error_estimate},
                           {"converged", r.converged},
                           {"terms_used", r.terms_used},
                           {"diagnostic", r.diagnostic}});
    }
    void result(const std::string& name, cplx v, double err, bool conv, long terms = 0, const std::string& diag = {})
    {
        result(name, TruncationReport{v, err, terms, conv, diag});
    }
    // passes when value <= threshold
    void check(const std::string& name, double value, double threshold)
    {
        checks.push_back({{"name", name}, {"value", value}, {"threshold", threshold}, {"pass", value <= threshold}});
    }
    bool ok() const
    {
        for (auto& r : results)
            if (!r["converged"].get<bool>()) return false;
        for (auto& c : checks)
            if (!c["pass"].get<bool>()) return false;
        return true;
    }
};

MarkedSchottkyGroup load_group(const std::string& file)
{
    return parse_group_file(file);
}

json group_summary(const MarkedSchottkyGroup& g)
{
    json gens = json::array();
    for (auto& L : g.generators) {
        auto d = loxodromic_data(L);
        gens.push_back({{"matrix", jc(std::vector<cplx>{L.a, L.b, L.c, L.d})},
                        {"multiplier", jc(d.multiplier)},
                        {"attracting", jpoint(d.fixed_attracting)},
                        {"repelling", jpoint(d.fixed_repelling)}});
    }
    json circles = json::array();
    for (auto& c : g.circles)
        circles.push_back({{"center", jc(c.center)}, {"radius", c.radius}, {"contains_infinity", c.contains_infinity}});
    return {{"genus", g.genus}, {"normalized", g.normalized}, {"generators", gens}, {"circles", circles}};
}

json word_json(const std::vector<Letter>& w)
{
    json a = json::array();
    for (Letter l : w) a.push_back((l % 2 ? -1 : 1) * (l / 2 + 1));
    return a;
}

// ---- subcommands ---------------------------------------------------------

void genus1_verify(Report& rep, const Options& o, cplx tau, std::optional<cplx> to)
{
    if (tau.imag() <= 0) throw Error(ErrorKind::domain, "tau must lie in the upper half-plane");
    cplx q = std::exp(2 * pi * I * tau);
    auto qc = QSeriesConfig::for_modulus(std::abs(q), 1e-16);
    cplx L = log_euler_product(q, qc);
    // eta from the pentagonal series, the product side from the Euler product
    cplx eta48 = std::exp(4 * pi * I * tau) * std::pow(pentagonal_series(q), 48);
    cplx rhs = std::exp(4 * pi * I * tau + 48.0 * L);
    double residual = std::abs(eta48 - rhs) / std::abs(eta48);
    rep.result("eta48", eta48, residual, true, qc.truncation);
    rep.result("log_product", L, qc.tail_bound, std::pow(std::abs(q), qc.truncation) <= 1e-16, qc.truncation);
    rep.check("identity_residual", residual, 1e-10);

    // tau ODE along B at A = 1
    cplx t1 = to.value_or(tau + cplx(0.2, 0.2));
    if (t1.imag() <= 0) throw Error(ErrorKind::domain, "--to must lie in the upper half-plane");
    CoordinateChart chart(normalized_family(1), {q, 1.0}, o.max_word_length);
    int pieces = 1;
    auto path = CoordinatePath::line({1.0, tau}, {1.0, t1}, pieces);
    while (path.max_relative_step() > 0.04) path = CoordinatePath::line({1.0, tau}, {1.0, t1}, pieces *= 2);
    auto tv = integrate_tau(chart, path);
    cplx want = genus1_tau(t1).log_tau - genus1_tau(tau).log_tau;
    double ode_err = std::abs(tv.log_tau - want);
    rep.result("delta_log_tau_ode", tv.log_tau, tv.error_estimate, tv.error_estimate <= o.tol * 10, long(path.samples.size()));
    rep.result("delta_log_eta2", want, 0.0, true);
    rep.check("ode_vs_closed_form", ode_err, 1e-5);

    // Chern-Simons of the solid torus
    auto cs = cs_invariant(SolidTorusModel::from_tau(tau), o.quadrature());
    rep.result("cs", cs.limit);
    rep.check("cs_vs_i_tau", std::abs(cs.value - I * tau), 5e-3);
    cplx log_eta = 2 * pi * I * tau / 24.0 + std::log(pentagonal_series(q));
    cplx d = 48.0 * log_eta - 4 * pi * cs.value - 48.0 * L;
    d -= 2 * pi * I * std::round(d.imag() / (2 * pi));
    rep.result("identity_defect_mod_2pi_i", d, 4 * pi * cs.limit.error_estimate, cs.limit.converged);
    rep.check("identity_defect_mod_2pi_i", std::abs(d), 4 * pi * 5e-3);
    rep.data["q"] = jc(q);
    rep.data["to"] = jc(t1);
    rep.data["path_pieces"] = pieces;
}

void schottky_info(Report& rep, const Options& o, const MarkedSchottkyGroup& g, int class_length)
{
    rep.data["group"] = group_summary(g);
    int n = o.max_word_length;
    if (g.genus == 1) {
        cplx q = loxodromic_data(g.generators[0]).multiplier;
        rep.result("tau", std::log(q) / (2 * pi * I), 0.0, true);
    }
    auto de = delta_estimate(g, default_base_point(g), std::min(n, o.delta_length));
    rep.result("delta", de.delta, de.quality, true, std::min(n, o.delta_length));

    int cl = class_length > 0 ? class_length : n;
    std::vector<long> counts(cl + 1, 0);
    json shortest = json::array();
    for_each_primitive_class(g, cl, [&](const PrimitiveClass& c) {
        int len = int(c.representative.size());
        ++counts[len];
        if (len <= 2)
            shortest.push_back({{"word", word_json(c.representative)},
                                {"multiplier", jc(c.multiplier)},
                                {"length", c.length},
                                {"holonomy", c.holonomy}});
    });
    counts.erase(counts.begin());
    rep.data["classes"] = {{"max_length", cl}, {"count_by_length", counts}, {"up_to_length_2", shortest}};

    HolomorphicBasis basis(g, n);
    auto pm = period_matrix(basis, default_b_angles(g));
    double err = std::max(pm.symmetry_residual, pm.a_normalization_residual);
    bool good = pm.symmetry_residual <= o.tol && pm.min_imag_eigenvalue > 0;
    json rows = json::array();
    for (int i = 0; i < g.genus; ++i) {
        json row = json::array();
        for (int j = 0; j < g.genus; ++j) {
            row.push_back(jc(pm.tau(i, j)));
            rep.result("period[" + std::to_string(i) + "][" + std::to_string(j) + "]", pm.tau(i, j), err, good, n);
        }
        rows.push_back(row);
    }
    rep.data["period_matrix"] = {{"tau", rows},
                                 {"symmetry_residual", pm.symmetry_residual},
                                 {"a_normalization_residual", pm.a_normalization_residual},
                                 {"min_imag_eigenvalue", pm.min_imag_eigenvalue}};
    rep.check("period_symmetry", pm.symmetry_residual, 1e-6);
    rep.check("period_imag_positive", -pm.min_imag_eigenvalue, 0.0);
}

void f_product_cmd(Report& rep, const Options& o, const MarkedSchottkyGroup& g)
{
    FProductOptions fo;
    fo.delta_length = std::min(o.delta_length, o.max_word_length);
    auto f = f_product(g, o.max_word_length, fo);
    rep.result("F", f.value, f.error_estimate, !f.partial, f.classes_used, f.partial ? "class budget exhausted" : "");
    rep.result("log_F", f.log_value, f.error_estimate, !f.partial, f.classes_used);
    rep.data["delta_gate"] = f.delta_gate;
    rep.data["classes_used"] = f.classes_used;
    rep.data["partial"] = f.partial;
}

CoordinatePath path_from_json(const json& j, const std::vector<cplx>& base)
{
    auto sample = [&](const json& s) {
        auto v = from_pairs(s, "path sample");
        if (v.size() != base.size())
            throw Error(ErrorKind::path, "path sample has " + std::to_string(v.size()) + " coordinates, chart has " +
                                             std::to_string(base.size()));
        return v;
    };
    CoordinatePath p;
    const json& samples = j.is_array() ? j : (j.contains("samples") ? j["samples"] : json());
    if (!samples.is_null()) {
        for (auto& s : samples) p.samples.push_back(sample(s));
        return p;
    }
    if (!j.contains("to")) throw Error(ErrorKind::schema, "path needs \"samples\" or \"to\"");
    auto a = j.contains("from") ? sample(j["from"]) : base;
    auto b = sample(j["to"]);
    int pieces = j.value("pieces", 0);
    if (pieces > 0) return CoordinatePath::line(a, b, pieces);
    pieces = 1;
    p = CoordinatePath::line(a, b, pieces);
    while (p.max_relative_step() > 0.04 && pieces < 4096) p = CoordinatePath::line(a, b, pieces *= 2);
    return p;
}

void tau_path(Report& rep, const Options& o, const MarkedSchottkyGroup& g, const std::string& arg)
{
    std::string t = arg;
    auto first = t.find_first_not_of(" \t\n");
    bool inline_json = first != std::string::npos && (t[first] == '{' || t[first] == '[');
    json j = parse_json(inline_json ? t : read_text(arg), "path");
    auto params = normalized_parameters(g);
    std::vector<cplx> coeffs;
    if (j.is_object() && j.contains("coeffs"))
        coeffs = from_pairs(j["coeffs"], "coeffs");
    else if (g.genus == 1)
        coeffs = {1.0};
    else
        throw Error(ErrorKind::schema, "path needs \"coeffs\" (the form Phi) for genus >= 2");
    if (int(coeffs.size()) != g.genus) throw Error(ErrorKind::schema, "coeffs must have genus entries");
    params.insert(params.end(), coeffs.begin(), coeffs.end());
    CoordinateChart chart(normalized_family(g.genus), params, o.max_word_length);
    auto path = path_from_json(j, chart.base().point.coordinates);
    auto tv = integrate_tau(chart, path);
    bool closed = path.samples.front() == path.samples.back() && path.samples.size() > 1;
    rep.result("delta_log_tau", tv.log_tau, tv.error_estimate, tv.error_estimate <= 10 * o.tol, long(path.samples.size()));
    rep.result("tau24_ratio", tv.tau24, 24.0 * std::abs(tv.tau24) * tv.error_estimate, tv.error_estimate <= 10 * o.tol);
    if (closed) rep.check("holonomy_defect", holonomy_defect(tv.log_tau), 1e-3);
    if (g.genus == 1) {
        // coordinates (A, B) with B / A the modulus
        cplx t0 = path.samples.front()[1] / path.samples.front()[0];
        cplx t1 = path.samples.back()[1] / path.samples.back()[0];
        cplx want = genus1_tau(t1).log_tau - genus1_tau(t0).log_tau;
        rep.result("delta_log_eta2", want, 0.0, true);
        rep.check("ode_vs_closed_form", std::abs(tv.log_tau - want), 1e-5);
    }
    rep.data["base_coordinates"] = jc(chart.base().point.coordinates);
    rep.data["samples"] = long(path.samples.size());
    rep.data["max_relative_step"] = path.max_relative_step();
    rep.data["end_params"] = jc(tv.end_params);
    rep.data["closed"] = closed;
}

TwoPoleLambda parse_lambda(const std::string& arg, cplx q)
{
    TwoPoleLambda l{q, 1.0, 0.0, 1.0, 0.0};
    bool have_p2 = false;
    std::stringstream ss(arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::usage, "--lambda expects key=value items, got '" + item + "'");
        std::string k = item.substr(0, eq);
        cplx v = parse_complex(item.substr(eq + 1));
        if (k == "p1") l.p1 = v;
        else if (k == "p2") { l.p2 = v; have_p2 = true; }
        else if (k == "A") l.A = v;
        else if (k == "B") l.B = v;
        else throw Error(ErrorKind::usage, "--lambda: unknown key '" + k + "' (p1, p2, A, B)");
    }
    if (!have_p2) throw Error(ErrorKind::usage, "--lambda needs p2");
    return l;
}

cplx genus1_q(const MarkedSchottkyGroup& g)
{
    if (g.genus != 1) throw Error(ErrorKind::domain, "this subcommand needs a genus-1 group");
    return normalized_parameters(g)[0];
}

void hurwitz_cmd(Report& rep, const Options& o, const MarkedSchottkyGroup& g, const std::string& arg,
                 double compat_step)
{
    auto l = parse_lambda(arg, genus1_q(g));
    auto p = hurwitz_mode_point(l);
    BergmanSeries bs(l.group(), o.max_word_length);
    for (int i = 0; i < p.m(); ++i) {
        std::string k = std::to_string(i + 1);
        rep.result("lambda_" + k, p.critical_values[i], 0.0, true);
        rep.result("dlog_tau_" + k, hurwitz_dlog_tau(p, bs, i));
    }
    auto d = pole_residue_defects(l, 0.05);
    rep.data["lambda"] = {{"q", jc(l.q)}, {"p1", jc(l.p1)}, {"p2", jc(l.p2)}, {"A", jc(l.A)}, {"B", jc(l.B)}};
    rep.data["critical_points"] = jc(p.critical_points);
    rep.data["pole_residue_defects"] = d;
    if (compat_step > 0) {
        auto c = hurwitz_compatibility(l, compat_step, o.max_word_length);
        rep.result("compatibility_residual", c.max_residual, 0.0, true);
        rep.check("compatibility", c.max_residual, 1e-3);
        rep.data["compatibility_step"] = compat_step;
    }
}

void polyakov_cmd(Report& rep, const Options& o, const MarkedSchottkyGroup& g, const std::string& arg)
{
    cplx q = genus1_q(g);
    auto cfg = o.quadrature();
    FlatTorusMetric m(q);
    auto add = [&](const std::string& name, const PolyakovReport& r) {
        rep.result(name, r.value);
        json samples = json::array();
        for (auto& [d, v] : r.samples) samples.push_back({{"delta", d}, {"value", jc(v)}});
        rep.data[name] = {{"samples", samples}, {"halving", r.halving}, {"imaginary", r.imaginary}};
    };
    auto r = regularized_I(genus1_holomorphic_chart(q), m, cfg);
    add("I_holomorphic", r);
    rep.check("I_holomorphic_vanishes", std::abs(r.value.value), 1e-8);
    if (!arg.empty()) {
        auto l = parse_lambda(arg, q);
        add("I_lambda", regularized_I_meromorphic(genus1_lambda_chart(hurwitz_mode_point(l)), m, cfg));
    }
    rep.data["metric_constant"] = m.constant();
}

void cs_torus(Report& rep, const Options& o, cplx tau, int rotations)
{
    if (tau.imag() <= 0) throw Error(ErrorKind::domain, "tau must lie in the upper half-plane");
    auto m = SolidTorusModel::from_tau(tau, rotations);
    auto cs = cs_invariant(m, o.quadrature());
    rep.result("cs", cs.limit);
    rep.result("exp_4pi_cs", cs.exp4pi, 4 * pi * std::abs(cs.exp4pi) * cs.limit.error_estimate, cs.limit.converged);
    double w = w_volume(m, o.quadrature());
    rep.result("w_volume", w, 0.0, true);
    rep.check("re_cs_vs_w_over_pi2", std::abs(cs.value.real() - w / (pi * pi)), 1e-4);
    json samples = json::array();
    for (auto& s : cs.samples)
        samples.push_back({{"eps", s.eps},
                           {"value", jc(s.value)},
                           {"volume", s.volume},
                           {"outer", s.outer},
                           {"inner", s.inner},
                           {"im_bulk", s.im_bulk},
                           {"line", jc(s.line)},
                           {"w_volume", s.w_volume},
                           {"error_estimate", s.error_estimate}});
    rep.data["samples"] = samples;
    rep.data["im_mod_half"] = cs.im_mod_half;
    rep.data["q"] = jc(m.q());
    rep.data["eps_max"] = m.eps_max();
}

void write_csv(std::ostream& os, const Report& rep)
{
    os << "name,re,im,error,converged\n";
    os << std::setprecision(17);
    for (auto& r : rep.results)
        os << r["name"].get<std::string>() << ',' << r["value"][0].get<double>() << ',' << r["value"][1].get<double>()
           << ',' << r["error_estimate"].get<double>() << ',' << (r["converged"].get<bool>() ? "true" : "false") << '\n';
}

const char* kind_name(ErrorKind k)
{
    switch (k) {
    case ErrorKind::usage: return "usage";
    case ErrorKind::schema: return "schema";
    case ErrorKind::malformed_json: return "malformed_json";
    case ErrorKind::not_loxodromic: return "not_loxodromic";
    case ErrorKind::schottky_condition: return "schottky_condition";
    case ErrorKind::generator_count: return "generator_count";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::domain: return "domain";
    case ErrorKind::path: return "path";
    case ErrorKind::stratum: return "stratum";
    case ErrorKind::budget: return "budget";
    }
    return "unknown";
}

}  // namespace

cplx parse_complex(const std::string& s)
{
    auto bad = [&] { return Error(ErrorKind::usage, "bad complex literal '" + s + "' (expected a+bi)"); };
    if (s.empty() || s.find_first_of(" \t") != std::string::npos) throw bad();
    double re = 0, im = 0;
    if (s.back() != 'i') {
        if (!parse_real(s, re)) throw bad();
        return re;
    }
    std::string_view body(s.data(), s.size() - 1);
    // the imaginary part starts at the last sign that is not an exponent sign
    std::size_t k = std::string_view::npos;
    for (std::size_t i = body.size(); i-- > 1;)
        if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
            k = i;
            break;
        }
    std::string_view ip = body;
    if (k != std::string_view::npos) {
        if (!parse_real(body.substr(0, k), re)) throw bad();
        ip = body.substr(k);
    }
    if (ip.empty() || ip == "+")
        im = 1;
    else if (ip == "-")
        im = -1;
    else if (!parse_real(ip, im))
        throw bad();
    return {re, im};
}

std::string format_complex(cplx z)
{
    std::ostringstream os;
    os << std::setprecision(17) << z.real() << (std::signbit(z.imag()) ? '-' : '+') << std::abs(z.imag()) << 'i';
    return os.str();
}

MarkedSchottkyGroup parse_group(const json& doc)
{
    if (!doc.is_object()) throw Error(ErrorKind::schema, "group file must be a JSON object");
    if (!doc.contains("genus") || !doc["genus"].is_number_integer())
        throw Error(ErrorKind::schema, "group file needs an integer \"genus\"");
    if (!doc.contains("generators") || !doc["generators"].is_array())
        throw Error(ErrorKind::schema, "group file needs a \"generators\" list");
    int genus = doc["genus"].get<int>();
    const json& gens = doc["generators"];
    std::vector<MoebiusMap> maps;
    for (std::size_t r = 0; r < gens.size(); ++r) {
        std::string what = "generator " + std::to_string(r + 1);
        if (!gens[r].is_array() || gens[r].size() != 4) throw Error(ErrorKind::schema, what + " needs four entries");
        auto e = from_pairs(gens[r], what);
        if (e[0] * e[3] - e[1] * e[2] == 0.0) throw Error(ErrorKind::not_loxodromic, what + " is singular");
        maps.push_back(MoebiusMap(e[0], e[1], e[2], e[3]));
    }
    if (genus < 1 || int(maps.size()) != genus)
        throw Error(ErrorKind::generator_count, "genus " + std::to_string(genus) + " with " +
                                                    std::to_string(maps.size()) + " generators");
    std::vector<SchottkyCircle> circles;
    if (doc.contains("circles") && !doc["circles"].is_null()) {
        const json& cs = doc["circles"];
        if (!cs.is_array() || int(cs.size()) != 2 * genus)
            throw Error(ErrorKind::schema, "\"circles\" must list 2 * genus circles");
        for (auto& c : cs) {
            if (!c.is_object() || !c.contains("center") || !c.contains("radius") || !c["radius"].is_number())
                throw Error(ErrorKind::schema, "circle needs \"center\" and \"radius\"");
            SchottkyCircle sc;
            sc.center = from_pair(c["center"], "circle center");
            sc.radius = c["radius"].get<double>();
            sc.contains_infinity = c.value("contains_infinity", false);
            if (!(sc.radius > 0)) throw Error(ErrorKind::schema, "circle radius must be positive");
            circles.push_back(sc);
        }
    }
    bool normalize = false;
    if (doc.contains("normalize")) {
        if (!doc["normalize"].is_boolean()) throw Error(ErrorKind::schema, "\"normalize\" must be a boolean");
        normalize = doc["normalize"].get<bool>();
    }
    auto g = make_group(maps, circles);
    return normalize ? validate_and_normalize(g) : g;
}

MarkedSchottkyGroup parse_group_text(const std::string& text)
{
    return parse_group(parse_json(text, "group file"));
}

MarkedSchottkyGroup parse_group_file(const std::string& path)
{
    return parse_group_text(read_text(path));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Schottky tau functions, Polyakov and Chern-Simons checks", "sktau"};
    app.fallthrough();
    app.require_subcommand(1);
    Options o;
    app.add_option("--out", o.out, "write the report here instead of stdout");
    app.add_option("--csv", o.csv, "also write name,re,im,error,converged rows here");
    app.add_option("--threads", o.threads, "cap on worker threads (0: hardware)")->check(CLI::NonNegativeNumber);
    app.add_option("--max-word-length", o.max_word_length, "word length of group series")->check(CLI::Range(1, 30));
    app.add_option("--delta-length", o.delta_length, "word length for the exponent estimate")->check(CLI::Range(1, 30));
    app.add_option("--tol", o.tol, "target tolerance")->check(CLI::PositiveNumber);
    app.add_option("--delta", o.delta, "excision radius")->check(CLI::PositiveNumber);
    app.add_option("--limit-grid", o.grid, "grid for limit extrapolation (delta or eps)")->expected(2, 16);
    app.add_option("--seed", o.seed, "echoed into the report");
    app.add_flag("--acceptance", o.acceptance, "exit 1 unless every result converged and every check passed");

    std::string tau_s, to_s, file, path_s, lambda_s;
    int rotations = 0, class_length = 0;
    double compat_step = 0;

    auto* g1 = app.add_subcommand("genus1-verify", "eta identity, tau ODE and Chern-Simons at one modulus");
    g1->add_option("--tau", tau_s, "modulus a+bi")->required();
    g1->add_option("--to", to_s, "end of the tau ODE path (default tau+0.2+0.2i)");
    auto* si = app.add_subcommand("schottky-info", "exponent, primitive classes and periods");
    si->add_option("file", file, "group file")->required();
    si->add_option("--class-length", class_length, "word length for class enumeration (default: word length)");
    auto* fp = app.add_subcommand("f-product", "product over primitive classes");
    fp->add_option("file", file, "group file")->required();
    auto* tp = app.add_subcommand("tau-path", "integrate d log tau along a coordinate path");
    tp->add_option("file", file, "group file")->required();
    tp->add_option("--path", path_s, "path JSON, inline or a file")->required();
    auto* po = app.add_subcommand("polyakov", "regularized I for the flat torus");
    po->add_option("file", file, "genus-1 group file")->required();
    po->add_option("--lambda", lambda_s, "also for d lambda: p2=..,A=..,B=..[,p1=..]");
    auto* ct = app.add_subcommand("cs-torus", "Chern-Simons invariant of the solid torus");
    ct->add_option("--tau", tau_s, "modulus a+bi")->required();
    ct->add_option("--core-rotations", rotations, "turns of the core framing");
    auto* hu = app.add_subcommand("hurwitz", "tau derivatives in critical values of a two-pole function");
    hu->add_option("file", file, "genus-1 group file")->required();
    hu->add_option("--lambda", lambda_s, "p2=..,A=..,B=..[,p1=..]")->required();
    hu->add_option("--compat-step", compat_step, "also check closedness with this step")->check(CLI::NonNegativeNumber);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return static_cast<int>(ErrorKind::usage);
    }
    const CLI::App* sub = app.get_subcommands().front();

    auto t0 = std::chrono::steady_clock::now();
    Report rep;
    json echo = json::object();
    try {
        if (o.threads > 0) set_max_threads(o.threads);
        o.quadrature();
        if (sub == g1) {
            std::optional<cplx> to;
            if (!to_s.empty()) to = parse_complex(to_s);
            echo = {{"tau", tau_s}, {"to", to_s}};
            genus1_verify(rep, o, parse_complex(tau_s), to);
        } else if (sub == si) {
            echo = {{"file", file}, {"class_length", class_length}};
            schottky_info(rep, o, load_group(file), class_length);
        } else if (sub == fp) {
            echo = {{"file", file}};
            f_product_cmd(rep, o, load_group(file));
        } else if (sub == tp) {
            echo = {{"file", file}, {"path", path_s}};
            tau_path(rep, o, load_group(file), path_s);
        } else if (sub == po) {
            echo = {{"file", file}, {"lambda", lambda_s}};
            polyakov_cmd(rep, o, load_group(file), lambda_s);
        } else if (sub == ct) {
            echo = {{"tau", tau_s}, {"core_rotations", rotations}};
            cs_torus(rep, o, parse_complex(tau_s), rotations);
        } else if (sub == hu) {
            echo = {{"file", file}, {"lambda", lambda_s}, {"compat_step", compat_step}};
            hurwitz_cmd(rep, o, load_group(file), lambda_s, compat_step);
        }
    } catch (const Error& e) {
        err << json{{"error", kind_name(e.kind())}, {"code", e.exit_code()}, {"message", e.what()}}.dump() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        err << json{{"error", "numerical"}, {"code", 7}, {"message", e.what()}}.dump() << "\n";
        return static_cast<int>(ErrorKind::numerical);
    }
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json report = {{"command", sub->get_name()},
                   {"version", SKTAU_VERSION},
                   {"args", echo},
                   {"config",
                    {{"max_word_length", o.max_word_length},
                     {"delta_length", o.delta_length},
                     {"target_tolerance", o.tol},
                     {"excision_radius", o.delta},
                     {"limit_grid", o.grid},
                     {"threads", o.threads},
                     {"seed", o.seed}}},
                   {"results", rep.results},
                   {"checks", rep.checks},
                   {"data", rep.data},
                   {"ok", rep.ok()},
                   {"wall_time_s", wall}};
    std::string text = report.dump(2) + "\n";
    if (o.out.empty()) {
        out << text;
    } else {
        std::ofstream f(o.out);
        if (!f) {
            err << "cannot write " << o.out << "\n";
            return static_cast<int>(ErrorKind::usage);
        }
        f << text;
    }
    if (!o.csv.empty()) {
        std::ofstream f(o.csv);
        if (!f) {
            err << "cannot write " << o.csv << "\n";
            return static_cast<int>(ErrorKind::usage);
        }
        write_csv(f, rep);
    }
    if (o.acceptance && !rep.ok()) return 1;
    return 0;
}

}  // namespace sktau::cli
