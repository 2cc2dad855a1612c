#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "sktau/cli.hpp"

using namespace sktau;
using sktau::cli::json;

namespace {

std::string data(const std::string& name) { return std::string(SKTAU_TEST_DATA) + "/" + name; }

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args)
{
    std::ostringstream o, e;
    int c = cli::run(args, o, e);
    return {c, o.str(), e.str()};
}

int error_code(const std::string& file)
{
    try {
        cli::parse_group_file(data(file));
    } catch (const Error& e) {
        return e.exit_code();
    }
    return 0;
}

// same keys, strings and flags; numbers to a relative 1e-9
void same_shape(const json& a, const json& b, const std::string& where)
{
    INFO(where);
    REQUIRE(a.type() == b.type());
    if (a.is_object()) {
        REQUIRE(a.size() == b.size());
        auto ib = b.begin();
        for (auto ia = a.begin(); ia != a.end(); ++ia, ++ib) {
            REQUIRE(ia.key() == ib.key());
            if (ia.key() == "wall_time_s") continue;
            same_shape(ia.value(), ib.value(), where + "." + ia.key());
        }
    } else if (a.is_array()) {
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) same_shape(a[i], b[i], where + "[" + std::to_string(i) + "]");
    } else if (a.is_number_float()) {
        double x = a.get<double>(), y = b.get<double>();
        CHECK(std::abs(x - y) <= 1e-9 * std::max(1.0, std::abs(y)));
    } else {
        CHECK(a == b);
    }
}

}  // namespace

TEST_CASE("complex literals")
{
    CHECK(cli::parse_complex("0.1+0.9i") == cplx(0.1, 0.9));
    CHECK(cli::parse_complex("-0.25+2i") == cplx(-0.25, 2));
    CHECK(cli::parse_complex("1.5") == cplx(1.5, 0));
    CHECK(cli::parse_complex("-2i") == cplx(0, -2));
    CHECK(cli::parse_complex("i") == cplx(0, 1));
    CHECK(cli::parse_complex("-i") == cplx(0, -1));
    CHECK(cli::parse_complex("3-i") == cplx(3, -1));
    CHECK(cli::parse_complex("1e-3-2e-2i") == cplx(1e-3, -2e-2));
    CHECK(cli::parse_complex("+1E+2+1e-1i") == cplx(100, 0.1));
    for (std::string bad : {"", "0.1 + 0.9i", "abc", "1+", "0.1+0.9j", "1+-2i", "infi", "1..2"}) {
        INFO(bad);
        CHECK_THROWS_AS(cli::parse_complex(bad), Error);
    }
    for (cplx z : {cplx(0.1, 0.9), cplx(-1.0 / 3, -2e-7), cplx(5, 0)})
        CHECK(cli::parse_complex(cli::format_complex(z)) == z);
}

TEST_CASE("group files")
{
    auto g = cli::parse_group_file(data("genus1.json"));
    CHECK(g.genus == 1);
    CHECK(g.normalized);
    CHECK(std::abs(loxodromic_data(g.generators[0]).multiplier - cplx(0.3, 0.1)) <= 1e-14);
    auto g2 = cli::parse_group_file(data("genus2.json"));
    CHECK(g2.genus == 2);
    CHECK(std::abs(loxodromic_data(g2.generators[1]).multiplier - std::polar(0.03, 0.4)) <= 1e-12);

    CHECK(error_code("missing_generators.json") == 2);
    CHECK(error_code("malformed.json") == 3);
    CHECK(error_code("parabolic.json") == 4);
    CHECK(error_code("genus2_overlap.json") == 5);
    CHECK(error_code("genus2_miscount.json") == 6);
    CHECK(error_code("no_such_file.json") == 1);
    CHECK_THROWS_AS(cli::parse_group_text(R"({"genus":1,"generators":[[[1,0],[0,0]]]})"), Error);
    CHECK_THROWS_AS(cli::parse_group_text(R"({"genus":"one","generators":[]})"), Error);
}

TEST_CASE("usage errors")
{
    CHECK(run({"bogus"}).code == 1);
    CHECK(run({}).code == 1);
    CHECK(run({"genus1-verify"}).code == 1);
    CHECK(run({"genus1-verify", "--tau", "0.1 + 0.9i"}).code == 1);
    CHECK(run({"cs-torus", "--tau", "0.1-0.9i"}).code == 8);
    CHECK(run({"--help"}).code == 0);
    auto r = run({"schottky-info", data("genus2_overlap.json")});
    CHECK(r.code == 5);
    CHECK(json::parse(r.err)["error"] == "schottky_condition");
}

TEST_CASE("genus1-verify golden report")
{
    auto r = run({"genus1-verify", "--tau", "0.1+0.9i"});
    REQUIRE(r.code == 0);
    auto rep = json::parse(r.out);
    std::ifstream in(std::string(SKTAU_TEST_GOLDEN) + "/genus1_verify.json");
    REQUIRE(in);
    json golden = json::parse(in);
    same_shape(rep, golden, "report");
    for (auto& c : rep["checks"])
        if (c["name"] == "identity_residual") CHECK(c["value"].get<double>() <= 1e-10);
    CHECK(rep["ok"] == true);

    // determinism: a second run differs only in the wall time
    auto again = json::parse(run({"genus1-verify", "--tau", "0.1+0.9i"}).out);
    rep.erase("wall_time_s");
    again.erase("wall_time_s");
    CHECK(rep.dump() == again.dump());
}

TEST_CASE("report schema")
{
    auto r = run({"schottky-info", data("genus1.json"), "--max-word-length", "6"});
    REQUIRE(r.code == 0);
    auto rep = json::parse(r.out);
    for (auto k : {"command", "version", "args", "config", "results", "checks", "data", "ok", "wall_time_s"})
        CHECK(rep.contains(k));
    auto& cfg = rep["config"];
    CHECK(cfg["max_word_length"] == 6);
    CHECK(cfg["target_tolerance"] == 1e-6);
    CHECK(cfg["excision_radius"] == 1e-2);
    CHECK(cfg["limit_grid"] == json::array({0.1, 0.05, 0.025}));
    for (auto& res : rep["results"])
        for (auto k : {"name", "value", "error_estimate", "converged", "terms_used", "diagnostic"}) CHECK(res.contains(k));
    // tau = log q / (2 pi i)
    cplx want = std::log(cplx(0.3, 0.1)) / (2 * pi * I);
    bool found = false;
    for (auto& res : rep["results"])
        if (res["name"] == "tau") {
            found = true;
            CHECK(std::abs(cplx(res["value"][0], res["value"][1]) - want) <= 1e-10);
        }
    CHECK(found);
    auto d = json::parse(run({"schottky-info", data("genus1.json")}).out);
    CHECK(d["config"]["max_word_length"] == 10);
}

TEST_CASE("out and csv files")
{
    std::string out = "cli_test_report.json", csv = "cli_test_report.csv";
    auto r = run({"cs-torus", "--tau", "0.1+1.2i", "--out", out, "--csv", csv, "--threads", "1"});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    std::ifstream jf(out), cf(csv);
    REQUIRE(jf);
    REQUIRE(cf);
    auto rep = json::parse(jf);
    CHECK(rep["config"]["threads"] == 1);
    std::string line;
    std::getline(cf, line);
    CHECK(line == "name,re,im,error,converged");
    int rows = 0;
    while (std::getline(cf, line)) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 4);
    }
    CHECK(rows == int(rep["results"].size()));
    auto cs = rep["results"][0];
    CHECK(cs["name"] == "cs");
    CHECK(std::abs(cplx(cs["value"][0], cs["value"][1]) - cplx(-1.2, 0.1)) <= 5e-3);
    std::remove(out.c_str());
    std::remove(csv.c_str());
}

TEST_CASE("acceptance mode")
{
    // the d lambda run does not reach 1e-6 but does reach 1e-5
    std::vector<std::string> a{"polyakov", data("genus1.json"), "--lambda", "p2=-0.6+0.9i", "--acceptance"};
    auto strict = run(a);
    auto loose = a;
    loose.insert(loose.end(), {"--tol", "1e-5"});
    auto rl = run(loose);
    CHECK(rl.code == 0);
    CHECK(strict.code == 1);
    CHECK(json::parse(strict.out)["ok"] == false);
    CHECK(json::parse(rl.out)["ok"] == true);
}

TEST_CASE("tau-path")
{
    auto r = run({"tau-path", data("genus1.json"), "--path", R"({"to":[[1,0],[0.1,0.25]]})"});
    REQUIRE(r.code == 0);
    auto rep = json::parse(r.out);
    bool found = false;
    for (auto& c : rep["checks"])
        if (c["name"] == "ode_vs_closed_form") {
            found = true;
            CHECK(c["pass"] == true);
        }
    CHECK(found);
    // steps above 5% are refused
    auto bad = run({"tau-path", data("genus1.json"), "--path", R"({"to":[[1,0],[0.1,0.25]],"pieces":1})"});
    CHECK(bad.code == 9);
    CHECK(run({"tau-path", data("genus1.json"), "--path", "{\"to\":"}).code == 3);
    CHECK(run({"tau-path", data("genus2.json"), "--path", R"({"to":[[1,0]]})"}).code == 2);
}

TEST_CASE("hurwitz and f-product")
{
    auto h = run({"hurwitz", data("genus1.json"), "--lambda", "p2=-0.6+0.9i,A=1,B=0"});
    REQUIRE(h.code == 0);
    auto rep = json::parse(h.out);
    CHECK(rep["data"]["critical_points"].size() == 4);
    CHECK(run({"hurwitz", data("genus1.json"), "--lambda", "A=1"}).code == 1);
    CHECK(run({"hurwitz", data("genus2.json"), "--lambda", "p2=-0.6+0.9i"}).code == 8);

    auto f = run({"f-product", data("genus2.json"), "--max-word-length", "6"});
    REQUIRE(f.code == 0);
    auto fr = json::parse(f.out)["results"][0];
    CHECK(fr["name"] == "F");
    CHECK(fr["converged"] == true);
}
