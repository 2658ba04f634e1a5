#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sys/wait.h>

#include "padicl/cli.hpp"

using namespace padicl;
using namespace padicl::cli;

namespace {

std::string fixture(const std::string& name) { return std::string(PADICL_SOURCE_DIR) + "/fixtures/" + name; }

std::filesystem::path scratch() {
    auto d = std::filesystem::temp_directory_path() / "padicl_cli_test";
    std::filesystem::create_directories(d);
    return d;
}

std::string write_temp(const std::string& name, const std::string& text) {
    auto path = scratch() / name;
    std::ofstream(path) << text;
    return path.string();
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(PADICL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string config_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

const std::string kLegendre3 = R"(
field: {p: 3, q: 3}
curve:
  a2: [-1, 0, -1]
  a4: [0, 0, 1]
)";

}  // namespace

TEST(Config, ErrorsCarryTheFieldPath) {
    EXPECT_NE(config_error("field: {q: 4}").find("field.p"), std::string::npos);
    EXPECT_NE(config_error("field: {p: 3, q: 5}").find("field.p"), std::string::npos);
    EXPECT_NE(config_error("field: {q: 6}").find("field.q"), std::string::npos);
    EXPECT_NE(config_error("curve: {a4: [1]}").find("field"), std::string::npos);
    EXPECT_NE(config_error("field: {q: 3}\ncurve: {a2: [x]}").find("curve.a2[0]"), std::string::npos);
    EXPECT_NE(config_error(kLegendre3 + "tower: {kind: cyclotomic, place: [1, 1, 1]}").find("tower.place"), std::string::npos);
    EXPECT_NE(config_error(kLegendre3 + "tower: {kind: cyclotomic, place: [0, 2]}").find("monic"), std::string::npos);
    EXPECT_NE(config_error(kLegendre3 + "tower: {kind: wrong}").find("tower.kind"), std::string::npos);
    EXPECT_NE(config_error("field: {q: 3}\nschema: other/2").find("schema"), std::string::npos);
    EXPECT_NE(config_error("field: {q: 3}\nprecision: {N: 2}\ntower: {kind: constant, n_max: 2}").find("precision.N"), std::string::npos);
}

TEST(Config, SupersingularPlaceInS) {
    std::string e = config_error(kLegendre3 + "tower: {kind: cyclotomic, place: [1, 0, 1]}");
    EXPECT_NE(e.find("supersingular"), std::string::npos) << e;
    EXPECT_EQ(run_cli("build --config " + fixture("supersingular_in_S.yaml")), 2);
}

TEST(Config, ReadsTowerKinds) {
    auto c = parse_config(kLegendre3 + R"(
tower:
  kind: product
  factors:
    - {kind: cyclotomic, place: [2, 1]}
    - {kind: custom, d: 1, generators: [{key: unit, place: [0, 1], image: [1]}]}
  n_max: 1
specialize:
  - [[1, 0]]
)");
    EXPECT_EQ(c.tower.spec.d, 2);
    EXPECT_EQ(c.tower.spec.S.size(), 2u);
    ASSERT_EQ(c.specialize.size(), 1u);
    EXPECT_EQ(c.specialize[0], (IntMatrix{{1, 0}}));
}

TEST(Run, ClassicalFeNeedsNoCurve) {
    auto c = load_config(fixture("classical_f3.yaml"));
    EXPECT_FALSE(c.curve.has_value());
    Runner R(c);
    auto rep = R.run("classical-fe", {"classical-fe"});
    ASSERT_EQ(rep.checks.size(), 1u);
    EXPECT_EQ(rep.checks[0].status, "pass") << rep.checks[0].detail;
    EXPECT_GT(rep.checks[0].measured["characters"].get<int>(), 0);
    EXPECT_EQ(exit_code(rep), 0);
}

TEST(Run, ConstantCurveFixture) {
    Runner R(load_config(fixture("constant_curve.yaml")));
    auto rep = R.run("run", R.config().checks);
    for (auto& c : rep.checks) EXPECT_EQ(c.status, "pass") << c.name << ": " << c.detail;
    EXPECT_EQ(exit_code(rep), 0);
    bool saw_l = false, saw_fe = false;
    for (auto& c : rep.checks) {
        if (c.name == "lvalue") {
            EXPECT_EQ(c.measured["values"][0]["L"], "5/81");
            saw_l = true;
        }
        if (c.name == "fe") {
            EXPECT_EQ(c.measured["epsilon"], 1);
            saw_fe = true;
        }
    }
    EXPECT_TRUE(saw_l && saw_fe);
}

TEST(Run, EmptyCheckListGivesHeaderOnly) {
    Runner R(load_config(fixture("constant_curve.yaml")));
    auto rep = R.run("run", {});
    auto j = report_json(rep);
    EXPECT_EQ(j["schema"], kReportSchema);
    EXPECT_TRUE(j["checks"].empty());
    EXPECT_TRUE(j["elements"].empty());
    EXPECT_EQ(j["header"]["p"], 5);
    EXPECT_EQ(exit_code(rep), 0);
}

TEST(Run, WrongExpectationIsACheckFailure) {
    auto c = load_config(fixture("constant_curve_base.yaml"));
    c.expect_lvalue = Rational(1, 81);
    Runner R(c);
    auto rep = R.run("lvalue", {"lvalue"});
    EXPECT_EQ(rep.checks[0].status, "fail");
    EXPECT_EQ(exit_code(rep), 1);
}

TEST(Serialization, RoundtripIsBitExact) {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 100; ++t) {
        GroupShape s{(rng() % 2) ? 3 : 5, (int)(rng() % 3), (int)(rng() % 3)};
        int N = 4 + (int)(rng() % 8);
        std::vector<i64> c((size_t)s.size());
        for (auto& x : c) x = (i64)(rng() % 100000) - 50000;
        auto f = GroupRingElt::from_coeffs(s, c, (int)(rng() % 3), N);
        auto text = element_json("f", f).dump();
        auto g = element_from_json(json::parse(text));
        ASSERT_EQ(g.numerators(), f.numerators());
        ASSERT_EQ(g.aleph(), f.aleph());
        ASSERT_EQ(g.digits(), f.digits());
        ASSERT_TRUE(g.shape() == f.shape());
    }
}

TEST(Serialization, BuiltElementsRoundtrip) {
    Runner R(load_config(fixture("legendre_f3.yaml")));
    auto rep = R.run("build", {"build"}, 2);
    ASSERT_EQ(rep.elements.size(), 2u);
    auto hat = element_from_json(json::parse(rep.elements[0].dump()));
    TowerContext ctx(*R.config().curve, R.config().tower.spec, R.config().bsd);
    EXPECT_TRUE(hat.equals(ctx.hat(2).value));
    EXPECT_EQ(rep.elements[0]["header"]["n"], 2);
}

TEST(Binary, DeterministicOutput) {
    auto a = (scratch() / "a.json").string(), b = (scratch() / "b.json").string();
    ASSERT_EQ(run_cli("run --config " + fixture("legendre_f3.yaml") + " --out " + a), 0);
    ASSERT_EQ(run_cli("run --config " + fixture("legendre_f3.yaml") + " --out " + b), 0);
    std::string x = slurp(a);
    EXPECT_FALSE(x.empty());
    EXPECT_EQ(x, slurp(b));
    auto j = json::parse(x);
    EXPECT_EQ(j["schema"], kReportSchema);
}

TEST(Binary, ExitCodes) {
    EXPECT_EQ(run_cli("places --config " + fixture("legendre_f3.yaml")), 0);
    EXPECT_EQ(run_cli("check fe --config " + fixture("legendre_f3.yaml") + " --level 1"), 0);
    // usage errors
    EXPECT_EQ(run_cli("places"), 2);
    EXPECT_EQ(run_cli("frobnicate --config " + fixture("legendre_f3.yaml")), 2);
    EXPECT_EQ(run_cli("places --config /nonexistent.yaml"), 2);
    // level 1 cannot carry power series of degree 3
    EXPECT_EQ(run_cli("iwasawa order --config " + fixture("legendre_f3.yaml") + " --level 1"), 3);
    auto bad = write_temp("wrong_l.yaml", slurp(fixture("constant_curve_base.yaml")) + "\n");
    std::string text = slurp(bad);
    text.replace(text.find("lvalue: 5/81"), 12, "lvalue: 1/81");
    std::ofstream(bad) << text;
    EXPECT_EQ(run_cli("lvalue --config " + bad), 1);
}

TEST(Binary, TextFormat) {
    auto out = (scratch() / "r.txt").string();
    ASSERT_EQ(run_cli("lvalue --config " + fixture("constant_curve_base.yaml") + " --format text --out " + out), 0);
    std::string t = slurp(out);
    EXPECT_NE(t.find("lvalue (level 0): pass"), std::string::npos) << t;
    EXPECT_NE(t.find("5/81"), std::string::npos);
}
