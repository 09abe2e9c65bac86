#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlheat/cli.hpp"
#include "nlheat/special.hpp"

using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = nlheat::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> v;
    std::stringstream ss(s);
    std::string l;
    while (std::getline(ss, l)) v.push_back(l);
    return v;
}

std::vector<double> fields(const std::string& line) {
    std::vector<double> v;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) v.push_back(std::strtod(f.c_str(), nullptr));
    return v;
}

// the installed binary, run through the shell
Result run_binary(const std::string& args) {
    const std::string cmd = std::string(NLHEAT_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
    const int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out, ""};
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("perimeter") {
    const auto r = run({"perimeter", "--body", "interval:0,1", "--measure", "stable:0.5"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["per_nu"].get<double>() == doctest::Approx(8 * nlheat::special::stable_constant(1, 0.5)).epsilon(1e-13));
    CHECK(j["alpha_perimeter"].get<double>() == doctest::Approx(8.0).epsilon(1e-13));
    CHECK(j["method"] == "closed_form");
    CHECK(j["provenance"].get<std::string>().find("alpha (1 - alpha)") != std::string::npos);
    CHECK(j["perimeter"].get<double>() == doctest::Approx(2.0).epsilon(1e-13));
    // divergent exponent is reported, not an error
    const auto d = run({"perimeter", "--body", "ball:2,1", "--measure", "stable:1.2,2"});
    REQUIRE(d.code == 0);
    CHECK(json::parse(d.out)["divergent"] == true);
}

TEST_CASE("density: series and inversion agree") {
    const auto r = run({"density", "--alpha", "0.5", "--d", "1", "--x", "5"});
    REQUIRE(r.code == 0);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 2);
    CHECK(ls[0] == "x,series_value,fourier_value,abs_diff");
    const auto v = fields(ls[1]);
    CHECK(v[0] == 5.0);
    CHECK(std::abs(v[1] - v[2]) < 1e-8 * v[1]);
    const auto g = run({"density", "--alpha", "1.5", "--beta", "0.5", "--xgrid", "5,50,4"});
    REQUIRE(g.code == 0);
    CHECK(lines(g.out).size() == 5);
    const auto two = run({"density", "--alpha", "0.7", "--d", "2", "--x", "1,3"});
    REQUIRE(two.code == 0);
    for (std::size_t i = 1; i < 3; ++i) {
        const auto w = fields(lines(two.out)[i]);
        CHECK(std::abs(w[1] - w[2]) < 1e-8 * w[1]);
    }
}

TEST_CASE("heat-content CSV") {
    const auto r = run({"heat-content", "--body", "interval:0,1", "--alpha", "0.5", "--tgrid", "1e-2,0.5,4"});
    REQUIRE(r.code == 0);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 5);
    CHECK(ls[0] == "t,H,H_over_t,stderr,method");
    const auto first = fields(ls[1]);
    CHECK(first[0] == doctest::Approx(1.25e-3));  // ascending t
    CHECK(first[2] == doctest::Approx(first[1] / first[0]).epsilon(1e-15));
    CHECK(ls[1].substr(ls[1].rfind(',') + 1) == "quadrature");
    // 17 significant digits
    const std::string H = ls[1].substr(ls[1].find(',') + 1);
    CHECK(H.substr(0, H.find(',')).size() >= 17);
}

TEST_CASE("expansion JSON") {
    const auto r = run({"expansion", "--body", "interval:0,1", "--alpha", "0.5", "--depth", "2"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    REQUIRE(j["terms"].size() == 2);
    CHECK(j["terms"][1]["log_power"] == 1);
    CHECK(j["terms"][1]["coefficient"].get<double>() == doctest::Approx(-2 / M_PI).epsilon(1e-12));
    CHECK(j["terms"][1]["provenance"] == "log-term");
    CHECK(j["terms"][0]["order"] == "1");
    const auto c = run({"expansion", "--measure", "atoms:0.3:2", "--depth", "3"});
    REQUIRE(c.code == 0);
    CHECK(json::parse(c.out)["terms"][0]["coefficient"].get<double>() == doctest::Approx(0.6));
    const auto p = run({"expansion", "--alpha", "1.5", "--beta", "0", "--depth", "2"});
    REQUIRE(p.code == 0);
    CHECK(json::parse(p.out)["terms"][0]["provenance"] == "mean-abs");
}

TEST_CASE("verify and its exit codes") {
    SUBCASE("log term passes") {
        const auto r = run({"verify", "--limit", "log-term", "--alpha", "0.5", "--body", "interval:0,1", "--tgrid",
                            "1e-2,0.5,14"});
        REQUIRE(r.code == 0);
        const auto j = json::parse(r.out);
        CHECK(j["verdict"] == "PASS");
        CHECK(j["extrapolated"].get<double>() == doctest::Approx(-2 / M_PI).epsilon(0.10));
        CHECK(j["table"].size() == 14);
    }
    SUBCASE("FAIL is exit 1") {
        const auto r = run({"verify", "--limit", "first-order", "--alpha", "0.5", "--engine", "exact_1d",
                            "--corrections", "0", "--tgrid", "0.2,0.5,3", "--tol", "0.12"});
        CHECK(json::parse(r.out)["verdict"] == "FAIL");
        CHECK(r.code == 1);
    }
    SUBCASE("INCONCLUSIVE is exit 4") {
        const auto r = run({"verify", "--limit", "power-term", "--alpha", "0.4", "--engine", "exact_1d", "--tgrid",
                            "1e-12,0.5,6"});
        CHECK(json::parse(r.out)["verdict"] == "INCONCLUSIVE");
        CHECK(r.code == 4);
    }
    SUBCASE("residual CSV") {
        const std::string path = "cli_test_residuals.csv";
        const auto r = run({"verify", "--limit", "perimeter-series", "--n", "2", "--alpha", "0.4", "--engine",
                            "exact_1d", "--tgrid", "1e-3,0.5,6", "--csv", path});
        CHECK(r.code == 0);
        const auto ls = lines(slurp(path));
        REQUIRE(ls.size() == 7);
        CHECK(ls[0] == "t,H,residual,normalized");
        std::remove(path.c_str());
    }
}

TEST_CASE("configuration errors are exit 2") {
    CHECK(run({}).code == 2);
    CHECK(run({"integrate"}).code == 2);
    CHECK(run({"perimeter", "--body", "interval:0,1"}).code == 2);  // --measure missing
    CHECK(run({"perimeter", "--measure", "stable:0.5", "--colour", "red"}).code == 2);
    CHECK(run({"perimeter", "--body", "interval:1,0", "--measure", "stable:0.5"}).code == 2);
    CHECK(run({"perimeter", "--body", "{\"shape\":\"interval\",\"a\":0,\"b\":1,\"x\":1}", "--measure", "stable:0.5"})
              .code == 2);
    CHECK(run({"heat-content", "--alpha", "0.5", "--tgrid", "1,1,3"}).code == 2);
    CHECK(run({"heat-content", "--alpha", "2.5", "--tgrid", "1e-2,0.5,3"}).code == 2);
    CHECK(run({"heat-content", "--alpha", "0.5", "--tgrid", "1e-2,0.5,3", "--method", "magic"}).code == 2);
    CHECK(run({"verify", "--limit", "limit-4", "--alpha", "0.5", "--tgrid", "1e-2,0.5,3"}).code == 2);
    CHECK(run({"density", "--alpha", "0.5"}).code == 2);
    const auto r = run({"sample", "--alpha", "0.5", "--t", "-1"});
    CHECK(r.code == 2);
    CHECK(r.err.find("config error") != std::string::npos);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("config file, with flags taking precedence") {
    const std::string path = "cli_test_config.json";
    {
        std::ofstream f(path);
        f << R"({"subcommand": "heat-content", "body": "interval:0,2", "alpha": 0.5, "tgrid": "1e-2,0.5,2"})";
    }
    const auto a = run({"--config", path});
    REQUIRE(a.code == 0);
    CHECK(lines(a.out).size() == 3);
    const auto b = run({"heat-content", "--config", path, "--tgrid", "1e-2,0.5,3"});
    REQUIRE(b.code == 0);
    CHECK(lines(b.out).size() == 4);
    CHECK(lines(b.out)[2] == lines(a.out)[1]);  // same body and alpha as the config
    std::remove(path.c_str());
    CHECK(run({"--config", "missing.json"}).code == 2);
}

TEST_CASE("sample and determinism") {
    const std::vector<std::string> args{"sample", "--alpha", "1.5", "--beta", "0.3", "--samples", "1000", "--seed", "7"};
    const auto a = run(args), b = run(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(lines(a.out).size() == 1001);
    CHECK(lines(a.out)[0] == "x");
    auto c = args;
    c.back() = "8";
    CHECK(run(c).out != a.out);
    const auto d2 = run({"sample", "--alpha", "0.5", "--d", "2", "--samples", "3"});
    CHECK(lines(d2.out)[0] == "x1,x2");
    // Monte Carlo heat content: identical for identical seed, whatever the thread count
    std::vector<std::string> mc{"heat-content", "--body", "box:1,1", "--alpha", "0.8", "--d", "2", "--tgrid",
                                "1e-2,0.1,2",   "--method", "mc", "--samples", "20000", "--seed", "3"};
    auto t1 = mc, t2 = mc;
    t1.insert(t1.begin(), {"--threads", "1"});
    t2.insert(t2.begin(), {"--threads", "2"});
    const auto m1 = run(t1), m2 = run(t2);
    REQUIRE(m1.code == 0);
    CHECK(m1.out == m2.out);
}

TEST_CASE("the binary") {
    const auto r = run_binary("perimeter --body interval:0,1 --measure stable:0.5");
    CHECK(r.code == 0);
    CHECK(json::parse(r.out)["alpha_perimeter"].get<double>() == doctest::Approx(8.0).epsilon(1e-13));
    CHECK(run_binary("perimeter --body interval:0,1 --measure stable:0.5").out == r.out);
    CHECK(run_binary("bogus").code == 2);
    CHECK(run_binary("verify --limit power-term --alpha 0.4 --engine exact_1d --tgrid 1e-12,0.5,6").code == 4);
    const auto h = run_binary("heat-content --alpha 0.5 --tgrid 1e-2,0.5,3 --output cli_test_out.csv");
    CHECK(h.code == 0);
    CHECK(h.out.empty());
    CHECK(slurp("cli_test_out.csv") == run({"heat-content", "--alpha", "0.5", "--tgrid", "1e-2,0.5,3"}).out);
    std::remove("cli_test_out.csv");
    // NONLOCAL_HEAT_THREADS is honoured and does not change results
    const auto e1 = run_binary("heat-content --alpha 0.5 --tgrid 1e-2,0.5,3");
    setenv("NONLOCAL_HEAT_THREADS", "1", 1);
    const auto e2 = run_binary("heat-content --alpha 0.5 --tgrid 1e-2,0.5,3");
    unsetenv("NONLOCAL_HEAT_THREADS");
    CHECK(e1.out == e2.out);
}
