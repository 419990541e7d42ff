#include <doctest.h>

#include <sstream>

#include "kpz/config.hpp"

using namespace kpz;

namespace {

RunConfig parse(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

// message of the ConfigError raised by validate(), empty when valid
std::string error_of(const std::string& text) {
    try {
        validate(parse(text));
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("defaults and typed fields") {
    const RunConfig c = parse("[run]\nsubcommand = rg-flow\nseed = 42\n[rg-flow]\nN = 2\nfeedback = false\n"
                              "dt = 0.0078125\n");
    CHECK(c.subcommand == "rg-flow");
    CHECK(c.seed == 42);
    CHECK(c.N == 2);
    CHECK_FALSE(c.feedback);
    CHECK(c.rg_dt == 0.0078125);
    CHECK(c.coupling == "identity");
    CHECK(c.M(0, 1, 1) == 1.0);
    CHECK_NOTHROW(validate(c));
}

TEST_CASE("lists and custom coupling") {
    const RunConfig c = parse("[model]\ncoupling = custom\nM1 = 1 2 0; 2 1 0; 0 0 1\nM2 = 0 0 0; 0 0 0; 0 0 0\n"
                              "M3 = 1 0 0; 0 1 0; 0 0 1\n[convergence]\neps_list = 0.5 0.25\nmodes = off\n");
    CHECK(c.M(0, 0, 1) == 2.0);
    CHECK(c.M(1, 2, 2) == 0.0);
    CHECK(c.conv_eps == std::vector<double>{0.5, 0.25});
    CHECK(c.conv_modes == std::vector<std::string>{"off"});
}

TEST_CASE("rejected input") {
    CHECK_THROWS_AS(parse("[run]\nbogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("[nowhere]\nseed = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("[run]\nseed = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse("[model]\ncoupling = custom\nM1 = 1 0 0; 0 1 0; 0 0 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("[model]\ncoupling = custom\nM1 = 1 2 0; 0 1 0; 0 0 1\nM2 = 0 0 0; 0 0 0; 0 0 0\n"
                          "M3 = 0 0 0; 0 0 0; 0 0 0\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse("[model]\nM1 = 1 0 0; 0 1 0; 0 0 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("[model]\ncoupling = weird\n"), ConfigError);
    CHECK_THROWS_AS(parse("[rg-flow]\nfeedback = maybe\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.ini"), ConfigError);
}

TEST_CASE("validation names the offending key") {
    CHECK(error_of("[run]\nsubcommand = frobnicate\n").find("run.subcommand") == 0);
    CHECK(error_of("[run]\nsubcommand = renorm\n[renorm]\neps_list = 0.5 0.25\n").find("renorm.eps_list") == 0);
    CHECK(error_of("[run]\nsubcommand = renorm\n[renorm]\neps_list = 0.25 0.5 0.125\n").find("renorm.eps_list") ==
          0);
    CHECK(error_of("[run]\nsubcommand = simulate\n[simulate]\neps = 0.125\ndt = 0.01\n").find("simulate.dt") == 0);
    CHECK(error_of("[run]\nsubcommand = simulate\n[simulate]\ncounterterm = half\n").find("simulate.counterterm") ==
          0);
    CHECK(error_of("[run]\nsubcommand = rg-flow\n[rg-flow]\nN = 3\nnx = 4\n").find("rg-flow.nx") == 0);
    CHECK(error_of("[run]\nsubcommand = verify\n[verify]\nbatteries = lemma-nope\n").find("verify.batteries") == 0);
    CHECK(error_of("[run]\nsubcommand = verify\n[model]\ncutoff = boxcar\n").find("model.cutoff") == 0);
    CHECK(error_of("[run]\nsubcommand = verify\n").empty());
}

TEST_CASE("echo lists every section") {
    const std::string e = parse("[run]\nsubcommand = simulate\n[simulate]\nT = 0.5\n").echo();
    for (const char* key : {"run.subcommand = simulate", "simulate.T = 0.5", "model.M1 = ", "renorm.eps_list = ",
                            "convergence.modes = ", "rg-flow.feedback = ", "verify.batteries = "})
        CHECK(e.find(key) != std::string::npos);
    CHECK(subcommand_names().size() == 5);
}
