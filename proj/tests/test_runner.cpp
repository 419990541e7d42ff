#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kpz/runner.hpp"

using namespace kpz;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::path(output_root()) / "runner-test" / name;
    fs::remove_all(p);
    return p;
}

RunConfig parse(const std::string& sub, const std::string& text) {
    std::istringstream is(text);
    RunConfig c = parse_config(is);
    c.subcommand = sub;
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

int run_in(const RunConfig& c, const fs::path& dir) {
    RunOptions o;
    o.out_dir = dir.string();
    std::ostringstream log;
    return run(c, o, log);
}

}  // namespace

TEST_CASE("sha256 of a known file") {
    const fs::path p = scratch("abc.txt");
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << "abc";
    CHECK(sha256_file(p.string()) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK_THROWS(sha256_file((p.parent_path() / "missing").string()));
}

TEST_CASE("simulate is reproducible and writes a manifest") {
    const RunConfig c =
        parse("simulate", "[run]\nseed = 9\n[model]\ncoupling = zero\n[simulate]\neps = 0.25\nT = 0.05\n");
    const fs::path a = scratch("sim-a"), b = scratch("sim-b");
    REQUIRE(run_in(c, a) == kExitOk);
    REQUIRE(run_in(c, b) == kExitOk);
    int files = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        if (e.path().filename() == "manifest.json") continue;
        ++files;
        CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
    }
    CHECK(files > 0);

    const auto m = nlohmann::json::parse(slurp(a / "manifest.json"));
    CHECK(m["subcommand"] == "simulate");
    CHECK(m["status"] == 0);
    CHECK(m["seed"] == 9);
    CHECK(m["versions"].contains("fftw"));
    REQUIRE(m["files"].size() == static_cast<std::size_t>(files));
    for (const auto& f : m["files"])
        CHECK(f["sha256"] == sha256_file((a / f["path"].get<std::string>()).string()));

    // an existing output directory is a configuration error
    CHECK(run_in(c, a) == kExitConfig);
}

TEST_CASE("invalid config exits with the config code") {
    const RunConfig c = parse("simulate", "[simulate]\ncounterterm = sometimes\n");
    const fs::path d = scratch("bad");
    CHECK(run_in(c, d) == kExitConfig);
    CHECK_FALSE(fs::exists(d));
}

TEST_CASE("verify and renorm outputs") {
    const fs::path v = scratch("verify");
    CHECK(run_in(parse("verify", "[verify]\nbatteries = lemma-heatkernel\n"), v) == kExitOk);
    CHECK(fs::exists(v / "battery-lemma-heatkernel.csv"));

    const fs::path r = scratch("renorm");
    REQUIRE(run_in(parse("renorm", "[model]\ncoupling = all-ones\n[renorm]\neps_list = 0.25 0.125 0.0625\n"), r) ==
            kExitOk);
    std::istringstream is(slurp(r / "renorm.csv"));
    std::string line;
    std::getline(is, line);
    CHECK(line == "component,m1,m2,m3");
    int rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        std::istringstream ls(line);
        std::string comp, m1, m2;
        std::getline(ls, comp, ',');
        std::getline(ls, m1, ',');
        std::getline(ls, m2, ',');
        CHECK(std::stod(m2) == 0.0);
    }
    CHECK(rows == 3);
}
