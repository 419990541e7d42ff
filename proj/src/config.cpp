#include "kpz/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "kpz/batteries.hpp"
#include "kpz/cutoff.hpp"

namespace kpz {

namespace pt = boost::property_tree;

namespace {

const std::set<std::string> kKeys{
    "run.subcommand",      "run.seed",          "run.jobs",
    "model.coupling",      "model.M1",          "model.M2",
    "model.M3",            "model.cutoff",      "model.cutoff_prime",
    "model.L",             "renorm.eps_list",   "simulate.eps",
    "simulate.T",          "simulate.nx",       "simulate.dt",
    "simulate.snapshot_every", "simulate.counterterm", "convergence.eps_list",
    "convergence.T",       "convergence.modes", "convergence.compare_cutoffs",
    "rg-flow.N",           "rg-flow.m",         "rg-flow.nx",
    "rg-flow.nt",          "rg-flow.dt",        "rg-flow.tol",
    "rg-flow.max_iter",    "rg-flow.gamma",     "rg-flow.feedback",
    "rg-flow.test_fields", "verify.batteries",  "verify.quick",
};

template <class T>
T parse_number(const std::string& key, const std::string& text) {
    const std::string s = boost::trim_copy(text);
    T v{};
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw ConfigError(fmt::format("{}: cannot parse '{}' as a number", key, text));
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    const std::string s = boost::to_lower_copy(boost::trim_copy(text));
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError(fmt::format("{}: expected true or false, got '{}'", key, text));
}

std::vector<std::string> words(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    for (std::string w; is >> w;) out.push_back(w);
    return out;
}

std::vector<double> number_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    for (const auto& w : words(text)) out.push_back(parse_number<double>(key, w));
    if (out.empty()) throw ConfigError(fmt::format("{}: empty list", key));
    return out;
}

std::string join_numbers(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += fmt::format("{}{}", i ? " " : "", v[i]);
    return s;
}

std::string matrix_text(const Mat3& m) {
    return fmt::format("{} {} {}; {} {} {}; {} {} {}", m[0][0], m[0][1], m[0][2], m[1][0], m[1][1],
                       m[1][2], m[2][0], m[2][1], m[2][2]);
}

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(fmt::format("{}: {}", key, what));
}

bool strictly_decreasing(const std::vector<double>& v) {
    return std::adjacent_find(v.begin(), v.end(), std::less_equal<>{}) == v.end();
}

}  // namespace

std::vector<std::string> subcommand_names() { return {"renorm", "simulate", "convergence", "rg-flow", "verify"}; }

RunConfig parse_config(std::istream& is) {
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(fmt::format("malformed config at line {}: {}", e.line(), e.message()));
    }
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError(fmt::format("key '{}' outside a section", section));
        for (const auto& [key, _] : body)
            if (!kKeys.count(section + "." + key))
                throw ConfigError(fmt::format("unknown key '{}.{}'", section, key));
    }
    auto get = [&](const std::string& path) { return tree.get_optional<std::string>(pt::ptree::path_type(path, '/')); };

    RunConfig c;
    if (auto v = get("run/subcommand")) c.subcommand = boost::trim_copy(*v);
    if (auto v = get("run/seed")) c.seed = parse_number<std::uint64_t>("run.seed", *v);
    if (auto v = get("run/jobs")) c.jobs = parse_number<int>("run.jobs", *v);

    if (auto v = get("model/coupling")) c.coupling = boost::trim_copy(*v);
    if (c.coupling == "identity") {
        c.M = CouplingTensor::identity();
    } else if (c.coupling == "all-ones") {
        c.M = CouplingTensor::all_ones();
    } else if (c.coupling == "zero") {
        c.M = CouplingTensor::zero();
    } else if (c.coupling == "custom") {
        std::array<Mat3, 3> m{};
        for (int a = 0; a < 3; ++a) {
            const std::string key = fmt::format("model.M{}", a + 1);
            const auto v = get(fmt::format("model/M{}", a + 1));
            require(v.has_value(), key, "required when coupling = custom");
            try {
                m[a] = CouplingTensor::parse_matrix(*v);
            } catch (const std::exception& e) {
                throw ConfigError(fmt::format("{}: {}", key, e.what()));
            }
        }
        try {
            c.M = CouplingTensor(m);
        } catch (const std::exception& e) {
            throw ConfigError(fmt::format("model.M: {}", e.what()));
        }
    } else {
        throw ConfigError(fmt::format("model.coupling: unknown coupling '{}'", c.coupling));
    }
    if (c.coupling != "custom")
        for (int a = 1; a <= 3; ++a)
            require(!get(fmt::format("model/M{}", a)), fmt::format("model.M{}", a),
                    "only allowed with coupling = custom");
    if (auto v = get("model/cutoff")) c.cutoff = boost::trim_copy(*v);
    if (auto v = get("model/cutoff_prime")) c.cutoff_prime = boost::trim_copy(*v);
    if (auto v = get("model/L")) c.L = parse_number<double>("model.L", *v);

    if (auto v = get("renorm/eps_list")) c.renorm_eps = number_list("renorm.eps_list", *v);

    if (auto v = get("simulate/eps")) c.eps = parse_number<double>("simulate.eps", *v);
    if (auto v = get("simulate/T")) c.T = parse_number<double>("simulate.T", *v);
    if (auto v = get("simulate/nx")) c.nx = parse_number<int>("simulate.nx", *v);
    if (auto v = get("simulate/dt")) c.dt = parse_number<double>("simulate.dt", *v);
    if (auto v = get("simulate/snapshot_every")) c.snapshot_every = parse_number<int>("simulate.snapshot_every", *v);
    if (auto v = get("simulate/counterterm")) c.counterterm = boost::trim_copy(*v);

    if (auto v = get("convergence/eps_list")) c.conv_eps = number_list("convergence.eps_list", *v);
    if (auto v = get("convergence/T")) c.conv_T = parse_number<double>("convergence.T", *v);
    if (auto v = get("convergence/modes")) c.conv_modes = words(*v);
    if (auto v = get("convergence/compare_cutoffs")) c.compare_cutoffs = parse_bool("convergence.compare_cutoffs", *v);

    if (auto v = get("rg-flow/N")) c.N = parse_number<int>("rg-flow.N", *v);
    if (auto v = get("rg-flow/m")) c.m = parse_number<int>("rg-flow.m", *v);
    if (auto v = get("rg-flow/nx")) c.rg_nx = parse_number<int>("rg-flow.nx", *v);
    if (auto v = get("rg-flow/nt")) c.rg_nt = parse_number<int>("rg-flow.nt", *v);
    if (auto v = get("rg-flow/dt")) c.rg_dt = parse_number<double>("rg-flow.dt", *v);
    if (auto v = get("rg-flow/tol")) c.tol = parse_number<double>("rg-flow.tol", *v);
    if (auto v = get("rg-flow/max_iter")) c.max_iter = parse_number<int>("rg-flow.max_iter", *v);
    if (auto v = get("rg-flow/gamma")) c.gamma = parse_number<double>("rg-flow.gamma", *v);
    if (auto v = get("rg-flow/feedback")) c.feedback = parse_bool("rg-flow.feedback", *v);
    if (auto v = get("rg-flow/test_fields")) c.test_fields = parse_number<int>("rg-flow.test_fields", *v);

    if (auto v = get("verify/batteries")) c.batteries = words(*v);
    if (auto v = get("verify/quick")) c.quick = parse_bool("verify.quick", *v);
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError(fmt::format("cannot open config '{}'", path));
    return parse_config(is);
}

void validate(const RunConfig& c) {
    const auto subs = subcommand_names();
    require(std::find(subs.begin(), subs.end(), c.subcommand) != subs.end(), "run.subcommand",
            fmt::format("unknown subcommand '{}'", c.subcommand));
    require(c.jobs >= 1, "run.jobs", "must be >= 1");
    for (const auto& [key, name] : {std::pair{"model.cutoff", c.cutoff}, {"model.cutoff_prime", c.cutoff_prime}}) {
        try {
            Cutoff::by_name(name);
        } catch (const std::exception& e) {
            throw ConfigError(fmt::format("{}: {}", key, e.what()));
        }
    }
    require(c.L >= 2.0 && std::floor(c.L) == c.L, "model.L", "must be an integer >= 2");

    auto eps_ok = [](double e) { return e > 0.0 && e <= 1.0; };
    if (c.subcommand == "renorm") {
        require(c.renorm_eps.size() >= 3, "renorm.eps_list", "needs at least three values");
        require(std::all_of(c.renorm_eps.begin(), c.renorm_eps.end(), eps_ok), "renorm.eps_list",
                "values must lie in (0, 1]");
        require(strictly_decreasing(c.renorm_eps), "renorm.eps_list", "must be strictly decreasing");
    } else if (c.subcommand == "simulate") {
        require(eps_ok(c.eps), "simulate.eps", "must lie in (0, 1]");
        require(c.T > 0.0, "simulate.T", "must be positive");
        require(c.nx == 0 || (c.nx >= 4 && c.nx % 2 == 0), "simulate.nx", "must be 0 or even >= 4");
        require(c.dt >= 0.0, "simulate.dt", "must be non-negative");
        require(c.dt == 0.0 || c.dt <= c.eps * c.eps / 8.0 * (1.0 + 1e-12), "simulate.dt",
                "must resolve the cutoff time scale (dt <= eps^2/8)");
        require(c.snapshot_every >= 1, "simulate.snapshot_every", "must be >= 1");
        require(c.counterterm == "full" || c.counterterm == "m1-only" || c.counterterm == "off",
                "simulate.counterterm", "must be full, m1-only or off");
    } else if (c.subcommand == "convergence") {
        require(c.conv_eps.size() >= 2, "convergence.eps_list", "needs at least two values");
        require(std::all_of(c.conv_eps.begin(), c.conv_eps.end(), eps_ok), "convergence.eps_list",
                "values must lie in (0, 1]");
        require(strictly_decreasing(c.conv_eps), "convergence.eps_list", "must be strictly decreasing");
        require(c.conv_T > 0.0, "convergence.T", "must be positive");
        require(!c.conv_modes.empty(), "convergence.modes", "empty list");
        for (const auto& m : c.conv_modes)
            require(m == "full" || m == "m1-only" || m == "off", "convergence.modes",
                    fmt::format("unknown mode '{}'", m));
    } else if (c.subcommand == "rg-flow") {
        require(c.m >= 0 && c.m <= c.N, "rg-flow.m", "needs 0 <= m <= N");
        require(c.N >= 1, "rg-flow.N", "must be >= 1");
        require(c.rg_nx >= 4 && c.rg_nx % 2 == 0, "rg-flow.nx", "must be even >= 4");
        require(std::pow(c.L, c.N) <= c.rg_nx, "rg-flow.nx", "must be >= L^N");
        require(c.rg_nt >= 2, "rg-flow.nt", "must be >= 2");
        require(c.rg_dt > 0.0 && std::pow(c.L, 2 * c.N) * c.rg_dt <= 0.125 * (1.0 + 1e-12), "rg-flow.dt",
                "must satisfy L^{2N} dt <= 1/8");
        require(c.tol > 0.0 && c.tol < 1.0, "rg-flow.tol", "must lie in (0, 1)");
        require(c.max_iter >= 1, "rg-flow.max_iter", "must be >= 1");
        require(c.gamma > 0.0 && c.gamma < 0.25, "rg-flow.gamma", "must lie in (0, 1/4)");
        require(c.test_fields >= 0, "rg-flow.test_fields", "must be >= 0");
    } else if (c.subcommand == "verify") {
        require(!c.batteries.empty(), "verify.batteries", "empty list");
        const auto names = battery_names();
        for (const auto& b : c.batteries)
            require(std::find(names.begin(), names.end(), b) != names.end(), "verify.batteries",
                    fmt::format("unknown battery '{}'", b));
    }
}

std::string RunConfig::echo() const {
    std::string s;
    auto line = [&s](const std::string& k, const std::string& v) { s += k + " = " + v + "\n"; };
    line("run.subcommand", subcommand);
    line("run.seed", std::to_string(seed));
    line("model.coupling", coupling);
    for (int a = 0; a < 3; ++a) line(fmt::format("model.M{}", a + 1), matrix_text(M.matrix(a)));
    line("model.cutoff", cutoff);
    line("model.cutoff_prime", cutoff_prime);
    line("model.L", fmt::format("{}", L));
    line("renorm.eps_list", join_numbers(renorm_eps));
    line("simulate.eps", fmt::format("{}", eps));
    line("simulate.T", fmt::format("{}", T));
    line("simulate.nx", std::to_string(nx));
    line("simulate.dt", fmt::format("{}", dt));
    line("simulate.snapshot_every", std::to_string(snapshot_every));
    line("simulate.counterterm", counterterm);
    line("convergence.eps_list", join_numbers(conv_eps));
    line("convergence.T", fmt::format("{}", conv_T));
    line("convergence.modes", boost::join(conv_modes, " "));
    line("convergence.compare_cutoffs", compare_cutoffs ? "true" : "false");
    line("rg-flow.N", std::to_string(N));
    line("rg-flow.m", std::to_string(m));
    line("rg-flow.nx", std::to_string(rg_nx));
    line("rg-flow.nt", std::to_string(rg_nt));
    line("rg-flow.dt", fmt::format("{}", rg_dt));
    line("rg-flow.tol", fmt::format("{}", tol));
    line("rg-flow.max_iter", std::to_string(max_iter));
    line("rg-flow.gamma", fmt::format("{}", gamma));
    line("rg-flow.feedback", feedback ? "true" : "false");
    line("rg-flow.test_fields", std::to_string(test_fields));
    line("verify.batteries", boost::join(batteries, " "));
    line("verify.quick", quick ? "true" : "false");
    return s;
}

}  // namespace kpz
