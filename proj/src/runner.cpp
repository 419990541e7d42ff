#include "kpz/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include <boost/version.hpp>
#include <fftw3.h>
#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "kpz/batteries.hpp"
#include "kpz/mc.hpp"
#include "kpz/norms.hpp"
#include "kpz/quadrature.hpp"
#include "kpz/renorm.hpp"
#include "kpz/rgflow.hpp"
#include "kpz/solver.hpp"

namespace kpz {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class VerificationFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Output {
    fs::path dir;
    std::vector<std::string> files;

    std::ofstream open(const std::string& name, bool binary = false) {
        files.push_back(name);
        std::ofstream os(dir / name, binary ? std::ios::binary : std::ios::out);
        if (!os) throw std::runtime_error(fmt::format("cannot write {}", (dir / name).string()));
        return os;
    }
};

CountertermMode mode_from_name(const std::string& s) {
    if (s == "full") return CountertermMode::Full;
    if (s == "m1-only") return CountertermMode::M1Only;
    return CountertermMode::Off;
}

bool is_zero(const CouplingTensor& M) {
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c)
                if (M(a, b, c) != 0.0) return false;
    return true;
}

RenormConstants constants_for(const RunConfig& cfg, const Cutoff& chi, bool need_m3) {
    if (!need_m3 || is_zero(cfg.M)) {
        RenormConstants rc;
        rc.chi_id = chi.id();
        rc.m1 = compute_m1(chi, cfg.M);
        rc.m2 = compute_m2(cfg.M);
        return rc;
    }
    return compute_constants(chi, cfg.M, cfg.renorm_eps);
}

void run_renorm(const RunConfig& cfg, Output& out, std::ostream& log) {
    const Cutoff chi = Cutoff::by_name(cfg.cutoff);
    const RenormConstants rc = compute_constants(chi, cfg.M, cfg.renorm_eps);
    {
        auto os = out.open("renorm.csv");
        os << "component,m1,m2,m3\n";
        for (int a = 0; a < 3; ++a)
            os << fmt::format("{},{:.12e},{:.12e},{:.12e}\n", a, rc.m1[a], rc.m2[a], rc.m3[a]);
    }
    {
        auto os = out.open("nu.csv");
        os << "eps,nu0,nu1,nu2,I1,I2,error\n";
        for (const auto& e : rc.nu_table)
            os << fmt::format("{:.10e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.3e}\n", e.eps, e.nu[0],
                              e.nu[1], e.nu[2], e.I1, e.I2, e.error);
    }
    {
        auto os = out.open("nu.dat");
        os << "# 1/log(1/eps) nu0 nu1 nu2\n";
        for (const auto& e : rc.nu_table)
            os << fmt::format("{:.10e} {:.10e} {:.10e} {:.10e}\n", 1.0 / std::log(1.0 / e.eps), e.nu[0],
                              e.nu[1], e.nu[2]);
    }
    {
        auto os = out.open("mu.csv");
        os << "eps,mu,mu_over_log\n";
        for (double e : cfg.renorm_eps) {
            const double mu = compute_mu_eps(chi, e).value;
            os << fmt::format("{:.10e},{:.12e},{:.12e}\n", e, mu, mu / std::log(1.0 / e));
        }
    }
    log << fmt::format("m1 = ({:.6g}, {:.6g}, {:.6g}); m3 residual {:.3g}\n", rc.m1[0], rc.m1[1], rc.m1[2],
                       rc.m3_extrapolation_residual);
}

void run_simulate(const RunConfig& cfg, Output& out, std::ostream& log) {
    const Cutoff chi = Cutoff::by_name(cfg.cutoff);
    const CountertermMode mode = mode_from_name(cfg.counterterm);
    const RenormConstants rc = constants_for(cfg, chi, mode == CountertermMode::Full);
    Resolution res = default_resolution(cfg.eps);
    if (cfg.nx) res.nx = cfg.nx;
    if (cfg.dt > 0.0) res.dt = cfg.dt;
    SolveOptions opt;
    opt.mode = mode;
    opt.snapshot_every = cfg.snapshot_every;
    const Trajectory tr = solve(cfg.eps, cfg.T, cfg.seed, cfg.M, rc, chi, res, opt);
    if (tr.blowup) throw NumericalFailure(fmt::format("solution blew up at t = {}", tr.blowup_time));
    {
        auto os = out.open("trajectory.csv");
        write_trajectory_csv(tr, os);
    }
    {
        auto os = out.open("trajectory.bin", true);
        write_trajectory_binary(tr, os);
    }
    {
        auto os = out.open("mean.dat");
        os << "# t mean_u1 mean_u2 mean_u3\n";
        for (const auto& s : tr.snapshots)
            os << fmt::format("{:.10e} {:.10e} {:.10e} {:.10e}\n", s.time, s.c[0][0].real() / s.nx,
                              s.c[1][0].real() / s.nx, s.c[2][0].real() / s.nx);
    }
    {
        // Time average of |u_k|^2 over the snapshots after the first.
        auto os = out.open("modes.csv");
        os << "k,var0,var1,var2\n";
        const int nk = tr.nx / 2;
        const std::size_t count = tr.snapshots.size() > 1 ? tr.snapshots.size() - 1 : 1;
        for (int k = 1; k < nk; ++k) {
            Vec3 v{};
            for (std::size_t i = 1; i < tr.snapshots.size(); ++i)
                for (int a = 0; a < 3; ++a) v[a] += std::norm(tr.snapshots[i].c[a][k] / double(tr.nx));
            os << fmt::format("{},{:.10e},{:.10e},{:.10e}\n", k, v[0] / count, v[1] / count, v[2] / count);
        }
    }
    log << fmt::format("simulated {} steps on nx = {}, {} snapshots\n", std::lround(cfg.T / res.dt), res.nx,
                       tr.snapshots.size());
}

void run_convergence(const RunConfig& cfg, Output& out, std::ostream& log) {
    std::vector<CountertermMode> modes;
    bool need_m3 = false;
    for (const auto& m : cfg.conv_modes) {
        modes.push_back(mode_from_name(m));
        need_m3 = need_m3 || modes.back() == CountertermMode::Full;
    }
    std::vector<std::string> cutoffs{cfg.cutoff};
    if (cfg.compare_cutoffs) cutoffs.push_back(cfg.cutoff_prime);
    std::vector<ConvergenceReport> reports;
    for (const auto& name : cutoffs) {
        const Cutoff chi = Cutoff::by_name(name);
        const RenormConstants rc = constants_for(cfg, chi, need_m3);
        reports.push_back(convergence_study(cfg.conv_eps, cfg.seed, cfg.M, chi, cfg.conv_T, rc, modes));
    }
    {
        auto os = out.open("convergence.csv");
        os << "cutoff,mode,eps,mean0,mean1,mean2,blowup,diff\n";
        for (std::size_t c = 0; c < reports.size(); ++c)
            for (const auto& cur : reports[c].curves)
                for (std::size_t i = 0; i < cur.eps.size(); ++i) {
                    os << fmt::format("{},{},{:.10e},{:.12e},{:.12e},{:.12e},{},", cutoffs[c],
                                      counterterm_mode_name(cur.mode), cur.eps[i], cur.mean[i][0],
                                      cur.mean[i][1], cur.mean[i][2], cur.blowup[i] ? 1 : 0);
                    if (i > 0) os << fmt::format("{:.12e}", cur.diff[i - 1]);
                    os << '\n';
                }
    }
    {
        auto os = out.open("envelope.csv");
        os << "mode,cutoff_gap,envelope\n";
        if (reports.size() == 2)
            for (std::size_t k = 0; k < modes.size(); ++k) {
                const auto& a = reports[0].curves[k];
                const auto& b = reports[1].curves[k];
                const double gap = vn_norm(a.finest - b.finest, reports[0].frame_dt, reports[0].frame_period).value;
                os << fmt::format("{},{:.12e},{:.12e}\n", counterterm_mode_name(a.mode), gap,
                                  envelope_tail(a.diff) + envelope_tail(b.diff));
            }
    }
    log << fmt::format("convergence over {} eps values, {} cutoffs\n", cfg.conv_eps.size(), cutoffs.size());
}

void run_rg_flow(const RunConfig& cfg, Output& out, std::ostream& log) {
    const Cutoff chi = Cutoff::by_name(cfg.cutoff);
    const RenormConstants rc = constants_for(cfg, chi, true);
    RGConfig rg;
    rg.N = cfg.N;
    rg.m = cfg.m;
    rg.L = cfg.L;
    rg.nx = cfg.rg_nx;
    rg.nt = cfg.rg_nt;
    rg.dt = cfg.rg_dt;
    rg.tol = cfg.tol;
    rg.max_iter = cfg.max_iter;
    rg.gamma = cfg.gamma;
    rg.feedback = cfg.feedback;
    const double eps = std::pow(cfg.L, -cfg.N);
    const NoiseRealization noise = sample_white_noise(cfg.seed, {cfg.rg_nx / 2 - 1, cfg.rg_dt, cfg.rg_nt});
    const RGTower tower(rg, chi, cfg.M, counterterm(rc, eps), &noise);
    const Vec3 c3 = log_constant(rc, std::log(1.0 / eps));
    {
        auto os = out.open("flow.csv");
        write_flow_csv(flow_report(tower, rc.m1, c3), os);
    }
    {
        auto os = out.open("steps.csv");
        os << "n,field,residual,iterations\n";
        for (int n = cfg.N - 1; n >= cfg.m; --n) {
            const auto chk = tower.check_step(n, tower.test_fields(n, cfg.test_fields, cfg.seed + n));
            for (std::size_t i = 0; i < chk.residuals.size(); ++i)
                os << fmt::format("{},{},{:.6e},{}\n", n, i, chk.residuals[i], chk.iterations[i]);
        }
    }
    {
        const SpaceTimeField f = tower.reconstruct();
        const ScaleFrame fr = tower.frame(cfg.m);
        auto os = out.open("reconstruction.csv");
        os << "quantity,n,value\n";
        const auto amps = tower.reconstruction_amplitudes();
        for (std::size_t i = 0; i < amps.size(); ++i)
            os << fmt::format("sup_phi,{},{:.12e}\n", cfg.m + static_cast<int>(i), amps[i]);
        os << fmt::format("vn_norm_f,{},{:.12e}\n", cfg.m, vn_norm(f, fr.frame_dt(), fr.period()).value);
    }
    log << fmt::format("rg-flow N = {}, m = {} on {} x {}\n", cfg.N, cfg.m, cfg.rg_nt, cfg.rg_nx);
}

void run_verify(const RunConfig& cfg, int jobs, Output& out, std::ostream& log) {
    const Cutoff chi = Cutoff::by_name(cfg.cutoff), chi_p = Cutoff::by_name(cfg.cutoff_prime);
    BatteryOptions opt;
    opt.seed = cfg.seed;
    opt.jobs = jobs;
    opt.quick = cfg.quick;
    std::vector<std::string> failed;
    for (const auto& name : cfg.batteries) {
        const BatteryReport r = run_battery(name, chi, chi_p, cfg.M, opt);
        auto os = out.open(fmt::format("battery-{}.csv", name));
        r.write_csv(os);
        for (const auto& c : r.checks)
            log << fmt::format("[{}] {}: {} ({})\n", c.pass ? "pass" : "FAIL", name, c.name, c.detail);
        if (!r.pass()) failed.push_back(name);
    }
    if (!failed.empty()) {
        std::string s;
        for (const auto& f : failed) s += (s.empty() ? "" : ", ") + f;
        throw VerificationFailure("failed batteries: " + s);
    }
}

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

}  // namespace

std::string output_root() {
    const char* v = std::getenv("KPZ_OUTPUT_ROOT");
    return v && *v ? v : "runs";
}

int jobs_from_env(int fallback) {
    const char* v = std::getenv("KPZ_JOBS");
    if (!v || !*v) return fallback;
    try {
        const int j = std::stoi(v);
        if (j < 1) throw ConfigError("KPZ_JOBS must be >= 1");
        return j;
    } catch (const std::logic_error&) {
        throw ConfigError(fmt::format("KPZ_JOBS: cannot parse '{}'", v));
    }
}

std::string sha256_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    std::vector<char> buf(1 << 16);
    while (is) {
        is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (is.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(is.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return hex;
}

int run(RunConfig cfg, const RunOptions& opt, std::ostream& log) {
    int jobs = 1;
    fs::path dir;
    try {
        if (opt.seed) cfg.seed = *opt.seed;
        jobs = opt.jobs ? *opt.jobs : jobs_from_env(cfg.jobs);
        if (jobs < 1) throw ConfigError("--jobs must be >= 1");
        validate(cfg);
        dir = opt.out_dir ? fs::path(*opt.out_dir)
                          : fs::path(output_root()) / fmt::format("{}-seed{}", cfg.subcommand, cfg.seed);
        if (fs::exists(dir)) throw ConfigError(fmt::format("output directory {} already exists", dir.string()));
        if (dir.has_parent_path()) fs::create_directories(dir.parent_path());
        fs::create_directory(dir);
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const fs::filesystem_error& e) {
        log << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    Output out{dir, {}};
    const auto t0 = std::chrono::steady_clock::now();
    const std::string started = utc_now();
    int status = kExitOk;
    std::string message = "ok";
    try {
        if (cfg.subcommand == "renorm") run_renorm(cfg, out, log);
        else if (cfg.subcommand == "simulate") run_simulate(cfg, out, log);
        else if (cfg.subcommand == "convergence") run_convergence(cfg, out, log);
        else if (cfg.subcommand == "rg-flow") run_rg_flow(cfg, out, log);
        else run_verify(cfg, jobs, out, log);
    } catch (const VerificationFailure& e) {
        status = kExitVerification;
        message = e.what();
    } catch (const std::exception& e) {
        status = kExitNumerical;
        message = fmt::format("{} failed: {}", cfg.subcommand, e.what());
    }
    if (status != kExitOk) log << message << '\n';
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    nlohmann::ordered_json m;
    m["subcommand"] = cfg.subcommand;
    m["status"] = status;
    m["message"] = message;
    m["seed"] = cfg.seed;
    m["jobs"] = jobs;
    m["config"] = cfg.echo();
    m["started_utc"] = started;
    m["wall_clock_seconds"] = wall;
    m["versions"] = {{"artifact", kVersion},
                     {"compiler", std::string(__VERSION__)},
                     {"fftw", std::string(fftw_version)},
                     {"boost", std::string(BOOST_LIB_VERSION)}};
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const auto& f : out.files) {
        const fs::path p = dir / f;
        files.push_back({{"path", f}, {"bytes", fs::file_size(p)}, {"sha256", sha256_file(p.string())}});
    }
    m["files"] = files;
    std::ofstream(dir / "manifest.json") << m.dump(2) << '\n';
    return status;
}

}  // namespace kpz
