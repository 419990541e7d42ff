#include "kpz/noise.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

#include "kpz/kernels.hpp"

namespace kpz {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::pair<double, double> gaussian_pair(std::uint64_t seed, std::uint64_t stream, std::uint64_t a,
                                        std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ stream);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    h = mix64(h ^ c);
    const std::uint64_t h2 = mix64(h ^ 0x5851f42d4c957f2dULL);
    // 53-bit uniforms, u1 in (0,1]
    const double u1 = (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(h2 >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(th), r * std::sin(th)};
}

cplx NoiseRealization::at(int step, int comp, int k) const {
    if (k == 0 || std::abs(k) > k_max) return {};
    const cplx v = inc[(static_cast<std::size_t>(step) * 3 + comp) * k_max + (std::abs(k) - 1)];
    return k > 0 ? v : std::conj(v);
}

namespace {

constexpr char kMagic[8] = {'K', 'P', 'Z', 'N', 'O', 'I', 'S', '1'};

template <class T>
void put(std::ostream& os, T v) {
    static_assert(sizeof(T) == 8);
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
    os.write(reinterpret_cast<const char*>(&u), 8);
}

template <class T>
T get(std::istream& is) {
    std::uint64_t u;
    if (!is.read(reinterpret_cast<char*>(&u), 8)) throw std::runtime_error("truncated noise record");
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
    T v;
    std::memcpy(&v, &u, 8);
    return v;
}

}  // namespace

void NoiseRealization::write_binary(std::ostream& os) const {
    os.write(kMagic, 8);
    put<std::uint64_t>(os, seed);
    put<std::uint64_t>(os, static_cast<std::uint64_t>(k_max));
    put<double>(os, dt);
    put<double>(os, t_max());
    put<std::uint64_t>(os, static_cast<std::uint64_t>(n_steps));
    for (const cplx& z : inc) {
        put<double>(os, z.real());
        put<double>(os, z.imag());
    }
}

NoiseRealization NoiseRealization::read_binary(std::istream& is) {
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("not a noise record");
    NoiseRealization r;
    r.seed = get<std::uint64_t>(is);
    r.k_max = static_cast<int>(get<std::uint64_t>(is));
    r.dt = get<double>(is);
    get<double>(is);
    r.n_steps = static_cast<int>(get<std::uint64_t>(is));
    r.inc.resize(static_cast<std::size_t>(r.n_steps) * 3 * r.k_max);
    for (cplx& z : r.inc) {
        const double re = get<double>(is);
        const double im = get<double>(is);
        z = {re, im};
    }
    return r;
}

NoiseRealization sample_white_noise(std::uint64_t seed, const NoiseGrid& grid) {
    if (grid.k_max < 1 || !(grid.dt > 0.0) || grid.n_steps < 0)
        throw std::invalid_argument("noise grid needs k_max >= 1, dt > 0");
    NoiseRealization r;
    r.seed = seed;
    r.k_max = grid.k_max;
    r.dt = grid.dt;
    r.n_steps = grid.n_steps;
    r.inc.resize(static_cast<std::size_t>(grid.n_steps) * 3 * grid.k_max);
    const double s = std::sqrt(0.5 * grid.dt);
    std::size_t idx = 0;
    for (int j = 0; j < grid.n_steps; ++j)
        for (int a = 0; a < 3; ++a)
            for (int k = 1; k <= grid.k_max; ++k) {
                const auto [g1, g2] = gaussian_pair(seed, kStreamNoise, k, j, a);
                r.inc[idx++] = {s * g1, s * g2};
            }
    return r;
}

NoiseRealization coarsen(const NoiseRealization& fine, int factor, int k_max) {
    if (factor < 1 || k_max < 1 || k_max > fine.k_max)
        throw std::invalid_argument("incompatible coarsening");
    NoiseRealization r;
    r.seed = fine.seed;
    r.k_max = k_max;
    r.dt = fine.dt * factor;
    r.n_steps = fine.n_steps / factor;
    r.inc.assign(static_cast<std::size_t>(r.n_steps) * 3 * k_max, cplx{});
    for (int j = 0; j < r.n_steps; ++j)
        for (int a = 0; a < 3; ++a)
            for (int k = 1; k <= k_max; ++k) {
                cplx s{};
                for (int q = 0; q < factor; ++q) s += fine.at(j * factor + q, a, k);
                r.inc[(static_cast<std::size_t>(j) * 3 + a) * k_max + k - 1] = s;
            }
    return r;
}

std::vector<NoiseRealization> coupled_noise_family(std::uint64_t seed,
                                                   const std::vector<double>& eps_list,
                                                   const NoiseGrid& grid) {
    for (double e : eps_list)
        if (grid.dt > e * e / 8.0 * (1.0 + 1e-12))
            throw std::invalid_argument("noise grid too coarse for eps in family");
    const NoiseRealization base = sample_white_noise(seed, grid);
    return std::vector<NoiseRealization>(eps_list.size(), base);
}

InitialModes sample_initial_condition(std::uint64_t seed, int k_max) {
    InitialModes u;
    u.k_max = k_max;
    for (int a = 0; a < 3; ++a) {
        u.c[a].resize(k_max);
        for (int k = 1; k <= k_max; ++k) {
            const auto [g1, g2] = gaussian_pair(seed, kStreamInitial, k, 0, a);
            const double sd = std::sqrt(0.5 / (2.0 * std::pow(2.0 * std::numbers::pi * k, 2)));
            u.c[a][k - 1] = {sd * g1, sd * g2};
        }
    }
    return u;
}

Field3 initial_field(const InitialModes& u0, int nx) {
    SpectralField s;
    s.nx = nx;
    const int km = std::min(u0.k_max, nx / 2 - 1);
    for (int a = 0; a < 3; ++a) {
        s.c[a].assign(nx / 2 + 1, cplx{});
        for (int k = 1; k <= km; ++k) s.c[a][k] = u0.c[a][k - 1] * static_cast<double>(nx);
    }
    return to_physical(s);
}

double initial_variance_partial_sum(int k_max) {
    double s = 0.0;
    for (int k = k_max; k >= 1; --k) s += 2.0 / (2.0 * std::pow(2.0 * std::numbers::pi * k, 2));
    return s;
}

ThetaField sample_theta(const NoiseRealization& noise, int nx, int n, int N, double L,
                        const Cutoff& chi, const std::vector<int>& out_steps) {
    const int m = N - n;
    const double Ln = std::pow(L, n);
    const double dtf = std::pow(L, 2 * n) * noise.dt;
    if (m < 0) throw std::invalid_argument("sample_theta requires N >= n");
    if (dtf > std::pow(L, -2 * m) / 8.0 * (1.0 + 1e-12))
        throw std::invalid_argument("grid too coarse: frame step exceeds L^{-2(N-n)}/8");
    const int lag_max = static_cast<int>(std::ceil(chi.transition_end() / dtf));
    const int km = std::min(noise.k_max, nx / 2 - 1);
    // multiplier table, lag index q >= 1 means tau = q dtf
    std::vector<cplx> mult(static_cast<std::size_t>(lag_max + 1) * (km + 1));
    for (int q = 1; q <= lag_max; ++q) {
        const double tau = q * dtf, c = chi_m(chi, m, L, tau);
        for (int k = 1; k <= km; ++k) {
            const double p = 2.0 * std::numbers::pi * k / Ln;
            mult[static_cast<std::size_t>(q) * (km + 1) + k] =
                c == 0.0 ? cplx{} : cplx(0.0, p) * std::exp(-tau * p * p) * c;
        }
    }
    const double scale = std::pow(L, 0.5 * n) * nx;
    ThetaField th;
    th.n = n;
    th.N = N;
    th.L = L;
    th.nx = nx;
    th.dt_frame = dtf;
    th.steps = out_steps;
    for (int j : out_steps) {
        if (j - lag_max < 0 || j > noise.n_steps)
            throw std::invalid_argument("noise history shorter than the kernel support");
        SpectralField s;
        s.nx = nx;
        for (int a = 0; a < 3; ++a) {
            s.c[a].assign(nx / 2 + 1, cplx{});
            for (int q = 1; q <= lag_max; ++q) {
                const cplx* row = &mult[static_cast<std::size_t>(q) * (km + 1)];
                if (row[1] == cplx{} && row[km] == cplx{}) continue;
                for (int k = 1; k <= km; ++k) s.c[a][k] += row[k] * noise.at(j - q, a, k);
            }
            for (int k = 1; k <= km; ++k) s.c[a][k] *= scale;
        }
        th.samples.push_back(to_physical(s));
    }
    return th;
}

}  // namespace kpz
