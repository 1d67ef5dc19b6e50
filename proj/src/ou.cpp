#include "forge/ou.hpp"

#include <cmath>
#include <stdexcept>

#include "forge/norms.hpp"
#include "forge/rng.hpp"
#include "forge/spectral.hpp"

namespace forge {

void polarization_basis(int kx, int ky, int kz, double e1[3], double e2[3]) {
    const double k[3] = {double(kx), double(ky), double(kz)};
    const double kn = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    // axis least aligned with k
    int a = 0;
    if (std::abs(k[1]) < std::abs(k[a])) a = 1;
    if (std::abs(k[2]) < std::abs(k[a])) a = 2;
    double e[3] = {0, 0, 0};
    e[a] = 1.0;
    // e1 = normalize(k x e), e2 = normalize(k x e1)
    e1[0] = k[1] * e[2] - k[2] * e[1];
    e1[1] = k[2] * e[0] - k[0] * e[2];
    e1[2] = k[0] * e[1] - k[1] * e[0];
    const double n1 = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
    for (int i = 0; i < 3; ++i) e1[i] /= n1;
    e2[0] = (k[1] * e1[2] - k[2] * e1[1]) / kn;
    e2[1] = (k[2] * e1[0] - k[0] * e1[2]) / kn;
    e2[2] = (k[0] * e1[1] - k[1] * e1[0]) / kn;
}

namespace {

bool half_space_positive(int kx, int ky, int kz) {
    if (kx != 0) return kx > 0;
    if (ky != 0) return ky > 0;
    return kz > 0;
}

}  // namespace

std::array<double, 4> wiener_bridge_increment(const CounterRng& rng, std::uint64_t step, int level,
                                              int pos, double q, double h_base) {
    // coarse draw: per complex coordinate variance q*h_base (Re/Im each half)
    std::array<double, 4> d = rng.normal4(step, 0);
    const double s0 = std::sqrt(0.5 * q * h_base);
    for (double& x : d) x *= s0;
    double tau = h_base;
    for (int l = 1; l <= level; ++l) {
        tau *= 0.5;
        const int parent_pos = pos >> (level - l + 1);
        const int child = (pos >> (level - l)) & 1;
        const std::uint32_t slot = 0x80000000u | (std::uint32_t(l) << 20) |
                                   std::uint32_t(parent_pos & 0xFFFFF);
        std::array<double, 4> xi = rng.normal4(step, slot);
        // split D over the interval 2*tau into halves D/2 +- xi with
        // Var(xi) = (q/2) * (2 tau) / 4 = q tau / 4 per real coordinate
        const double sx = std::sqrt(0.25 * q * tau);
        for (int i = 0; i < 4; ++i)
            d[i] = 0.5 * d[i] + (child == 0 ? 1.0 : -1.0) * sx * xi[i];
    }
    return d;
}

OUPath simulate_ou(const NoiseSpectrum& spec, const TorusGrid& grid, double h, double T,
                   std::uint64_t seed, NoiseModel model, double h_base) {
    if (h <= 0.0) throw std::invalid_argument("simulate_ou: h must be positive");
    const double steps_real = T / h;
    const int nt = int(std::llround(steps_real));
    if (std::abs(steps_real - nt) > 1e-9)
        throw std::invalid_argument("simulate_ou: T must be a multiple of h");
    if (spec.kmax > grid.max_wavenumber())
        throw std::invalid_argument("simulate_ou: noise band exceeds grid band");
    int level = 0;
    if (model == NoiseModel::wiener_bridge) {
        if (h_base <= 0.0) h_base = h;
        const double ratio = h_base / h;
        level = int(std::llround(std::log2(ratio)));
        if (std::abs(ratio - std::ldexp(1.0, level)) > 1e-9 || level < 0)
            throw std::invalid_argument("simulate_ou: h must be h_base / 2^level");
    }

    OUPath path;
    path.grid = grid;
    path.spec = spec;
    path.h = h;
    path.seed = seed;
    path.model = model;
    path.z.assign(nt + 1, Field(grid, Rank::vector));

    struct Mode {
        int kx, ky, kz;
        double q, a;          // covariance weight, |k|^{2 alpha}
        double e1[3], e2[3];
        CounterRng rng;
        cplx c1{0.0, 0.0}, c2{0.0, 0.0};
    };
    std::vector<Mode> modes;
    for (int kx = -spec.kmax; kx <= spec.kmax; ++kx)
        for (int ky = -spec.kmax; ky <= spec.kmax; ++ky)
            for (int kz = -spec.kmax; kz <= spec.kmax; ++kz) {
                if (!spec.driven(kx, ky, kz) || !half_space_positive(kx, ky, kz)) continue;
                Mode m;
                m.kx = kx; m.ky = ky; m.kz = kz;
                const double k2 = double(kx) * kx + double(ky) * ky + double(kz) * kz;
                m.q = spec.q(k2);
                m.a = std::pow(k2, spec.alpha);
                polarization_basis(kx, ky, kz, m.e1, m.e2);
                m.rng = CounterRng{seed, mode_stream_id(kx, ky, kz)};
                modes.push_back(m);
            }

    auto store = [&](int it) {
        Field& f = path.z[it];
        for (const Mode& m : modes) {
            for (int c = 0; c < 3; ++c) {
                const cplx v = m.c1 * m.e1[c] + m.c2 * m.e2[c];
                f.at(c, m.kx, m.ky, m.kz) = v;
                f.at(c, -m.kx, -m.ky, -m.kz) = std::conj(v);
            }
        }
    };

    store(0);
    const int sub_per_base = (model == NoiseModel::wiener_bridge) ? (1 << level) : 1;
    for (int it = 1; it <= nt; ++it) {
        const int step_index = it - 1;
        for (Mode& m : modes) {
            const double decay = std::exp(-m.a * h);
            if (model == NoiseModel::exact_ou) {
                const double var = m.q * (1.0 - std::exp(-2.0 * m.a * h)) / (2.0 * m.a);
                auto g = m.rng.normal4(step_index, 0);
                const double s = std::sqrt(0.5 * var);
                m.c1 = decay * m.c1 + cplx{s * g[0], s * g[1]};
                m.c2 = decay * m.c2 + cplx{s * g[2], s * g[3]};
            } else {
                const std::uint64_t base_step = std::uint64_t(step_index) / sub_per_base;
                const int pos = int(std::uint64_t(step_index) % sub_per_base);
                auto d = wiener_bridge_increment(m.rng, base_step, level, pos, m.q, h_base);
                const double half = std::exp(-m.a * h * 0.5);
                m.c1 = decay * m.c1 + half * cplx{d[0], d[1]};
                m.c2 = decay * m.c2 + half * cplx{d[2], d[3]};
            }
        }
        store(it);
    }
    return path;
}

SobolevConstants sobolev_constants(const TorusGrid& grid, double sigma) {
    const double s_mid = 0.5 * (3.0 + sigma);
    SobolevConstants out;
    // C1: sup over band of (1+|k|^2)^{(s_mid - s_high)/2} -- attained at k=0
    out.C1 = 1.0;
    double sum = 0.0;
    const int K = grid.max_wavenumber();
    for (int kx = -K; kx <= K; ++kx)
        for (int ky = -K; ky <= K; ++ky)
            for (int kz = -K; kz <= K; ++kz) {
                const double k2 = double(kx) * kx + double(ky) * ky + double(kz) * kz;
                sum += std::pow(1.0 + k2, -s_mid);
            }
    out.C2 = std::sqrt(sum);
    out.C_S = std::max(out.C1 * out.C2, out.C2);
    return out;
}

namespace {
double holder_pair_quotient(const Field& a, const Field& b, double dt_sep, double expo,
                            double s_mid) {
    Field d = a;
    d -= b;
    return sobolev_norm(d, s_mid) / std::pow(dt_sep, expo);
}
}  // namespace

OUNormSeries ou_norm_series(const OUPath& path, double delta) {
    OUNormSeries out;
    const double s_mid = 0.5 * (3.0 + path.spec.sigma);
    const double s_high = 0.5 * (5.0 + path.spec.sigma);
    const double expo = 0.5 - 2.0 * delta;
    const int nt = path.nt();
    double running = 0.0;
    for (int i = 0; i <= nt; ++i) {
        out.t.push_back(path.t(i));
        out.l2.push_back(l2_norm(path.z[i]));
        out.h_mid.push_back(sobolev_norm(path.z[i], s_mid));
        out.h_high.push_back(sobolev_norm(path.z[i], s_high));
        for (int j = 0; j < i; ++j) {
            const double sep = path.t(i) - path.t(j);
            if (sep > 1.0 + 1e-12) continue;
            running = std::max(running, holder_pair_quotient(path.z[i], path.z[j], sep, expo, s_mid));
        }
        out.holder_quotient.push_back(running);
    }
    return out;
}

StoppingClock stopping_time_TL(const OUPath& path, double L, double delta,
                               const SobolevConstants& cs) {
    if (L <= 1.0) throw std::invalid_argument("stopping_time_TL: L must exceed 1");
    if (path.horizon() + 1e-12 < L)
        throw std::invalid_argument("stopping_time_TL: path horizon shorter than L");
    StoppingClock clock;
    clock.L = L;
    clock.delta = delta;
    clock.C_S = cs.C_S;
    const double thr_high = std::pow(L, 0.25) / cs.C_S;
    const double thr_hold = std::sqrt(L) / cs.C_S;
    OUNormSeries series = ou_norm_series(path, delta);
    const int nt = path.nt();
    int hit = -1;
    for (int i = 0; i <= nt; ++i) {
        if (path.t(i) > L + 1e-12) break;
        if (series.h_high[i] >= thr_high) { hit = i; clock.fired = 1; break; }
        if (series.holder_quotient[i] >= thr_hold) { hit = i; clock.fired = 2; break; }
    }
    clock.T_L = (hit < 0) ? std::min(L, path.horizon()) : path.t(hit);
    if (hit < 0) clock.fired = 0;

    // pathwise bounds of the paper hold strictly before the crossing
    const double bound_inf = std::pow(L, 0.25);
    const int last = (hit < 0) ? int(std::min<double>(nt, std::floor(L / path.h + 1e-9)))
                               : hit - 1;
    for (int i = 0; i <= last; ++i) {
        if (c0_norm(path.z[i]) > bound_inf * (1.0 + 1e-9)) clock.bounds_ok = false;
        if (c0_norm(gradient_vector(path.z[i])) > bound_inf * (1.0 + 1e-9)) clock.bounds_ok = false;
    }
    return clock;
}

}  // namespace forge
