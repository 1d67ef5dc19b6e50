#include "forge/functionals.hpp"

#include <cmath>
#include <stdexcept>

#include "forge/norms.hpp"
#include "forge/spectral.hpp"

namespace forge {

std::vector<Field> m_process(const std::vector<Field>& x, double h, double alpha) {
    if (x.empty()) return {};
    std::vector<Field> m;
    m.reserve(x.size());
    Field quad(x[0].grid(), x[0].rank());  // running trapezoid of F_alpha
    Field f_prev = f_alpha(x[0], alpha);
    m.push_back(Field(x[0].grid(), x[0].rank()));  // M_0 = 0
    for (std::size_t i = 1; i < x.size(); ++i) {
        Field f_cur = f_alpha(x[i], alpha);
        Field incr = f_prev;
        incr += f_cur;
        incr *= 0.5 * h;
        quad += incr;
        Field mi = x[i];
        mi -= x[0];
        mi += quad;
        m.push_back(std::move(mi));
        f_prev = std::move(f_cur);
    }
    return m;
}

std::vector<Field> z_functional_from_m(const std::vector<Field>& m, double h, double alpha) {
    if (m.empty()) return {};
    const TorusGrid& g = m[0].grid();
    std::vector<Field> z;
    z.reserve(m.size());
    // J_i(k) = trapezoid of e^{-a(t_i - r)} M_r; exact recurrence
    // J_i = e^{-a h} (J_{i-1} + h/2 M_{i-1}) + h/2 M_i, then Z = P(M - a J).
    Field J(g, Rank::vector);
    z.push_back(leray_project(m[0]));
    for (std::size_t i = 1; i < m.size(); ++i) {
        Field Ji(g, Rank::vector);
        for_each_k(g, [&](std::int64_t p, int kx, int ky, int kz) {
            const double k2 = double(kx) * kx + double(ky) * ky + double(kz) * kz;
            const double a = (k2 == 0.0) ? 0.0 : std::pow(k2, alpha);
            const double decay = std::exp(-a * h);
            for (int c = 0; c < 3; ++c) {
                const cplx v = decay * (J.at(c, p) + 0.5 * h * m[i - 1].at(c, p)) +
                               0.5 * h * m[i].at(c, p);
                Ji.at(c, p) = v;
            }
        });
        J = std::move(Ji);
        Field zi = m[i];
        for_each_k(g, [&](std::int64_t p, int kx, int ky, int kz) {
            const double k2 = double(kx) * kx + double(ky) * ky + double(kz) * kz;
            const double a = (k2 == 0.0) ? 0.0 : std::pow(k2, alpha);
            for (int c = 0; c < 3; ++c) zi.at(c, p) -= a * J.at(c, p);
        });
        z.push_back(leray_project(zi));
    }
    return z;
}

std::vector<Field> z_functional(const std::vector<Field>& x, double h, double alpha) {
    return z_functional_from_m(m_process(x, h, alpha), h, alpha);
}

TauReport stopping_time_tauL(const std::vector<Field>& x, double h, double alpha, double L,
                             const std::vector<double>& n_values, double delta,
                             const SobolevConstants& cs, double sigma) {
    TauReport rep;
    std::vector<Field> Z = z_functional(x, h, alpha);
    const double s_mid = 0.5 * (3.0 + sigma);
    const double s_high = 0.5 * (5.0 + sigma);
    const double expo = 0.5 - 2.0 * delta;
    const int nt = int(Z.size()) - 1;
    // per-time norms and running Hoelder quotient
    std::vector<double> hi(nt + 1), quo(nt + 1);
    double running = 0.0;
    for (int i = 0; i <= nt; ++i) {
        hi[i] = sobolev_norm(Z[i], s_high);
        for (int j = 0; j < i; ++j) {
            const double sep = (i - j) * h;
            if (sep > 1.0 + 1e-12) continue;
            Field d = Z[i];
            d -= Z[j];
            running = std::max(running, sobolev_norm(d, s_mid) / std::pow(sep, expo));
        }
        quo[i] = running;
    }
    const double horizon = nt * h;
    for (double n : n_values) {
        const double thr_hi = std::pow(L - 1.0 / n, 0.25) / cs.C_S;
        const double thr_ho = std::sqrt(L - 1.0 / n) / cs.C_S;
        double tau = std::min(L, horizon);
        for (int i = 0; i <= nt; ++i) {
            if (i * h > L + 1e-12) break;
            if (hi[i] > thr_hi || quo[i] > thr_ho) { tau = i * h; break; }
        }
        rep.tau_n.push_back(tau);
        rep.n_values.push_back(n);
    }
    rep.tau_L = rep.tau_n.empty() ? std::min(L, horizon) : rep.tau_n.back();
    rep.capped_by_horizon = horizon < L && rep.tau_L >= horizon - 1e-12;
    return rep;
}

double g_star_norm_sq(const Field& e, const NoiseSpectrum& spec) {
    double s = 0.0;
    for_each_k(e.grid(), [&](std::int64_t p, int kx, int ky, int kz) {
        if (!spec.driven(kx, ky, kz)) return;
        const double k2 = double(kx) * kx + double(ky) * ky + double(kz) * kz;
        double e2 = 0.0;
        for (int c = 0; c < 3; ++c) e2 += std::norm(e.at(c, p));
        s += spec.q(k2) * e2;
    });
    return s;
}

MartingaleReport martingale_diagnostics(const std::vector<MartingaleSample>& samples,
                                        double t_minus_s, const Field& e,
                                        const NoiseSpectrum& spec) {
    const int m = int(samples.size());
    if (m < 100) throw std::invalid_argument("martingale_diagnostics: ensemble size < 100");
    MartingaleReport rep;
    rep.n_paths = m;
    rep.dt_window = t_minus_s;
    double sum = 0.0;
    for (const auto& s : samples) sum += s.y;
    rep.mean = sum / m;
    double ss = 0.0;
    for (const auto& s : samples) ss += (s.y - rep.mean) * (s.y - rep.mean);
    rep.var = ss / (m - 1);
    rep.se_mean = std::sqrt(rep.var / m);
    rep.z_mean = rep.se_mean > 0.0 ? rep.mean / rep.se_mean : 0.0;
    rep.target_var = t_minus_s * g_star_norm_sq(e, spec);
    rep.se_var = rep.var * std::sqrt(2.0 / (m - 1));
    rep.z_var = rep.se_var > 0.0 ? (rep.var - rep.target_var) / rep.se_var : 0.0;
    // conditional-mean proxies: correlation of the increment against
    // bounded functionals of the past
    auto corr = [&](auto pick, double& c_out, double& z_out) {
        double mg = 0.0;
        for (const auto& s : samples) mg += pick(s);
        mg /= m;
        double cov = 0.0, vg = 0.0;
        for (const auto& s : samples) {
            cov += (s.y - rep.mean) * (pick(s) - mg);
            vg += (pick(s) - mg) * (pick(s) - mg);
        }
        cov /= (m - 1);
        vg /= (m - 1);
        const double denom = std::sqrt(std::max(vg, 1e-300) * rep.var);
        c_out = denom > 0.0 ? cov / denom : 0.0;
        z_out = c_out * std::sqrt(double(m));  // Fisher-style z for small correlations
    };
    corr([](const MartingaleSample& s) { return s.g_e; }, rep.corr_e, rep.z_corr_e);
    corr([](const MartingaleSample& s) { return s.g_energy; }, rep.corr_energy, rep.z_corr_energy);
    return rep;
}

}  // namespace forge
