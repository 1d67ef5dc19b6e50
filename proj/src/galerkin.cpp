#include "forge/galerkin.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "forge/norms.hpp"
#include "forge/rng.hpp"
#include "forge/spectral.hpp"

namespace forge {

namespace {

bool half_space_positive(int kx, int ky, int kz) {
    if (kx != 0) return kx > 0;
    if (ky != 0) return ky > 0;
    return kz > 0;
}

struct Mode {
    int kx, ky, kz;
    double a;          // |k|^{2 alpha}
    double q;          // covariance weight; 0 when undriven
    double e1[3], e2[3];
    CounterRng rng;
    cplx c1{0, 0}, c2{0, 0};
};

}  // namespace

void GalerkinConfig::validate() const {
    if (K_G < 1) throw std::invalid_argument("galerkin: K_G must be positive");
    const double stiff = dt * std::pow(std::sqrt(3.0) * K_G, 2.0 * spec.alpha);
    if (stiff > 1.0)
        throw std::invalid_argument("galerkin: dt (K_G sqrt 3)^{2a} > 1 (stiffness guard)");
    if (spec.kmax > K_G)
        throw std::invalid_argument("galerkin: noise band exceeds the Galerkin cutoff");
    if (x0.grid().n != work_grid().n)
        throw std::invalid_argument("galerkin: x0 must live on the working grid");
    if (divergence_rel(x0) > 1e-10)
        throw std::invalid_argument("galerkin: x0 is not divergence-free");
}

GalerkinResult run_ensemble(const GalerkinConfig& cfg, const StepObserver& observer) {
    cfg.validate();
    const TorusGrid grid = cfg.work_grid();
    const int nt = int(std::llround(cfg.T / cfg.dt));
    if (std::abs(nt * cfg.dt - cfg.T) > 1e-9 * std::max(1.0, cfg.T))
        throw std::invalid_argument("galerkin: T must be a multiple of dt");
    int level = 0;
    if (cfg.model == NoiseModel::wiener_bridge && cfg.h_base > 0.0) {
        const double ratio = cfg.h_base / cfg.dt;
        level = int(std::llround(std::log2(ratio)));
        if (std::abs(ratio - std::ldexp(1.0, level)) > 1e-9 || level < 0)
            throw std::invalid_argument("galerkin: dt must be h_base / 2^level");
    }

    // modes of the retained band, half-space representatives
    std::vector<Mode> proto;
    for (int kx = -cfg.K_G; kx <= cfg.K_G; ++kx)
        for (int ky = -cfg.K_G; ky <= cfg.K_G; ++ky)
            for (int kz = -cfg.K_G; kz <= cfg.K_G; ++kz) {
                if (!half_space_positive(kx, ky, kz)) continue;
                Mode m;
                m.kx = kx; m.ky = ky; m.kz = kz;
                const double k2 = double(kx) * kx + double(ky) * ky + double(kz) * kz;
                m.a = std::pow(k2, cfg.spec.alpha);
                m.q = cfg.spec.driven(kx, ky, kz) ? cfg.spec.q(k2) : 0.0;
                polarization_basis(kx, ky, kz, m.e1, m.e2);
                proto.push_back(m);
            }

    const int n_paths = cfg.ensemble;
    const int n_cp = 9;  // checkpoints for the moment report
    GalerkinResult result;
    EnsembleStats& st = result.stats;
    st.times.resize(nt + 1);
    for (int i = 0; i <= nt; ++i) st.times[i] = i * cfg.dt;
    st.trace_full = cfg.spec.trace() * cfg.noise_amp * cfg.noise_amp;
    st.trace_truncated = st.trace_full;  // band already inside the cutoff
    st.path_sup_energy.assign(n_paths, std::vector<double>(n_cp, 0.0));
    st.path_diss_int.assign(n_paths, std::vector<double>(n_cp, 0.0));
    st.checkpoint_times.resize(n_cp);
    for (int c = 0; c < n_cp; ++c) st.checkpoint_times[c] = cfg.T * double(c + 1) / n_cp;

    std::vector<std::vector<double>> energy(n_paths);   // per path, per step
    std::vector<std::vector<double>> diss(n_paths);
    std::vector<std::vector<double>> defect(n_paths);   // Ito identity defect
    result.retained.assign(std::min(cfg.retain_paths, n_paths), {});
    result.snapshot_dt = cfg.store_every > 0 ? cfg.store_every * cfg.dt : 0.0;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int path = 0; path < n_paths; ++path) {
        std::vector<Mode> modes = proto;
        const std::uint64_t pseed = cfg.seed ^ (0x9E3779B97F4A7C15ull * std::uint64_t(path));
        for (Mode& m : modes) {
            m.rng = CounterRng{pseed, mode_stream_id(m.kx, m.ky, m.kz)};
            // project x0 onto the polarization coordinates
            cplx v[3];
            for (int c = 0; c < 3; ++c) v[c] = cfg.x0.at(c, m.kx, m.ky, m.kz);
            m.c1 = v[0] * m.e1[0] + v[1] * m.e1[1] + v[2] * m.e1[2];
            m.c2 = v[0] * m.e2[0] + v[1] * m.e2[1] + v[2] * m.e2[2];
        }
        Field xhat(grid, Rank::vector);
        auto rebuild = [&]() {
            for (const Mode& m : modes)
                for (int c = 0; c < 3; ++c) {
                    const cplx v = m.c1 * m.e1[c] + m.c2 * m.e2[c];
                    xhat.at(c, m.kx, m.ky, m.kz) = v;
                    xhat.at(c, -m.kx, -m.ky, -m.kz) = std::conj(v);
                }
        };
        rebuild();

        auto& en = energy[path];
        auto& di = diss[path];
        auto& de = defect[path];
        en.resize(nt + 1);
        di.resize(nt + 1);
        de.resize(nt + 1);
        auto mode_energy = [&]() {
            double e = 0.0, d = 0.0;
            for (const Mode& m : modes) {
                const double mag = std::norm(m.c1) + std::norm(m.c2);
                e += 2.0 * mag;            // both k and -k
                d += 2.0 * m.a * mag;      // ||(-D)^{a/2} x||^2 share
            }
            return std::pair<double, double>{e, d};
        };
        auto [e0, d0] = mode_energy();
        en[0] = e0;
        di[0] = d0;
        de[0] = 0.0;
        double sup_energy = en[0];
        double diss_alpha_int = 0.0;  // int ||x||_{H^alpha}^2 (for moments)
        double prev_halpha = sobolev_norm(xhat, cfg.spec.alpha);
        double noise_quad = 0.0;      // accumulated Ito noise input

        Field fhat(grid, Rank::vector);
        if (observer) {
            Field nl = cfg.nonlinear
                           ? leray_project(divergence(dealiased_outer(xhat, xhat)))
                           : Field(grid, Rank::vector);
            fhat = frac_laplacian(xhat, cfg.spec.alpha, +1);
            fhat += nl;
            fhat *= -1.0;
            observer(StepView{path, 0, 0.0, xhat, fhat});
        }
        if (path < int(result.retained.size()) && cfg.store_every > 0)
            result.retained[path].push_back(xhat);

        const int sub_per_base =
            (cfg.model == NoiseModel::wiener_bridge && level > 0) ? (1 << level) : 1;

        for (int step = 0; step < nt; ++step) {
            // explicit projected nonlinearity (plus optional bias hook)
            Field drift(grid, Rank::vector);
            if (cfg.nonlinear) {
                drift = leray_project(divergence(dealiased_outer(xhat, xhat)));
                drift *= -1.0;
            }
            if (cfg.drift_bias) drift += *cfg.drift_bias;
            for (Mode& m : modes) {
                cplx n[3];
                for (int c = 0; c < 3; ++c) n[c] = drift.at(c, m.kx, m.ky, m.kz);
                const cplx n1 = n[0] * m.e1[0] + n[1] * m.e1[1] + n[2] * m.e1[2];
                const cplx n2 = n[0] * m.e2[0] + n[1] * m.e2[1] + n[2] * m.e2[2];
                const double decay = std::exp(-m.a * cfg.dt);
                cplx eta1{0, 0}, eta2{0, 0};
                if (m.q > 0.0 && cfg.noise_amp > 0.0) {
                    if (cfg.model == NoiseModel::exact_ou) {
                        const double var =
                            m.q * (1.0 - std::exp(-2.0 * m.a * cfg.dt)) / (2.0 * m.a);
                        auto g = m.rng.normal4(step, 0);
                        const double s = cfg.noise_amp * std::sqrt(0.5 * var);
                        eta1 = cplx{s * g[0], s * g[1]};
                        eta2 = cplx{s * g[2], s * g[3]};
                    } else {
                        const std::uint64_t base_step = std::uint64_t(step) / sub_per_base;
                        const int pos = int(std::uint64_t(step) % sub_per_base);
                        auto d = wiener_bridge_increment(m.rng, base_step, level, pos, m.q,
                                                         cfg.h_base > 0 ? cfg.h_base : cfg.dt);
                        const double half = std::exp(-m.a * cfg.dt * 0.5);
                        eta1 = cfg.noise_amp * half * cplx{d[0], d[1]};
                        eta2 = cfg.noise_amp * half * cplx{d[2], d[3]};
                    }
                    noise_quad += 2.0 * 2.0 * m.q * cfg.noise_amp * cfg.noise_amp * cfg.dt;
                }
                if (cfg.nonlinear || cfg.drift_bias) {
                    m.c1 = decay * (m.c1 + cfg.dt * n1) + eta1;
                    m.c2 = decay * (m.c2 + cfg.dt * n2) + eta2;
                } else {
                    // identical arithmetic to simulate_ou for the coupling test
                    m.c1 = decay * m.c1 + eta1;
                    m.c2 = decay * m.c2 + eta2;
                }
            }
            rebuild();
            auto [e, d] = mode_energy();
            en[step + 1] = e;
            di[step + 1] = d;
            // discrete Ito defect: ||x(t)||^2 + 2 int ||(-D)^{a/2}x||^2 - ||x0||^2 - t Tr
            double diss_int = 0.0;
            for (int i = 0; i <= step + 1; ++i)
                diss_int += (i == 0 || i == step + 1 ? 0.5 : 1.0) * di[i] * cfg.dt;
            de[step + 1] = e + 2.0 * diss_int - en[0] - noise_quad;

            sup_energy = std::max(sup_energy, e);
            const double cur_halpha = sobolev_norm(xhat, cfg.spec.alpha);
            diss_alpha_int += 0.5 * cfg.dt * (prev_halpha * prev_halpha + cur_halpha * cur_halpha);
            prev_halpha = cur_halpha;
            for (int c = 0; c < n_cp; ++c) {
                if (std::abs((step + 1) * cfg.dt - st.checkpoint_times[c]) < 0.5 * cfg.dt) {
                    st.path_sup_energy[path][c] = sup_energy;
                    st.path_diss_int[path][c] = diss_alpha_int;
                }
            }

            if (observer) {
                Field nl = cfg.nonlinear
                               ? leray_project(divergence(dealiased_outer(xhat, xhat)))
                               : Field(grid, Rank::vector);
                fhat = frac_laplacian(xhat, cfg.spec.alpha, +1);
                fhat += nl;
                fhat *= -1.0;
                observer(StepView{path, step + 1, (step + 1) * cfg.dt, xhat, fhat});
            }
            if (path < int(result.retained.size()) && cfg.store_every > 0 &&
                (step + 1) % cfg.store_every == 0)
                result.retained[path].push_back(xhat);

            if (!std::isfinite(e) || e > 1e12)
                throw std::runtime_error("galerkin: energy blowup at t = " +
                                         std::to_string((step + 1) * cfg.dt));
        }
    }

    // fixed-order reductions over paths
    st.mean_energy.assign(nt + 1, 0.0);
    st.se_energy.assign(nt + 1, 0.0);
    st.mean_dissipation.assign(nt + 1, 0.0);
    st.identity_residual.assign(nt + 1, 0.0);
    st.identity_z.assign(nt + 1, 0.0);
    for (int i = 0; i <= nt; ++i) {
        double me = 0.0, md = 0.0, mdef = 0.0;
        for (int p = 0; p < n_paths; ++p) {
            me += energy[p][i];
            md += diss[p][i];
            mdef += defect[p][i];
        }
        me /= n_paths; md /= n_paths; mdef /= n_paths;
        double ve = 0.0, vdef = 0.0;
        for (int p = 0; p < n_paths; ++p) {
            ve += (energy[p][i] - me) * (energy[p][i] - me);
            vdef += (defect[p][i] - mdef) * (defect[p][i] - mdef);
        }
        ve = n_paths > 1 ? ve / (n_paths - 1) : 0.0;
        vdef = n_paths > 1 ? vdef / (n_paths - 1) : 0.0;
        st.mean_energy[i] = me;
        st.se_energy[i] = std::sqrt(ve / n_paths);
        st.mean_dissipation[i] = md;
        st.identity_residual[i] = mdef;
        const double se_def = std::sqrt(vdef / n_paths);
        st.identity_z[i] = se_def > 0.0 ? mdef / se_def : 0.0;
    }
    return result;
}

std::vector<MomentRow> moment_report(const EnsembleStats& stats, const std::vector<int>& q_list,
                                     double x0_l2) {
    std::vector<MomentRow> rows;
    const int n_paths = int(stats.path_sup_energy.size());
    for (int q : q_list) {
        for (std::size_t c = 0; c < stats.checkpoint_times.size(); ++c) {
            double mean = 0.0;
            std::vector<double> vals(n_paths);
            for (int p = 0; p < n_paths; ++p) {
                const double sup_e = stats.path_sup_energy[p][c];
                const double d_int = stats.path_diss_int[p][c];
                const double supq = std::pow(sup_e, q);  // sup ||x||^{2q}
                const double integ = (q == 1) ? d_int : std::pow(sup_e, q - 1) * d_int;
                vals[p] = supq + integ;
                mean += vals[p];
            }
            mean /= n_paths;
            double var = 0.0;
            for (double v : vals) var += (v - mean) * (v - mean);
            var = n_paths > 1 ? var / (n_paths - 1) : 0.0;
            MomentRow r;
            r.t = stats.checkpoint_times[c];
            r.q = q;
            r.lhs_mean = mean;
            r.lhs_se = std::sqrt(var / n_paths);
            r.fitted_C = mean / (std::pow(x0_l2 * x0_l2, q) + 1.0);
            rows.push_back(r);
        }
    }
    return rows;
}

}  // namespace forge
