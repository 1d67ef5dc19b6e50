#include "forge/flows.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "forge/spectral.hpp"

namespace forge {

VelocityInterpolant::VelocityInterpolant(const std::vector<Field>* u_hat, TimeGrid tg,
                                         int time_substeps, double prune_tol)
    : u_(u_hat), tg_(tg), key_scale_(2 * time_substeps), prune_tol_(prune_tol) {}

const VelocityInterpolant::Snapshot& VelocityInterpolant::at_time(double s) const {
    const long long key = std::llround(s / tg_.dt * key_scale_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;

    // cubic Lagrange over the 4 nearest slices, clamped at the ends
    const double si = s / tg_.dt;
    int m = int(std::floor(si));
    m = std::max(0, std::min(tg_.nt - 1, m));
    int base = std::max(0, std::min(tg_.nt - 3, m - 1));
    double w[4];
    {
        const double x = si - base;
        for (int a = 0; a < 4; ++a) {
            double num = 1.0, den = 1.0;
            for (int b = 0; b < 4; ++b) {
                if (a == b) continue;
                num *= (x - b);
                den *= double(a - b);
            }
            w[a] = num / den;
        }
    }
    if (tg_.nt < 3) {  // degenerate short series: linear blend
        const double x = si - m;
        w[0] = 1.0 - x; w[1] = x; w[2] = 0; w[3] = 0;
        base = m;
    }

    const std::vector<Field>& u = *u_;
    const TorusGrid& g = u[0].grid();
    Snapshot snap;
    // combined coefficients, pruned; half-space compression (u is real)
    double cmax = 0.0;
    std::vector<std::array<cplx, 3>> combined(std::size_t(g.n3()));
    for_each_k(g, [&](std::int64_t p, int, int, int) {
        for (int c = 0; c < 3; ++c) {
            cplx v{0.0, 0.0};
            for (int a = 0; a < 4; ++a) {
                const int idx = std::min(base + a, tg_.nt);
                if (w[a] != 0.0) v += w[a] * u[idx].at(c, p);
            }
            combined[p][c] = v;
            cmax = std::max(cmax, std::abs(v));
        }
    });
    const double tol = prune_tol_ * cmax;
    for_each_k(g, [&](std::int64_t p, int kx, int ky, int kz) {
        const auto& v = combined[p];
        const double mag = std::abs(v[0]) + std::abs(v[1]) + std::abs(v[2]);
        if (mag <= tol) return;
        const bool dc = (kx == 0 && ky == 0 && kz == 0);
        if (!dc) {
            // keep the half-space representative only
            if (kx < 0 || (kx == 0 && (ky < 0 || (ky == 0 && kz < 0)))) return;
        }
        snap.k.push_back({double(kx), double(ky), double(kz)});
        snap.c.push_back(v);
        snap.weight.push_back(dc ? 1.0 : 2.0);
        snap.max_speed += mag;
    });
    return cache_.emplace(key, std::move(snap)).first->second;
}

void VelocityInterpolant::eval(const Snapshot& snap, const double y[3], double out[3]) {
    out[0] = out[1] = out[2] = 0.0;
    const std::size_t n = snap.k.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& k = snap.k[i];
        const double phase = k[0] * y[0] + k[1] * y[1] + k[2] * y[2];
        const double cph = std::cos(phase), sph = std::sin(phase);
        const double wgt = snap.weight[i];
        const auto& c = snap.c[i];
        for (int d = 0; d < 3; ++d) {
            // weight 2 pairs k with -k: 2 Re(c e^{i k.y}); weight 1 is DC
            out[d] += wgt * (c[d].real() * cph - c[d].imag() * sph);
        }
    }
}

namespace {

// one RK4 characteristic over [s0, s1] (either direction)
void rk4_interval(const VelocityInterpolant& vel, double s0, double s1, int substeps,
                  const double y0[3], double y1[3]) {
    double y[3] = {y0[0], y0[1], y0[2]};
    const double h = (s1 - s0) / substeps;
    for (int m = 0; m < substeps; ++m) {
        const double s = s0 + m * h;
        const auto& A = vel.at_time(s);
        const auto& B = vel.at_time(s + 0.5 * h);
        const auto& C = vel.at_time(s + h);
        double k1[3], k2[3], k3[3], k4[3], tmp[3];
        VelocityInterpolant::eval(A, y, k1);
        for (int d = 0; d < 3; ++d) tmp[d] = y[d] + 0.5 * h * k1[d];
        VelocityInterpolant::eval(B, tmp, k2);
        for (int d = 0; d < 3; ++d) tmp[d] = y[d] + 0.5 * h * k2[d];
        VelocityInterpolant::eval(B, tmp, k3);
        for (int d = 0; d < 3; ++d) tmp[d] = y[d] + h * k3[d];
        VelocityInterpolant::eval(C, tmp, k4);
        for (int d = 0; d < 3; ++d)
            y[d] += h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
    }
    y1[0] = y[0]; y1[1] = y[1]; y1[2] = y[2];
}

// evaluate a periodic displacement field (half-space snapshot of psi_hat)
struct MapEvaluator {
    std::vector<std::array<double, 3>> k;
    std::vector<std::array<cplx, 3>> c;
    std::vector<double> weight;

    explicit MapEvaluator(const Field& psi_hat, double prune_tol = 1e-14) {
        const TorusGrid& g = psi_hat.grid();
        double cmax = 0.0;
        for (int comp = 0; comp < 3; ++comp)
            for (const cplx& z : psi_hat.comp(comp)) cmax = std::max(cmax, std::abs(z));
        const double tol = prune_tol * cmax;
        for_each_k(g, [&](std::int64_t p, int kx, int ky, int kz) {
            std::array<cplx, 3> v = {psi_hat.at(0, p), psi_hat.at(1, p), psi_hat.at(2, p)};
            const double mag = std::abs(v[0]) + std::abs(v[1]) + std::abs(v[2]);
            if (mag <= tol) return;
            const bool dc = (kx == 0 && ky == 0 && kz == 0);
            if (!dc && (kx < 0 || (kx == 0 && (ky < 0 || (ky == 0 && kz < 0))))) return;
            k.push_back({double(kx), double(ky), double(kz)});
            c.push_back(v);
            weight.push_back(dc ? 1.0 : 2.0);
        });
    }

    void eval(const double y[3], double out[3]) const {
        out[0] = out[1] = out[2] = 0.0;
        for (std::size_t i = 0; i < k.size(); ++i) {
            const double phase = k[i][0] * y[0] + k[i][1] * y[1] + k[i][2] * y[2];
            const double cph = std::cos(phase), sph = std::sin(phase);
            for (int d = 0; d < 3; ++d)
                out[d] += weight[i] * (c[i][d].real() * cph - c[i][d].imag() * sph);
        }
    }
};

}  // namespace

std::vector<FlowMap> solve_flows(const std::vector<Field>& u_hat, TimeGrid tg,
                                 const CutoffFamily& cutoffs, int substeps) {
    if (u_hat.size() != std::size_t(tg.nt + 1))
        throw std::invalid_argument("solve_flows: velocity series/grid mismatch");
    if (substeps < 1) throw std::invalid_argument("solve_flows: substeps >= 1");
    const TorusGrid& g = u_hat[0].grid();
    VelocityInterpolant vel(&u_hat, tg, substeps);

    // CFL-style warning on the coarsest advection scale
    {
        const auto& snap = vel.at_time(0.0);
        const double step_adv = snap.max_speed * tg.dt / substeps;
        if (step_adv > g.spacing())
            std::fprintf(stderr,
                         "solve_flows: warning: velocity*substep (%.3g) exceeds one cell (%.3g)\n",
                         step_adv, g.spacing());
    }

    std::vector<FlowMap> flows;
    for (int j = 0; j <= cutoffs.j_max; ++j) {
        const double t_lo = (j - 0.75) / cutoffs.mu;
        const double t_hi = (j + 0.75) / cutoffs.mu;
        if (t_hi <= 0.0 || t_lo >= tg.horizon()) continue;
        const double ta = cutoffs.anchor(j);
        const double ia_real = ta / tg.dt;
        const int ia = int(std::llround(ia_real));
        if (std::abs(ia_real - ia) > 1e-9)
            throw std::invalid_argument("solve_flows: anchor j/mu must lie on the time grid");
        FlowMap fm;
        fm.j = j;
        fm.tg = tg;
        fm.i0 = std::max(0, int(std::ceil(t_lo / tg.dt - 1e-12)));
        fm.i1 = std::min(tg.nt, int(std::floor(t_hi / tg.dt + 1e-12)));
        const int ia_cl = std::max(fm.i0, std::min(fm.i1, ia));
        fm.psi.assign(fm.i1 - fm.i0 + 1, RealField(g, Rank::vector));
        fm.psi_hat.assign(fm.i1 - fm.i0 + 1, Field(g, Rank::vector));
        if (ia_cl != ia)
            throw std::invalid_argument("solve_flows: anchor outside the cutoff window");

        // anchor slice: psi = 0 exactly
        const std::int64_t n3 = g.n3();
        auto advance = [&](int i_from, int i_to) {
            // build psi at i_to from psi at i_from (|i_to - i_from| = 1)
            const RealField& prev = fm.psi_at(i_from);
            MapEvaluator prev_map(fm.psi_hat_at(i_from));
            RealField& next = fm.psi[i_to - fm.i0];
            const double s_from = tg.t(i_to);   // integrate from the new slice...
            const double s_to = tg.t(i_from);   // ...to the already-built one
            (void)prev;
            // warm the snapshot cache sequentially; the parallel loop below
            // must only hit read paths
            {
                const double h = (s_to - s_from) / substeps;
                for (int m = 0; m < substeps; ++m) {
                    const double s = s_from + m * h;
                    vel.at_time(s);
                    vel.at_time(s + 0.5 * h);
                    vel.at_time(s + h);
                }
            }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
            for (std::int64_t p = 0; p < n3; ++p) {
                const int iz = int(p % g.n);
                const int iy = int((p / g.n) % g.n);
                const int ix = int(p / (std::int64_t(g.n) * g.n));
                const double x[3] = {g.x(ix), g.x(iy), g.x(iz)};
                double y[3];
                rk4_interval(vel, s_from, s_to, substeps, x, y);
                double disp[3];
                prev_map.eval(y, disp);
                next.at(0, p) = disp[0] + y[0] - x[0];
                next.at(1, p) = disp[1] + y[1] - x[1];
                next.at(2, p) = disp[2] + y[2] - x[2];
            }
            fm.psi_hat[i_to - fm.i0] = Field::from_phys(next);
        };
        // march forward then backward from the anchor
        fm.psi_hat[ia - fm.i0] = Field::from_phys(fm.psi_at(ia));
        for (int i = ia; i < fm.i1; ++i) advance(i, i + 1);
        for (int i = ia; i > fm.i0; --i) advance(i, i - 1);
        flows.push_back(std::move(fm));
    }
    return flows;
}

double flow_transport_defect(const FlowMap& fm, const std::vector<Field>& u_hat) {
    // centered dpsi/dt + u . (Id + grad psi) at interior window slices
    double worst = 0.0;
    const TorusGrid& g = u_hat[0].grid();
    const std::int64_t n3 = g.n3();
    for (int i = fm.i0 + 1; i < fm.i1; ++i) {
        RealField dpsi(g, Rank::vector);
        for (int c = 0; c < 3; ++c)
            for (std::int64_t p = 0; p < n3; ++p)
                dpsi.at(c, p) =
                    (fm.psi_at(i + 1).at(c, p) - fm.psi_at(i - 1).at(c, p)) / (2.0 * fm.tg.dt);
        RealField grad = gradient_vector(fm.psi_hat_at(i)).to_phys();
        RealField u = u_hat[i].to_phys();
        for (std::int64_t p = 0; p < n3; ++p) {
            for (int a = 0; a < 3; ++a) {
                double v = dpsi.at(a, p) + u.at(a, p);  // u . grad x = u
                for (int b = 0; b < 3; ++b)
                    v += u.at(b, p) * grad.at(Field::mat(a, b), p);
                worst = std::max(worst, std::abs(v));
            }
        }
    }
    return worst;
}

}  // namespace forge
