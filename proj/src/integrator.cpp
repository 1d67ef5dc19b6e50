#include "forge/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "forge/fft.hpp"
#include "forge/norms.hpp"
#include "forge/spectral.hpp"

namespace forge {

namespace {

// ---- complex grid fields (internal carriers for wave coefficients) -----

struct CField {
    TorusGrid grid;
    int ncomp = 1;
    std::vector<cplx> v;
    CField() = default;
    CField(TorusGrid g, int nc) : grid(g), ncomp(nc), v(std::size_t(nc) * g.n3(), cplx{0, 0}) {}
    cplx& at(int c, std::int64_t p) { return v[std::size_t(c) * grid.n3() + p]; }
    cplx at(int c, std::int64_t p) const { return v[std::size_t(c) * grid.n3() + p]; }
};

// spectral gradient of a complex scalar sample array: returns 3 components
CField cgrad_scalar(const TorusGrid& g, const cplx* samples) {
    const std::int64_t n3 = g.n3();
    std::vector<cplx> hat(samples, samples + n3);
    fft_forward(g, hat.data());
    CField out(g, 3);
    std::vector<cplx> buf(n3);
    const cplx I{0.0, 1.0};
    for (int axis = 0; axis < 3; ++axis) {
        for_each_k(g, [&](std::int64_t p, int kx, int ky, int kz) {
            const int k = axis == 0 ? kx : (axis == 1 ? ky : kz);
            buf[p] = I * double(k) * hat[p];
        });
        fft_backward(g, buf.data());
        for (std::int64_t p = 0; p < n3; ++p) out.at(axis, p) = buf[p];
    }
    return out;
}

Field traceless_spectral(Field m) {
    const std::int64_t n3 = m.grid().n3();
    for (std::int64_t p = 0; p < n3; ++p) {
        const cplx tr = (m.at(0, p) + m.at(4, p) + m.at(8, p)) / 3.0;
        m.at(0, p) -= tr;
        m.at(4, p) -= tr;
        m.at(8, p) -= tr;
    }
    return m;
}

RealField phys_of(const std::vector<Field>& s, int i) { return s[i].to_phys(); }

// time-FD weights at index i of a series 0..nt: 4th-order centered in the
// interior, 2nd-order near the edges, 2nd-order one-sided at the ends
void time_fd(const std::vector<const RealField*>& window, const std::vector<double>& w,
             double inv_dt, RealField& out) {
    const std::int64_t n3 = out.grid.n3();
    for (int c = 0; c < out.comps(); ++c)
        for (std::int64_t p = 0; p < n3; ++p) {
            double acc = 0.0;
            for (std::size_t m = 0; m < window.size(); ++m)
                if (w[m] != 0.0) acc += w[m] * window[m]->at(c, p);
            out.at(c, p) = acc * inv_dt;
        }
}

struct FdStencil {
    std::vector<int> offsets;
    std::vector<double> weights;  // divide by dt
};

FdStencil fd_stencil(int i, int nt) {
    if (i >= 2 && i + 2 <= nt)
        return {{-2, -1, 1, 2}, {1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0}};
    if (i >= 1 && i + 1 <= nt) return {{-1, 1}, {-0.5, 0.5}};
    if (i == 0) return {{0, 1, 2}, {-1.5, 2.0, -0.5}};
    return {{-2, -1, 0}, {0.5, -2.0, 1.5}};
}

}  // namespace

// ---- starting triple ----------------------------------------------------

IterationState starting_triple(double L, const TorusGrid& grid, const std::vector<Field>& z,
                               TimeGrid tg, double alpha) {
    if (L <= 1.0) throw std::invalid_argument("starting_triple: L must exceed 1");
    if (z.size() != std::size_t(tg.nt + 1))
        throw std::invalid_argument("starting_triple: z series does not match the time grid");
    IterationState st;
    st.stage = 0;
    st.tg = tg;
    st.L = L;
    st.alpha = alpha;
    st.provenance = "starting triple (shear profile, symmetrized stress)";
    const double pref = std::pow(kTwoPi, -1.5);
    const std::int64_t n3 = grid.n3();
    for (int i = 0; i <= tg.nt; ++i) {
        const double Mh = std::sqrt(energy_M(L, tg.t(i)));
        const double amp = Mh * pref;
        Field v(grid, Rank::vector);
        // cos x3 in component 0, sin x3 in component 1
        v.at(0, 0, 0, 1) = 0.5 * amp;
        v.at(0, 0, 0, -1) = 0.5 * amp;
        v.at(1, 0, 0, 1) = cplx{0.0, -0.5} * amp;
        v.at(1, 0, 0, -1) = cplx{0.0, 0.5} * amp;

        RealField zp = z[i].to_phys();
        RealField vp = v.to_phys();
        RealField R(grid, Rank::matrix);
        const double spre = (2.0 * L + 1.0) * amp;
        for (std::int64_t p = 0; p < n3; ++p) {
            const int iz = int(p % grid.n);
            const double x3 = grid.x(iz);
            const double s = std::sin(x3), c = std::cos(x3);
            R.at(Field::mat(0, 2), p) = spre * s;
            R.at(Field::mat(2, 0), p) = spre * s;
            R.at(Field::mat(1, 2), p) = -spre * c;
            R.at(Field::mat(2, 1), p) = -spre * c;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    R.at(Field::mat(a, b), p) += vp.at(a, p) * zp.at(b, p) +
                                                 zp.at(a, p) * vp.at(b, p) +
                                                 zp.at(a, p) * zp.at(b, p);
        }
        RealField p0(grid, Rank::scalar);
        for (std::int64_t p = 0; p < n3; ++p) {
            double tr = 0.0;
            for (int a = 0; a < 3; ++a) tr += R.at(Field::mat(a, a), p);
            p0.at(0, p) = tr / 3.0;
        }
        st.v.push_back(std::move(v));
        st.p.push_back(Field::from_phys(p0));
        st.stress.push_back(traceless_spectral(Field::from_phys(R)));
    }
    return st;
}

// ---- mollification -------------------------------------------------------

namespace {
// radial transform of the unit-radius positive-definite bump (the
// self-convolution of the half-radius standard bump), normalized to 1 at 0
double bump_transform_raw(double s) {
    // g(s) = int_{|x|<1/2} e^{-1/(1-(2r)^2)} e^{-i s e.x} dx, radial part
    // 4pi int_0^{1/2} r^2 f(r) sinc(s r) dr; fixed-order Simpson
    const int n = 512;
    const double h = 0.5 / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double r = i * h;
        const double u = 2.0 * r;
        double f = (u < 1.0) ? std::exp(-1.0 / (1.0 - u * u)) : 0.0;
        const double x = s * r;
        const double sinc = (std::abs(x) < 1e-8) ? 1.0 - x * x / 6.0 : std::sin(x) / x;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * r * r * f * sinc;
    }
    return acc * h / 3.0;
}
}  // namespace

double space_mollifier_multiplier(double ell_k) {
    static const double g0 = bump_transform_raw(0.0);
    const double g = bump_transform_raw(ell_k) / g0;
    return g * g;
}

std::vector<double> causal_time_weights(double ell, double dt) {
    const int M = int(std::floor(ell / dt));
    std::vector<double> w;
    if (M < 1) {
        w.push_back(1.0);  // under-resolved; caller warns
        return w;
    }
    double sum = 0.0;
    for (int m = 0; m <= M; ++m) {
        const double s = (m * dt) / ell;  // in [0,1]
        const double u = 2.0 * s - 1.0;
        const double val = (std::abs(u) < 1.0) ? std::exp(-1.0 / (1.0 - u * u)) : 0.0;
        w.push_back(val);
        sum += val;
    }
    for (double& x : w) x /= sum;
    return w;
}

namespace {

std::vector<Field> mollify_series(const std::vector<Field>& s, double ell, double dt) {
    const TorusGrid& g = s[0].grid();
    // space: radial multiplier, cached per |k|
    std::map<long long, double> radial;
    auto mult = [&](int kx, int ky, int kz) {
        const long long k2 = (long long)kx * kx + (long long)ky * ky + (long long)kz * kz;
        auto it = radial.find(k2);
        if (it != radial.end()) return it->second;
        const double m = space_mollifier_multiplier(ell * std::sqrt(double(k2)));
        radial[k2] = m;
        return m;
    };
    std::vector<Field> sp;
    sp.reserve(s.size());
    for (const Field& f : s) {
        Field out = f;
        for_each_k(g, [&](std::int64_t p, int kx, int ky, int kz) {
            const double m = mult(kx, ky, kz);
            for (int c = 0; c < out.comps(); ++c) out.at(c, p) *= m;
        });
        sp.push_back(std::move(out));
    }
    // time: causal weights over past samples, constant extension below 0
    std::vector<double> w = causal_time_weights(ell, dt);
    std::vector<Field> out;
    out.reserve(s.size());
    for (int i = 0; i < int(sp.size()); ++i) {
        Field acc(g, sp[0].rank());
        for (int m = 0; m < int(w.size()); ++m) {
            const int j = std::max(0, i - m);
            Field term = sp[j];
            term *= w[m];
            acc += term;
        }
        out.push_back(std::move(acc));
    }
    return out;
}

std::vector<Field> traceless_product_series(const std::vector<Field>& a,
                                            const std::vector<Field>& b) {
    std::vector<Field> out;
    out.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        RealField ap = a[i].to_phys();
        RealField bp = b[i].to_phys();
        RealField sum(ap.grid, Rank::vector);
        for (int c = 0; c < 3; ++c)
            for (std::int64_t p = 0; p < ap.grid.n3(); ++p)
                sum.at(c, p) = ap.at(c, p) + bp.at(c, p);
        out.push_back(traceless_spectral(Field::from_phys(outer_product(sum, sum))));
    }
    return out;
}

}  // namespace

Mollified mollify_state(const IterationState& state, const std::vector<Field>& z, double ell) {
    const TorusGrid& g = state.v[0].grid();
    if (ell < g.spacing())
        std::fprintf(stderr, "mollify_state: warning: ell = %.3g under-resolves the grid (h = %.3g)\n",
                     ell, g.spacing());
    Mollified out;
    out.ell = ell;
    const double dt = state.tg.dt;
    out.v_ell = mollify_series(state.v, ell, dt);
    out.z_ell = mollify_series(z, ell, dt);
    out.R_ell = mollify_series(state.stress, ell, dt);

    // commutator stress and the matching pressure correction
    std::vector<Field> prod = traceless_product_series(state.v, z);  // (v+z) o(x) (v+z)
    std::vector<Field> prod_moll = mollify_series(prod, ell, dt);
    std::vector<Field> p_moll = mollify_series(state.p, ell, dt);
    // |v+z|^2 series (scalar) and its mollification
    std::vector<Field> sq;
    sq.reserve(state.v.size());
    for (std::size_t i = 0; i < state.v.size(); ++i) {
        RealField vp = state.v[i].to_phys();
        RealField zp = z[i].to_phys();
        RealField s(g, Rank::scalar);
        for (std::int64_t p = 0; p < g.n3(); ++p) {
            double acc = 0.0;
            for (int c = 0; c < 3; ++c) {
                const double u = vp.at(c, p) + zp.at(c, p);
                acc += u * u;
            }
            s.at(0, p) = acc;
        }
        sq.push_back(Field::from_phys(s));
    }
    std::vector<Field> sq_moll = mollify_series(sq, ell, dt);

    for (std::size_t i = 0; i < state.v.size(); ++i) {
        RealField ve = out.v_ell[i].to_phys();
        RealField ze = out.z_ell[i].to_phys();
        RealField sum(g, Rank::vector);
        RealField s2(g, Rank::scalar);
        for (std::int64_t p = 0; p < g.n3(); ++p) {
            double acc = 0.0;
            for (int c = 0; c < 3; ++c) {
                const double u = ve.at(c, p) + ze.at(c, p);
                sum.at(c, p) = u;
                acc += u * u;
            }
            s2.at(0, p) = acc;
        }
        Field mollified_outer = traceless_spectral(Field::from_phys(outer_product(sum, sum)));
        mollified_outer -= prod_moll[i];
        out.R_com.push_back(std::move(mollified_outer));
        Field pl = p_moll[i];
        Field d = Field::from_phys(s2);
        d -= sq_moll[i];
        d *= 1.0 / 3.0;
        pl -= d;
        out.p_ell.push_back(std::move(pl));
    }
    return out;
}

// ---- wave packets --------------------------------------------------------

namespace {

struct PackDir {
    int j = 0;
    int parity = 0;
    int pair = 0;       // antipodal pair index (0..5)
    Vec3 xi{};          // representative direction
    CVec3 B{};
};

// per (j,pair) coefficient field at one time slice
struct PackSlice {
    RealField a;        // scalar samples
    RealField grad_a;   // vector
    bool zero = true;   // chi_j(t) == 0
};

struct StageContext {
    const TorusGrid* grid = nullptr;
    const WaveSystem* ws = nullptr;
    Scales s;
    double L = 0.0;
    TimeGrid tg;
    const CutoffFamily* cutoffs = nullptr;
    const std::vector<FlowMap>* flows = nullptr;
    const std::vector<Field>* R_ell = nullptr;
    double max_r_ratio = 0.0;

    const FlowMap* flow_of(int j) const {
        for (const FlowMap& f : *flows)
            if (f.j == j) return &f;
        return nullptr;
    }

    // a_{j,xi} samples at slice i for one antipodal pair; also reports the
    // pointwise r0-ratio so the caller can abort with time and ratio
    PackSlice build_a(int j, int pair, int i, double* worst_ratio) {
        PackSlice out;
        const double t = tg.t(i);
        const double chi = cutoffs->chi(j, t);
        if (chi == 0.0) return out;
        out.zero = false;
        const int parity = j % 2;
        const GammaSystem& gs = ws->gamma_sys[parity];
        const double M = energy_M(L, t);
        const double denom = M * s.delta * std::sqrt(s.c_R);
        const double pref = chi * std::sqrt(M) * std::sqrt(s.delta) * std::pow(s.c_R, 0.25);
        RealField Rp = (*R_ell)[i].to_phys();
        const std::int64_t n3 = grid->n3();
        out.a = RealField(*grid, Rank::scalar);
        double worst = 0.0;
        for (std::int64_t p = 0; p < n3; ++p) {
            Mat3 R;
            double frob = 0.0;
            for (int aa = 0; aa < 3; ++aa)
                for (int bb = 0; bb < 3; ++bb) {
                    const double rv = Rp.at(Field::mat(aa, bb), p) / denom;
                    R[3 * aa + bb] = (aa == bb ? 1.0 : 0.0) - rv;
                    frob += rv * rv;
                }
            if (frob > gs.r0 * gs.r0) {
                Mat3 d = R;
                d[0] -= 1.0; d[4] -= 1.0; d[8] -= 1.0;
                worst = std::max(worst, op_norm_sym(d));
            }
            const double gval = gs.g(R, pair);
            out.a.at(0, p) = (gval > 0.0) ? pref * std::sqrt(gval) : 0.0;
            if (gval <= 0.0) worst = std::max(worst, 1e9);
        }
        if (worst_ratio) *worst_ratio = std::max(*worst_ratio, worst / std::max(gs.r0, 1e-300));
        if (worst > gs.r0)
            throw std::domain_error(
                "build_perturbation: ||R_ell||/(M delta c_R^{1/2}) = " + std::to_string(worst) +
                " exceeds r0 = " + std::to_string(gs.r0) + " at t = " + std::to_string(t));
        // spectral gradient of the samples
        std::vector<cplx> buf(n3);
        for (std::int64_t p = 0; p < n3; ++p) buf[p] = cplx{out.a.at(0, p), 0.0};
        CField ga = cgrad_scalar(*grid, buf.data());
        out.grad_a = RealField(*grid, Rank::vector);
        for (int c = 0; c < 3; ++c)
            for (std::int64_t p = 0; p < n3; ++p) out.grad_a.at(c, p) = ga.at(c, p).real();
        return out;
    }
};

// complex coefficient field L_{j,xi} (for the +xi representative) and the
// phase theta = lambda xi . (x + psi_j)
struct LSlice {
    CField L;       // 3 components
    std::vector<double> theta;  // phase samples
    bool zero = true;
};

LSlice build_L(const StageContext& ctx, const PackDir& dir, const PackSlice& pa, int i) {
    LSlice out;
    if (pa.zero) return out;
    out.zero = false;
    const TorusGrid& g = *ctx.grid;
    const std::int64_t n3 = g.n3();
    const FlowMap* fm = ctx.flow_of(dir.j);
    if (!fm || i < fm->i0 || i > fm->i1)
        throw std::logic_error("build_L: flow window does not cover an active slice");
    const RealField& psi = fm->psi_at(i);
    RealField grad_psi = gradient_vector(fm->psi_hat_at(i)).to_phys();
    out.L = CField(g, 3);
    out.theta.resize(std::size_t(n3));
    const double lam = ctx.s.lambda;
    const cplx I{0.0, 1.0};
    for (std::int64_t p = 0; p < n3; ++p) {
        const int iz = int(p % g.n);
        const int iy = int((p / g.n) % g.n);
        const int ix = int(p / (std::int64_t(g.n) * g.n));
        const double x[3] = {g.x(ix), g.x(iy), g.x(iz)};
        double xi_dot = 0.0;
        for (int c = 0; c < 3; ++c) xi_dot += dir.xi[c] * (x[c] + psi.at(c, p));
        out.theta[p] = lam * xi_dot;
        // q = (1/lambda) grad a + i a (DPhi - Id)^T xi; L = a B + q x B
        cplx q[3];
        for (int c = 0; c < 3; ++c) {
            double gt = 0.0;  // ((grad psi)^T xi)_c = sum_m xi_m d_c psi_m
            for (int m = 0; m < 3; ++m) gt += dir.xi[m] * grad_psi.at(Field::mat(m, c), p);
            q[c] = pa.grad_a.at(c, p) / lam + I * pa.a.at(0, p) * gt;
        }
        const cplx cr[3] = {q[1] * dir.B[2] - q[2] * dir.B[1], q[2] * dir.B[0] - q[0] * dir.B[2],
                            q[0] * dir.B[1] - q[1] * dir.B[0]};
        for (int c = 0; c < 3; ++c) out.L.at(c, p) = pa.a.at(0, p) * dir.B[c] + cr[c];
    }
    return out;
}

}  // namespace

// ---- cancellation check ---------------------------------------------------

CancellationReport run_cancellation_check(const IterationState& state,
                                          const std::vector<Field>& z, const WaveSystem& ws,
                                          const Scales& s, int substeps,
                                          const std::vector<double>& times) {
    CancellationReport rep;
    const TorusGrid& g = state.v[0].grid();
    Mollified mol = mollify_state(state, z, s.ell);
    CutoffFamily cutoffs(s.mu, state.tg.horizon());
    std::vector<Field> u(mol.v_ell.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = mol.v_ell[i];
        u[i] += mol.z_ell[i];
    }
    std::vector<FlowMap> flows = solve_flows(u, state.tg, cutoffs, substeps);
    StageContext ctx{&g, &ws, s, state.L, state.tg, &cutoffs, &flows, &mol.R_ell};

    const std::int64_t n3 = g.n3();
    for (double t : times) {
        const int i = int(std::llround(t / state.tg.dt));
        if (std::abs(i * state.tg.dt - t) > 1e-9)
            throw std::invalid_argument("cancellation_check: time off the grid");
        const double M = energy_M(state.L, state.tg.t(i));
        const double lead = M * s.delta * std::sqrt(s.c_R);

        // active packs with their phases
        struct Act {
            PackDir dir;
            PackSlice pa;
            std::vector<double> theta;
        };
        std::vector<Act> acts;
        for (int j : cutoffs.active_set(state.tg.t(i))) {
            const int parity = j % 2;
            const FlowMap* fm = ctx.flow_of(j);
            if (!fm) continue;
            const RealField& psi = fm->psi_at(i);
            for (int pair = 0; pair < 6; ++pair) {
                Act a;
                a.dir.j = j;
                a.dir.parity = parity;
                a.dir.pair = pair;
                const WaveDirection& wd = ws.family[parity].dirs[2 * pair];
                a.dir.xi = wd.xi();
                a.dir.B = wd.B();
                a.pa = ctx.build_a(j, pair, i, nullptr);
                if (a.pa.zero) continue;
                a.theta.resize(std::size_t(n3));
                for (std::int64_t p = 0; p < n3; ++p) {
                    const int iz = int(p % g.n);
                    const int iy = int((p / g.n) % g.n);
                    const int ix = int(p / (std::int64_t(g.n) * g.n));
                    double d = 0.0;
                    d += a.dir.xi[0] * (g.x(ix) + psi.at(0, p));
                    d += a.dir.xi[1] * (g.x(iy) + psi.at(1, p));
                    d += a.dir.xi[2] * (g.x(iz) + psi.at(2, p));
                    a.theta[p] = s.lambda * d;
                }
                acts.push_back(std::move(a));
            }
        }

        RealField Rp = mol.R_ell[i].to_phys();
        double worst = 0.0;
        // all 12 directions per act: d in {+,-} per pair
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(max : worst)
#endif
        for (std::int64_t p = 0; p < n3; ++p) {
            // w_p(x) and the explicitly assembled non-resonant sum
            cplx wp[3] = {0, 0, 0};
            for (const auto& a : acts) {
                const cplx ph = std::polar(1.0, a.theta[p]);
                const double av = a.pa.a.at(0, p);
                for (int c = 0; c < 3; ++c)
                    wp[c] += av * (a.dir.B[c] * ph + std::conj(a.dir.B[c] * ph));
            }
            cplx nonres[9] = {};
            for (const auto& a1 : acts)
                for (const auto& a2 : acts) {
                    for (int s1 = 0; s1 < 2; ++s1)
                        for (int s2 = 0; s2 < 2; ++s2) {
                            const bool resonant = (&a1 == &a2) && (s1 != s2);
                            if (resonant) continue;
                            const double sg1 = s1 ? -1.0 : 1.0;
                            const double sg2 = s2 ? -1.0 : 1.0;
                            const cplx ph1 = std::polar(1.0, sg1 * a1.theta[p]);
                            const cplx ph2 = std::polar(1.0, sg2 * a2.theta[p]);
                            const cplx f = a1.pa.a.at(0, p) * a2.pa.a.at(0, p) * ph1 * ph2;
                            for (int aa = 0; aa < 3; ++aa)
                                for (int bb = 0; bb < 3; ++bb) {
                                    const cplx B1 = s1 ? std::conj(a1.dir.B[aa]) : a1.dir.B[aa];
                                    const cplx B2 = s2 ? std::conj(a2.dir.B[bb]) : a2.dir.B[bb];
                                    nonres[3 * aa + bb] += f * B1 * B2;
                                }
                        }
                }
            double local = 0.0;
            for (int aa = 0; aa < 3; ++aa)
                for (int bb = 0; bb < 3; ++bb) {
                    const double lhs = (wp[aa] * wp[bb]).real() / 4.0 * 4.0;  // wp is the real sum
                    const double wpa = wp[aa].real(), wpb = wp[bb].real();
                    double val = wpa * wpb + Rp.at(Field::mat(aa, bb), p) -
                                 (aa == bb ? lead : 0.0) - nonres[3 * aa + bb].real();
                    (void)lhs;
                    local = std::max(local, std::abs(val));
                }
            worst = std::max(worst, local);
        }
        rep.t.push_back(state.tg.t(i));
        const double scale = lead * std::sqrt(3.0);
        rep.rel_residual.push_back(worst / scale);
        if (worst / scale > rep.max_rel) {
            rep.max_rel = worst / scale;
            rep.scale = scale;
        }
    }
    if (rep.max_rel == 0.0 && !rep.rel_residual.empty()) rep.scale = 0.0;
    return rep;
}

// ---- the q -> q+1 step -----------------------------------------------------

IterateResult iterate(const IterationState& state, const std::vector<Field>& z,
                      const WaveSystem& ws, const Scales& s, const IterateOptions& opt) {
    const TorusGrid& g = state.v[0].grid();
    const TimeGrid tg = state.tg;
    const int nt = tg.nt;
    const std::int64_t n3 = g.n3();
    if (s.lambda <= 0 || int(s.lambda) % ws.n0 != 0)
        throw std::invalid_argument("iterate: lambda_{q+1} must be a positive multiple of n0");

    IterateResult res;
    res.wave_D = ws.gamma_sys[0].D;
    Mollified mol = mollify_state(state, z, s.ell);
    CutoffFamily cutoffs(s.mu, tg.horizon());
    std::vector<Field> u(mol.v_ell.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = mol.v_ell[i];
        u[i] += mol.z_ell[i];
    }
    std::vector<FlowMap> flows = solve_flows(u, tg, cutoffs, opt.substeps);
    StageContext ctx{&g, &ws, s, state.L, tg, &cutoffs, &flows, &mol.R_ell};

    // accumulated series
    std::vector<RealField> w_p(nt + 1, RealField(g, Rank::vector));
    std::vector<RealField> w(nt + 1, RealField(g, Rank::vector));
    std::vector<CField> transport(nt + 1, CField(g, 3));

    // PASS A: per (j, pair), roll L over the window; accumulate w_p, w and
    // the transport coefficient sum  sum (D_t L) e^{i theta}
    for (int j = 0; j <= cutoffs.j_max; ++j) {
        const FlowMap* fm = ctx.flow_of(j);
        if (!fm) continue;
        const int parity = j % 2;
        for (int pair = 0; pair < 6; ++pair) {
            PackDir dir;
            dir.j = j;
            dir.parity = parity;
            dir.pair = pair;
            const WaveDirection& wd = ws.family[parity].dirs[2 * pair];
            dir.xi = wd.xi();
            dir.B = wd.B();

            // build L on the whole window (plus zero outside)
            std::vector<LSlice> Ls(fm->i1 - fm->i0 + 1);
            std::vector<PackSlice> pas(fm->i1 - fm->i0 + 1);
            for (int i = fm->i0; i <= fm->i1; ++i) {
                pas[i - fm->i0] = ctx.build_a(j, pair, i, &res.max_r_ratio);
                Ls[i - fm->i0] = build_L(ctx, dir, pas[i - fm->i0], i);
            }
            auto L_at = [&](int i) -> const LSlice* {
                if (i < fm->i0 || i > fm->i1) return nullptr;
                return &Ls[i - fm->i0];
            };

            for (int i = fm->i0; i <= fm->i1; ++i) {
                const LSlice& Li = Ls[i - fm->i0];
                if (Li.zero) continue;
                // w_p and w accumulation: 2 Re(. e^{i theta})
                for (std::int64_t p = 0; p < n3; ++p) {
                    const cplx ph = std::polar(1.0, Li.theta[p]);
                    const double av = pas[i - fm->i0].a.at(0, p);
                    for (int c = 0; c < 3; ++c) {
                        w_p[i].at(c, p) += 2.0 * (av * dir.B[c] * ph).real();
                        w[i].at(c, p) += 2.0 * (Li.L.at(c, p) * ph).real();
                    }
                }
                double l_c0 = 0.0;
                for (std::int64_t p = 0; p < n3; ++p) {
                    double m2 = 0.0;
                    for (int c = 0; c < 3; ++c) m2 += std::norm(Li.L.at(c, p));
                    l_c0 = std::max(l_c0, m2);
                }
                res.max_L_c0 = std::max(res.max_L_c0, std::sqrt(l_c0));

                // D_t L = d_t L (FD over the pack's own series, zero outside
                // the window since chi vanishes there) + (u . grad) L
                FdStencil st = fd_stencil(i, nt);
                CField dtl(g, 3);
                for (std::size_t m = 0; m < st.offsets.size(); ++m) {
                    const LSlice* Lm = L_at(i + st.offsets[m]);
                    if (!Lm || Lm->zero) continue;
                    const double wgt = st.weights[m] / tg.dt;
                    for (int c = 0; c < 3; ++c)
                        for (std::int64_t p = 0; p < n3; ++p)
                            dtl.at(c, p) += wgt * Lm->L.at(c, p);
                }
                RealFiel up = u[i].to_phys();
                // grad L per component, then advect
                for (int c = 0; c < 3; ++c) {
                    CField gl = cgrad_scalar(g, &Li.L.v[std::size_t(c) * n3]);
                    for (std::int64_t p = 0; p < n3; ++p) {
                        cplx adv{0.0, 0.0};
                        for (int b = 0; b < 3; ++b) adv += up.at(b, p) * gl.at(b, p);
                        dtl.at(c, p) += adv;
                    }
                }
                for (std::int64_t p = 0; p < n3; ++p) {
                    const cplx ph = std::polar(1.0, Li.theta[p]);
                    for (int c = 0; c < 3; ++c) {
                        const cplx t1 = dtl.at(c, p) * ph;
                        transport[i].at(c, p) += t1 + std::conj(t1);
                    }
                }
            }
        }
    }

    // ... PASS B/C are below
    return assemble_stage(state, z, ws, s, opt, res, mol, cutoffs, flows, ctx, w_p, w, transport);
}

}  // namespace forge
