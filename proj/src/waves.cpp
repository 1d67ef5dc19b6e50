#include "forge/waves.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "forge/rng.hpp"

namespace forge {

namespace {

const double kSqrt2Inv = 0.70710678118654752440084436210485;

Rat dotq(const Vec3Q& a, const Vec3Q& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

Vec3Q crossq(const Vec3Q& a, const Vec3Q& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// A_xi: normalized projection of the reference axis e3 onto xi-perp
// (e1 as fallback when xi is parallel to e3). Exact in rationals; the
// norms that appear are Pythagorean so the square roots stay rational.
Vec3Q frame_A(const Vec3Q& xi) {
    for (int ref : {2, 0}) {  // e3 first, e1 as the parallel fallback
        Vec3Q e{Rat(0), Rat(0), Rat(0)};
        e[ref] = Rat(1);
        const Rat c = dotq(e, xi);
        Vec3Q a{e[0] - c * xi[0], e[1] - c * xi[1], e[2] - c * xi[2]};
        const Rat n2 = dotq(a, a);
        if (n2.is_zero()) continue;
        const Rat n = n2.sqrt_exact();
        return {a[0] / n, a[1] / n, a[2] / n};
    }
    throw std::logic_error("frame_A: no reference axis usable");
}

WaveFamily make_family(int parity, const std::vector<std::array<int, 3>>& pair_reps, int den) {
    WaveFamily fam;
    fam.parity = parity;
    for (const auto& m : pair_reps) {
        for (int sign : {+1, -1}) {
            WaveDirection d;
            d.m = {sign * m[0], sign * m[1], sign * m[2]};
            d.den = den;
            Vec3Q xi{Rat(d.m[0], den), Rat(d.m[1], den), Rat(d.m[2], den)};
            if (dotq(xi, xi) != Rat(1)) throw std::logic_error("wave direction not on S^2");
            d.A = frame_A(xi);
            d.C = crossq(xi, d.A);
            fam.dirs.push_back(d);
        }
    }
    // least n with n*xi in Z^3 for every xi
    long long n0 = 1;
    for (const auto& d : fam.dirs) {
        long long g = std::gcd(std::gcd(std::abs((long long)d.m[0]), std::abs((long long)d.m[1])),
                               std::abs((long long)d.m[2]));
        long long need = d.den / std::gcd((long long)d.den, g);
        n0 = std::lcm(n0, need);
    }
    fam.n0 = int(n0);
    return fam;
}

constexpr int vi[6][2] = {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}, {1, 2}};

// columns: vec6(Id - xi_i (x) xi_i) for the 6 antipodal pairs
std::array<std::array<Rat, 6>, 6> pair_basis_matrix(const WaveFamily& fam) {
    std::array<std::array<Rat, 6>, 6> E;
    for (int i = 0; i < 6; ++i) {
        const WaveDirection& d = fam.dirs[2 * i];
        Vec3Q xi{Rat(d.m[0], d.den), Rat(d.m[1], d.den), Rat(d.m[2], d.den)};
        for (int r = 0; r < 6; ++r) {
            const int a = vi[r][0], b = vi[r][1];
            Rat id = (a == b) ? Rat(1) : Rat(0);
            E[r][i] = id - xi[a] * xi[b];
        }
    }
    return E;
}

std::array<std::array<Rat, 6>, 6> invert6(std::array<std::array<Rat, 6>, 6> m) {
    std::array<std::array<Rat, 6>, 6> inv{};
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) inv[i][j] = Rat(i == j ? 1 : 0);
    for (int col = 0; col < 6; ++col) {
        int piv = -1;
        for (int r = col; r < 6; ++r)
            if (!m[r][col].is_zero()) { piv = r; break; }
        if (piv < 0) throw std::logic_error("wave family does not span Sym(3)");
        std::swap(m[piv], m[col]);
        std::swap(inv[piv], inv[col]);
        const Rat d = m[col][col];
        for (int j = 0; j < 6; ++j) { m[col][j] = m[col][j] / d; inv[col][j] = inv[col][j] / d; }
        for (int r = 0; r < 6; ++r) {
            if (r == col || m[r][col].is_zero()) continue;
            const Rat f = m[r][col];
            for (int j = 0; j < 6; ++j) {
                m[r][j] = m[r][j] - f * m[col][j];
                inv[r][j] = inv[r][j] - f * inv[col][j];
            }
        }
    }
    return inv;
}

GammaSystem make_gamma_system(const WaveFamily& fam) {
    GammaSystem gs;
    gs.parity = fam.parity;
    auto E = pair_basis_matrix(fam);
    gs.G_exact = invert6(E);
    for (int i = 0; i < 6; ++i) {
        Mat3 G{};
        for (int r = 0; r < 6; ++r) {
            const int a = vi[r][0], b = vi[r][1];
            const double v = gs.G_exact[i][r].to_double();
            if (a == b) G[3 * a + b] = v;
            else { G[3 * a + b] = v / 2.0; G[3 * b + a] = v / 2.0; }
        }
        gs.G[i] = G;
    }
    return gs;
}

Mat3 identity3() { return {1, 0, 0, 0, 1, 0, 0, 0, 1}; }

double frob_inner(const Mat3& a, const Mat3& b) {
    double s = 0.0;
    for (int i = 0; i < 9; ++i) s += a[i] * b[i];
    return s;
}

// worst op-norm-1 symmetric direction for <G, S>: S = -sum sign(l_j) u_j u_j^T
Mat3 worst_direction(const Mat3& g);

// Deterministic sample set of symmetric matrices with op-norm 1.
std::vector<Mat3> sample_directions(const GammaSystem& gs, int n_random) {
    std::vector<Mat3> out;
    for (int i = 0; i < 6; ++i) out.push_back(worst_direction(gs.G[i]));
    for (int r = 0; r < 6; ++r) {
        Mat3 s{};
        const int a = vi[r][0], b = vi[r][1];
        s[3 * a + b] = 1.0;
        s[3 * b + a] = 1.0;
        out.push_back(s);
        for (double& x : s) x = -x;
        out.push_back(s);
    }
    CounterRng rng{0x5eedul, 0x7a7e5ul};
    for (int i = 0; i < n_random; ++i) {
        Mat3 s{};
        auto g1 = rng.normal4(i, 0);
        auto g2 = rng.normal4(i, 1);
        s[0] = g1[0]; s[4] = g1[1]; s[8] = g1[2];
        s[1] = s[3] = g1[3]; s[2] = s[6] = g2[0]; s[5] = s[7] = g2[1];
        const double nrm = op_norm_sym(s);
        if (nrm == 0.0) continue;
        for (double& x : s) x /= nrm;
        out.push_back(s);
    }
    return out;
}

}  // namespace

std::array<double, 3> sym_eigenvalues(const Mat3& m_in) {
    // cyclic Jacobi; plenty for 3x3
    Mat3 a = m_in;
    for (int sweep = 0; sweep < 50; ++sweep) {
        double off = std::abs(a[1]) + std::abs(a[2]) + std::abs(a[5]);
        if (off < 1e-15) break;
        for (int p = 0; p < 3; ++p)
            for (int q = p + 1; q < 3; ++q) {
                const double apq = a[3 * p + q];
                if (std::abs(apq) < 1e-18) continue;
                const double app = a[3 * p + p], aqq = a[3 * q + q];
                const double theta = 0.5 * std::atan2(2.0 * apq, aqq - app);
                const double c = std::cos(theta), s = std::sin(theta);
                Mat3 r = identity3();
                r[3 * p + p] = c; r[3 * q + q] = c;
                r[3 * p + q] = s; r[3 * q + p] = -s;
                // a = r^T a r
                Mat3 t{};
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) {
                        double v = 0;
                        for (int k = 0; k < 3; ++k) v += a[3 * i + k] * r[3 * k + j];
                        t[3 * i + j] = v;
                    }
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) {
                        double v = 0;
                        for (int k = 0; k < 3; ++k) v += r[3 * k + i] * t[3 * k + j];
                        a[3 * i + j] = v;
                    }
            }
    }
    std::array<double, 3> ev = {a[0], a[4], a[8]};
    std::sort(ev.begin(), ev.end());
    return ev;
}

double op_norm_sym(const Mat3& m) {
    auto ev = sym_eigenvalues(m);
    return std::max(std::abs(ev[0]), std::abs(ev[2]));
}

double nuclear_norm_sym(const Mat3& m) {
    auto ev = sym_eigenvalues(m);
    return std::abs(ev[0]) + std::abs(ev[1]) + std::abs(ev[2]);
}

namespace {
Mat3 worst_direction(const Mat3& g) {
    // eigenvectors via shifted inverse-free approach: use Jacobi rotations
    // accumulating the rotation matrix
    Mat3 a = g;
    Mat3 v = identity3();
    for (int sweep = 0; sweep < 50; ++sweep) {
        double off = std::abs(a[1]) + std::abs(a[2]) + std::abs(a[5]);
        if (off < 1e-15) break;
        for (int p = 0; p < 3; ++p)
            for (int q = p + 1; q < 3; ++q) {
                const double apq = a[3 * p + q];
                if (std::abs(apq) < 1e-18) continue;
                const double app = a[3 * p + p], aqq = a[3 * q + q];
                const double theta = 0.5 * std::atan2(2.0 * apq, aqq - app);
                const double c = std::cos(theta), s = std::sin(theta);
                Mat3 r = identity3();
                r[3 * p + p] = c; r[3 * q + q] = c;
                r[3 * p + q] = s; r[3 * q + p] = -s;
                Mat3 t{};
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) {
                        double x = 0;
                        for (int k = 0; k < 3; ++k) x += a[3 * i + k] * r[3 * k + j];
                        t[3 * i + j] = x;
                    }
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) {
                        double x = 0;
                        for (int k = 0; k < 3; ++k) x += r[3 * k + i] * t[3 * k + j];
                        a[3 * i + j] = x;
                    }
                Mat3 vt{};
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) {
                        double x = 0;
                        for (int k = 0; k < 3; ++k) x += v[3 * i + k] * r[3 * k + j];
                        vt[3 * i + j] = x;
                    }
                v = vt;
            }
    }
    Mat3 s{};
    for (int j = 0; j < 3; ++j) {
        const double lam = a[3 * j + j];
        const double sign = lam >= 0 ? -1.0 : 1.0;  // minimize <G,S>
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) s[3 * r + c] += sign * v[3 * r + j] * v[3 * c + j];
    }
    return s;
}
}  // namespace

double GammaSystem::g_center(int pair) const {
    return frob_inner(G[pair], identity3());
}

double GammaSystem::g(const Mat3& R, int pair) const { return frob_inner(G[pair], R); }

double certify_r0(const GammaSystem& gs, double bisect_tol) {
    double cmin = 1e300;
    for (int i = 0; i < 6; ++i) cmin = std::min(cmin, gs.g_center(i));
    if (cmin <= 0.0) throw std::logic_error("gamma system not positive at Id");
    const double margin = 1e-3 * cmin;
    auto samples = sample_directions(gs, 200);
    auto min_g_at = [&](double r) {
        double worst = 1e300;
        for (int i = 0; i < 6; ++i) {
            // exact minimum over the op-norm ball of an affine functional
            worst = std::min(worst, gs.g_center(i) - r * nuclear_norm_sym(gs.G[i]));
            for (const Mat3& s : samples) {
                Mat3 R = identity3();
                for (int t = 0; t < 9; ++t) R[t] += r * s[t];
                worst = std::min(worst, gs.g(R, i));
            }
        }
        return worst;
    };
    double lo = 0.0, hi = 4.0;
    if (min_g_at(hi) >= margin) return hi / 2.0;
    while (hi - lo > bisect_tol) {
        const double mid = 0.5 * (lo + hi);
        if (min_g_at(mid) >= margin) lo = mid;
        else hi = mid;
    }
    return lo / 2.0;
}

namespace {
double gamma_cn_budget(const GammaSystem& gs, int pair, double r0, int n_order) {
    // gamma = sqrt(g) with g affine: D^a gamma = c_k g^{1/2-k} prod dg,
    // c_k = prod_{j<k} |1/2 - j|. Sampled over the r0-ball per the spec;
    // the affine structure makes the ball extremes exact.
    double slope = 0.0;
    for (int r = 0; r < 6; ++r) {
        const int a = vi[r][0], b = vi[r][1];
        const double d = (a == b) ? mat_at(gs.G[pair], a, b) : 2.0 * mat_at(gs.G[pair], a, b);
        slope = std::max(slope, std::abs(d));
    }
    const double gmin = gs.g_center(pair) - r0 * nuclear_norm_sym(gs.G[pair]);
    const double gmax = gs.g_center(pair) + r0 * nuclear_norm_sym(gs.G[pair]);
    if (gmin <= 0.0) throw std::logic_error("gamma budget: ball leaves positivity region");
    double total = std::sqrt(gmax);
    double ck = 1.0;
    for (int k = 1; k <= n_order; ++k) {
        ck *= std::abs(0.5 - (k - 1));
        total += ck * std::pow(gmin, 0.5 - k) * std::pow(slope, k);
    }
    return total;
}
}  // namespace

double gamma_coeff(const GammaSystem& gs, int pair, const Mat3& R) {
    Mat3 d = R;
    d[0] -= 1.0; d[4] -= 1.0; d[8] -= 1.0;
    const double nrm = op_norm_sym(d);
    if (nrm > gs.r0 * (1.0 + 1e-12))
        throw std::domain_error("gamma: ||R - Id||_op = " + std::to_string(nrm) +
                                " outside certified radius r0 = " + std::to_string(gs.r0));
    const double val = gs.g(R, pair);
    if (val <= 0.0) throw std::domain_error("gamma: nonpositive g inside certified ball");
    return std::sqrt(val);
}

WaveSystem build_wave_system(int n_order) {
    WaveSystem ws;
    ws.family[0] = make_family(0,
                               {{{3, 4, 0}}, {{3, -4, 0}}, {{0, 3, 4}}, {{0, 3, -4}}, {{4, 0, 3}}, {{-4, 0, 3}}},
                               5);
    ws.family[1] = make_family(1,
                               {{{4, 3, 0}}, {{4, -3, 0}}, {{0, 4, 3}}, {{0, 4, -3}}, {{3, 0, 4}}, {{-3, 0, 4}}},
                               5);
    // disjointness of the two direction sets
    for (const auto& d0 : ws.family[0].dirs)
        for (const auto& d1 : ws.family[1].dirs)
            if (d0.m == d1.m && d0.den == d1.den)
                throw std::logic_error("wave families are not disjoint");
    ws.n0 = std::lcm(ws.family[0].n0, ws.family[1].n0);
    for (int a = 0; a < 2; ++a) {
        ws.gamma_sys[a] = make_gamma_system(ws.family[a]);
        ws.gamma_sys[a].r0 = certify_r0(ws.gamma_sys[a]);
        ws.gamma_sys[a].n_order = n_order;
    }
    // common radius keeps both parities usable with one constant
    const double r0 = std::min(ws.gamma_sys[0].r0, ws.gamma_sys[1].r0);
    ws.gamma_sys[0].r0 = r0;
    ws.gamma_sys[1].r0 = r0;
    double sup = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int i = 0; i < 6; ++i)
            sup = std::max(sup, gamma_cn_budget(ws.gamma_sys[a], i, r0, n_order));
    const double D = 2.0 * 12.0 * sup;
    ws.gamma_sys[0].D = D;
    ws.gamma_sys[1].D = D;
    return ws;
}

CVec3 WaveDirection::B() const {
    CVec3 b;
    for (int i = 0; i < 3; ++i)
        b[i] = std::complex<double>(A[i].to_double() * kSqrt2Inv, C[i].to_double() * kSqrt2Inv);
    return b;
}

Field beltrami_field(const WaveFamily& fam, const std::map<int, std::complex<double>>& coeffs,
                     int lambda, const TorusGrid& grid) {
    if (lambda <= 0 || lambda % fam.n0 != 0)
        throw std::invalid_argument("beltrami_field: lambda must be a positive multiple of n0");
    if (lambda > grid.max_wavenumber())
        throw std::invalid_argument("beltrami_field: lambda exceeds the grid band limit");
    // conjugate-pair completeness
    for (const auto& [d, a] : coeffs) {
        const int anti = (d % 2 == 0) ? d + 1 : d - 1;
        auto it = coeffs.find(anti);
        if (it == coeffs.end() || std::abs(std::conj(a) - it->second) > 1e-14 * (1.0 + std::abs(a)))
            throw std::invalid_argument("beltrami_field: coefficients must satisfy a_{-xi} = conj(a_xi)");
    }
    Field W(grid, Rank::vector);
    for (const auto& [d, a] : coeffs) {
        const WaveDirection& dir = fam.dirs.at(d);
        const int mult = lambda / dir.den;
        if (std::int64_t(mult) * dir.den != lambda)
            throw std::invalid_argument("beltrami_field: lambda incompatible with direction denominator");
        const int kx = mult * dir.m[0], ky = mult * dir.m[1], kz = mult * dir.m[2];
        CVec3 B = dir.B();
        for (int c = 0; c < 3; ++c) W.at(c, kx, ky, kz) += a * B[c];
    }
    return W;
}

void export_waves_json(const WaveSystem& ws, const std::filesystem::path& path) {
    nlohmann::json j;
    j["n0"] = ws.n0;
    j["provenance"] =
        "two spanning antipodal 12-sets (|Lambda| fixed at 12; a smaller spanning family "
        "would change the constant D)";
    for (int a = 0; a < 2; ++a) {
        nlohmann::json fam;
        fam["parity"] = a;
        fam["n0"] = ws.family[a].n0;
        for (const auto& d : ws.family[a].dirs) {
            nlohmann::json dj;
            dj["m"] = d.m;
            dj["den"] = d.den;
            dj["A"] = {d.A[0].str(), d.A[1].str(), d.A[2].str()};
            CVec3 B = d.B();
            dj["B_re"] = {B[0].real(), B[1].real(), B[2].real()};
            dj["B_im"] = {B[0].imag(), B[1].imag(), B[2].imag()};
            fam["directions"].push_back(dj);
        }
        const GammaSystem& gs = ws.gamma_sys[a];
        fam["r0"] = gs.r0;
        fam["D"] = gs.D;
        fam["n_order"] = gs.n_order;
        for (int i = 0; i < 6; ++i) {
            nlohmann::json gi;
            for (int r = 0; r < 6; ++r) gi.push_back(gs.G_exact[i][r].str());
            fam["g_rows"].push_back(gi);
        }
        j["families"].push_back(fam);
    }
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

}  // namespace forge
