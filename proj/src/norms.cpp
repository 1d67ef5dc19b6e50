#include "forge/norms.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "forge/spectral.hpp"

namespace forge {

double l2_norm(const Field& f) {
    double s = 0.0;
    for (int c = 0; c < f.comps(); ++c)
        for (const cplx& z : f.comp(c)) s += std::norm(z);
    return std::sqrt(s);
}

double sobolev_norm(const Field& f, double s) {
    double acc = 0.0;
    for_each_k(f.grid(), [&](std::int64_t p, int kx, int ky, int kz) {
        const double k2 = double(kx) * kx + double(ky) * ky + double(kz) * kz;
        const double w = std::pow(1.0 + k2, s);
        for (int c = 0; c < f.comps(); ++c) acc += w * std::norm(f.at(c, p));
    });
    if (!std::isfinite(acc)) throw std::overflow_error("sobolev_norm: overflow at s");
    return std::sqrt(acc);
}

double c0_norm(const RealField& f) {
    const std::int64_t n3 = f.grid.n3();
    double worst = 0.0;
    for (std::int64_t p = 0; p < n3; ++p) {
        double m = 0.0;
        for (int c = 0; c < f.comps(); ++c) m += f.at(c, p) * f.at(c, p);
        worst = std::max(worst, m);
    }
    return std::sqrt(worst);
}

double c0_norm(const Field& f) { return c0_norm(f.to_phys()); }

double holder_seminorm(const RealField& f, double gamma) {
    const int n = f.grid.n;
    const double dx = f.grid.spacing();
    const std::int64_t n3 = f.grid.n3();
    double worst = 0.0;
    for (int m = 0; (1 << m) <= n / 2; ++m) {
        const int shift = 1 << m;
        const double h = shift * dx;
        const double hg = std::pow(h, gamma);
        for (int axis = 0; axis < 3; ++axis) {
            for (std::int64_t p = 0; p < n3; ++p) {
                // shifted flat index along one axis, cyclic
                const int iz = int(p % n);
                const int iy = int((p / n) % n);
                const int ix = int(p / (std::int64_t(n) * n));
                std::int64_t q;
                if (axis == 0) q = f.grid.idx((ix + shift) % n, iy, iz);
                else if (axis == 1) q = f.grid.idx(ix, (iy + shift) % n, iz);
                else q = f.grid.idx(ix, iy, (iz + shift) % n);
                double d2 = 0.0;
                for (int c = 0; c < f.comps(); ++c) {
                    const double d = f.at(c, q) - f.at(c, p);
                    d2 += d * d;
                }
                worst = std::max(worst, d2 / (hg * hg));
            }
        }
    }
    return std::sqrt(worst);
}

namespace {
cplx ipow(cplx z, int m) {
    cplx r{1.0, 0.0};
    for (int i = 0; i < m; ++i) r *= z;
    return r;
}

// max over the grid and over all order-`ord` multi-indices of |D^a f|
double deriv_order_max(const Field& f, int ord) {
    if (ord == 0) return c0_norm(f);
    double worst = 0.0;
    std::vector<std::array<int, 3>> multis;
    for (int a = 0; a <= ord; ++a)
        for (int b = 0; a + b <= ord; ++b) multis.push_back({a, b, ord - a - b});
    const cplx I{0.0, 1.0};
    for (const auto& mi : multis) {
        Field d = f;
        for_each_k(f.grid(), [&](std::int64_t p, int kx, int ky, int kz) {
            cplx m = ipow(I * double(kx), mi[0]) * ipow(I * double(ky), mi[1]) *
                     ipow(I * double(kz), mi[2]);
            for (int c = 0; c < f.comps(); ++c) d.at(c, p) *= m;
        });
        worst = std::max(worst, c0_norm(d));
    }
    return worst;
}
}  // namespace

double cn_norm(const Field& f, int order) {
    // The paper's definition sums seminorms of orders 0..N (its index
    // notation has an apparent typo there; this is the verbatim sum).
    double s = 0.0;
    for (int k = 0; k <= order; ++k) s += deriv_order_max(f, k);
    return s;
}

NormReport norm_report(const Field& f, const std::vector<double>& s_list,
                       const std::vector<double>& gamma_list) {
    NormReport r;
    r.l2 = l2_norm(f);
    RealField phys = f.to_phys();
    r.c0 = c0_norm(phys);
    r.c1 = r.c0 + deriv_order_max(f, 1);
    for (double s : s_list) r.sobolev[s] = sobolev_norm(f, s);
    for (double g : gamma_list) {
        if (!(g > 0.0 && g < 1.0)) throw std::invalid_argument("holder: gamma outside (0,1)");
        r.holder[g] = holder_seminorm(phys, g);
    }
    return r;
}

}  // namespace forge
