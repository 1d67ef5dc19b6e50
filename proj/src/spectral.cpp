#include "forge/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace forge {

namespace {
void require_rank(const Field& f, Rank r, const char* op) {
    if (f.rank() != r)
        throw std::invalid_argument(std::string(op) + ": rank mismatch, need " + rank_name(r) +
                                    ", got " + rank_name(f.rank()));
}
}  // namespace

Field leray_project(const Field& v) {
    require_rank(v, Rank::vector, "leray_project");
    Field out = v;
    const TorusGrid& g = v.grid();
    for_each_k(g, [&](std::int64_t p, int kx, int ky, int kz) {
        const double k2 = double(kx) * kx + double(ky) * ky + double(kz) * kz;
        if (k2 == 0.0) return;
        const cplx kdv = double(kx) * v.at(0, p) + double(ky) * v.at(1, p) + double(kz) * v.at(2, p);
        const cplx s = kdv / k2;
        out.at(0, p) -= double(kx) * s;
        out.at(1, p) -= double(ky) * s;
        out.at(2, p) -= double(kz) * s;
    });
    return out;
}

Field frac_laplacian(const Field& f, double alpha, int power_sign) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("frac_laplacian: alpha outside (0,1]");
    if (power_sign != 1 && power_sign != -1)
        throw std::invalid_argument("frac_laplacian: power_sign must be +-1");
    Field out = f;
    const double e = alpha * power_sign;
    for_each_k(f.grid(), [&](std::int64_t p, int kx, int ky, int kz) {
        const double k2 = double(kx) * kx + double(ky) * ky + double(kz) * kz;
        const double m = (k2 == 0.0) ? 0.0 : std::pow(k2, e);
        for (int c = 0; c < f.comps(); ++c) out.at(c, p) *= m;
    });
    return out;
}

Field inverse_divergence(const Field& v) {
    require_rank(v, Rank::vector, "inverse_divergence");
    const TorusGrid& g = v.grid();
    Field out(g, Rank::matrix);
    for_each_k(g, [&](std::int64_t p, int kx, int ky, int kz) {
        const double k2 = double(kx) * kx + double(ky) * ky + double(kz) * kz;
        if (k2 == 0.0) return;  // mean removed
        const double k[3] = {double(kx), double(ky), double(kz)};
        const cplx vh[3] = {v.at(0, p), v.at(1, p), v.at(2, p)};
        const cplx kdv = k[0] * vh[0] + k[1] * vh[1] + k[2] * vh[2];
        const cplx I{0.0, 1.0};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                cplx m = -I * (k[a] * vh[b] + k[b] * vh[a]) / k2;
                const double proj = (a == b ? 1.0 : 0.0) + k[a] * k[b] / k2;
                m += 0.5 * I * kdv / k2 * proj;
                out.at(Field::mat(a, b), p) = m;
            }
    });
    return out;
}

Field divergence(const Field& m) {
    const TorusGrid& g = m.grid();
    const cplx I{0.0, 1.0};
    if (m.rank() == Rank::matrix) {
        Field out(g, Rank::vector);
        for_each_k(g, [&](std::int64_t p, int kx, int ky, int kz) {
            const double k[3] = {double(kx), double(ky), double(kz)};
            for (int a = 0; a < 3; ++a) {
                cplx s = 0.0;
                for (int b = 0; b < 3; ++b) s += k[b] * m.at(Field::mat(a, b), p);
                out.at(a, p) = I * s;
            }
        });
        return out;
    }
    require_rank(m, Rank::vector, "divergence");
    Field out(g, Rank::scalar);
    for_each_k(g, [&](std::int64_t p, int kx, int ky, int kz) {
        out.at(0, p) = I * (double(kx) * m.at(0, p) + double(ky) * m.at(1, p) + double(kz) * m.at(2, p));
    });
    return out;
}

Field gradient_scalar(const Field& s) {
    require_rank(s, Rank::scalar, "gradient_scalar");
    const TorusGrid& g = s.grid();
    Field out(g, Rank::vector);
    const cplx I{0.0, 1.0};
    for_each_k(g, [&](std::int64_t p, int kx, int ky, int kz) {
        const cplx v = s.at(0, p);
        out.at(0, p) = I * double(kx) * v;
        out.at(1, p) = I * double(ky) * v;
        out.at(2, p) = I * double(kz) * v;
    });
    return out;
}

Field gradient_vector(const Field& v) {
    require_rank(v, Rank::vector, "gradient_vector");
    const TorusGrid& g = v.grid();
    Field out(g, Rank::matrix);
    const cplx I{0.0, 1.0};
    for_each_k(g, [&](std::int64_t p, int kx, int ky, int kz) {
        const double k[3] = {double(kx), double(ky), double(kz)};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) out.at(Field::mat(a, b), p) = I * k[b] * v.at(a, p);
    });
    return out;
}

Field curl(const Field& v) {
    require_rank(v, Rank::vector, "curl");
    const TorusGrid& g = v.grid();
    Field out(g, Rank::vector);
    const cplx I{0.0, 1.0};
    for_each_k(g, [&](std::int64_t p, int kx, int ky, int kz) {
        const double k[3] = {double(kx), double(ky), double(kz)};
        const cplx a = v.at(0, p), b = v.at(1, p), c = v.at(2, p);
        out.at(0, p) = I * (k[1] * c - k[2] * b);
        out.at(1, p) = I * (k[2] * a - k[0] * c);
        out.at(2, p) = I * (k[0] * b - k[1] * a);
    });
    return out;
}

Field semigroup_apply(const Field& f, double t, double alpha) {
    if (t < 0.0) throw std::invalid_argument("semigroup_apply: negative t");
    Field out = f;
    for_each_k(f.grid(), [&](std::int64_t p, int kx, int ky, int kz) {
        const double k2 = double(kx) * kx + double(ky) * ky + double(kz) * kz;
        const double m = std::exp(-std::pow(k2, alpha) * t);
        for (int c = 0; c < f.comps(); ++c) out.at(c, p) *= (k2 == 0.0 ? 1.0 : m);
    });
    return out;
}

void dealias_inplace(Field& f) {
    const int kd = f.grid().dealias_cutoff();
    for_each_k(f.grid(), [&](std::int64_t p, int kx, int ky, int kz) {
        if (std::abs(kx) > kd || std::abs(ky) > kd || std::abs(kz) > kd)
            for (int c = 0; c < f.comps(); ++c) f.at(c, p) = 0.0;
    });
}

Field dealias(const Field& f) {
    Field out = f;
    dealias_inplace(out);
    return out;
}

std::array<double, 9> field_mean(const Field& f) {
    std::array<double, 9> m{};
    for (int c = 0; c < f.comps(); ++c) m[c] = f.at(c, std::int64_t(0)).real();
    return m;
}

double divergence_rel(const Field& v) {
    double num = 0.0, den = 0.0;
    for_each_k(v.grid(), [&](std::int64_t p, int kx, int ky, int kz) {
        const double k2 = double(kx) * kx + double(ky) * ky + double(kz) * kz;
        const cplx kdv = double(kx) * v.at(0, p) + double(ky) * v.at(1, p) + double(kz) * v.at(2, p);
        num += std::norm(kdv);
        den += k2 * (std::norm(v.at(0, p)) + std::norm(v.at(1, p)) + std::norm(v.at(2, p)));
    });
    return den == 0.0 ? 0.0 : std::sqrt(num / den);
}

double inner(const Field& f, const Field& g) {
    double s = 0.0;
    for (int c = 0; c < f.comps(); ++c) {
        auto fc = f.comp(c);
        auto gc = g.comp(c);
        for (std::size_t p = 0; p < fc.size(); ++p)
            s += fc[p].real() * gc[p].real() + fc[p].imag() * gc[p].imag();
    }
    return s;
}

Field dealiased_outer(const Field& a, const Field& b) {
    RealField ap = dealias(a).to_phys();
    RealField bp = dealias(b).to_phys();
    Field out = Field::from_phys(outer_product(ap, bp));
    dealias_inplace(out);
    return out;
}

Field f_alpha(const Field& y, double alpha, double* max_div_rel) {
    if (y.rank() != Rank::vector) throw std::invalid_argument("f_alpha: vector input required");
    if (max_div_rel) *max_div_rel = divergence_rel(y);
    Field nl = leray_project(divergence(dealiased_outer(y, y)));
    Field out = frac_laplacian(y, alpha, +1);
    out += nl;
    out *= -1.0;
    return out;
}

RealField outer_product(const RealField& a, const RealField& b) {
    RealField out(a.grid, Rank::matrix);
    const std::int64_t n3 = a.grid.n3();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            auto oc = out.comp(Field::mat(i, j));
            auto ac = a.comp(i);
            auto bc = b.comp(j);
            for (std::int64_t p = 0; p < n3; ++p) oc[p] = ac[p] * bc[p];
        }
    return out;
}

RealField pointwise_dot(const RealField& a, const RealField& b) {
    RealField out(a.grid, Rank::scalar);
    const std::int64_t n3 = a.grid.n3();
    auto oc = out.comp(0);
    for (int i = 0; i < 3; ++i) {
        auto ac = a.comp(i);
        auto bc = b.comp(i);
        for (std::int64_t p = 0; p < n3; ++p) oc[p] += ac[p] * bc[p];
    }
    return out;
}

RealField traceless_part(const RealField& m) {
    RealField out = m;
    const std::int64_t n3 = m.grid.n3();
    for (std::int64_t p = 0; p < n3; ++p) {
        const double tr = (m.at(0, p) + m.at(4, p) + m.at(8, p)) / 3.0;
        out.at(0, p) -= tr;
        out.at(4, p) -= tr;
        out.at(8, p) -= tr;
    }
    return out;
}

RealField matvec(const RealField& m, const RealField& v) {
    RealField out(m.grid, Rank::vector);
    const std::int64_t n3 = m.grid.n3();
    for (int i = 0; i < 3; ++i) {
        auto oc = out.comp(i);
        for (int j = 0; j < 3; ++j) {
            auto mc = m.comp(Field::mat(i, j));
            auto vc = v.comp(j);
            for (std::int64_t p = 0; p < n3; ++p) oc[p] += mc[p] * vc[p];
        }
    }
    return out;
}

}  // namespace forge
