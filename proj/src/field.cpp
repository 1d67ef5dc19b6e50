#include "forge/field.hpp"

#include <cmath>
#include <stdexcept>

#include "forge/fft.hpp"

namespace forge {

std::string rank_name(Rank r) {
    switch (r) {
        case Rank::scalar: return "scalar";
        case Rank::vector: return "vector";
        case Rank::matrix: return "matrix";
    }
    return "?";
}

Rank rank_from_name(const std::string& s) {
    if (s == "scalar") return Rank::scalar;
    if (s == "vector") return Rank::vector;
    if (s == "matrix") return Rank::matrix;
    throw std::invalid_argument("unknown rank: " + s);
}

void Field::zero_nyquist() {
    const int n = grid_.n;
    const int ny = n / 2;
    for (int c = 0; c < comps(); ++c) {
        auto cc = comp(c);
        for (int ix = 0; ix < n; ++ix)
            for (int iy = 0; iy < n; ++iy) {
                cc[grid_.idx(ix, iy, ny)] = 0.0;
                cc[grid_.idx(ix, ny, iy)] = 0.0;
                cc[grid_.idx(ny, ix, iy)] = 0.0;
            }
    }
}

void Field::make_real() {
    zero_nyquist();
    const int n = grid_.n;
    for (int c = 0; c < comps(); ++c) {
        auto cc = comp(c);
        for (int ix = 0; ix < n; ++ix) {
            const int jx = (n - ix) % n;
            for (int iy = 0; iy < n; ++iy) {
                const int jy = (n - iy) % n;
                for (int iz = 0; iz < n; ++iz) {
                    const int jz = (n - iz) % n;
                    const std::int64_t p = grid_.idx(ix, iy, iz);
                    const std::int64_t q = grid_.idx(jx, jy, jz);
                    if (q < p) continue;
                    const cplx a = cc[p], b = cc[q];
                    const cplx avg = 0.5 * (a + std::conj(b));
                    cc[p] = avg;
                    cc[q] = std::conj(avg);
                }
            }
        }
    }
}

double Field::hermitian_defect() const {
    Field tmp = *this;
    double worst = 0.0;
    for (int c = 0; c < comps(); ++c) {
        std::vector<cplx> buf(tmp.comp(c).begin(), tmp.comp(c).end());
        fft_backward(grid_, buf.data());
        for (const cplx& z : buf) worst = std::max(worst, std::abs(z.imag()));
    }
    return worst;
}

RealField Field::to_phys() const {
    RealField out(grid_, rank_);
    const std::int64_t n3 = grid_.n3();
    std::vector<cplx> buf(n3);
    for (int c = 0; c < comps(); ++c) {
        auto cc = comp(c);
        std::copy(cc.begin(), cc.end(), buf.begin());
        fft_backward(grid_, buf.data());
        auto oc = out.comp(c);
        for (std::int64_t p = 0; p < n3; ++p) oc[p] = buf[p].real();
    }
    return out;
}

Field Field::from_phys(const RealField& f) {
    Field out(f.grid, f.rank);
    const std::int64_t n3 = f.grid.n3();
    std::vector<cplx> buf(n3);
    for (int c = 0; c < out.comps(); ++c) {
        auto fc = f.comp(c);
        for (std::int64_t p = 0; p < n3; ++p) buf[p] = cplx{fc[p], 0.0};
        fft_forward(f.grid, buf.data());
        auto oc = out.comp(c);
        std::copy(buf.begin(), buf.end(), oc.begin());
    }
    out.zero_nyquist();
    return out;
}

Field& Field::operator+=(const Field& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
}
Field& Field::operator-=(const Field& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
}
Field& Field::operator*=(double s) {
    for (auto& z : c_) z *= s;
    return *this;
}

Field operator+(Field a, const Field& b) { a += b; return a; }
Field operator-(Field a, const Field& b) { a -= b; return a; }
Field operator*(double s, Field a) { a *= s; return a; }

}  // namespace forge
