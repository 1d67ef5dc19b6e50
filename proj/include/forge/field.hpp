#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "forge/grid.hpp"

namespace forge {

enum class Rank { scalar, vector, matrix };

inline int rank_comps(Rank r) {
    switch (r) {
        case Rank::scalar: return 1;
        case Rank::vector: return 3;
        case Rank::matrix: return 9;
    }
    return 0;
}
std::string rank_name(Rank r);
Rank rank_from_name(const std::string& s);

using cplx = std::complex<double>;

// Grid samples of a real field (component-major, FFTW point order).
struct RealField {
    TorusGrid grid;
    Rank rank = Rank::scalar;
    std::vector<double> v;

    RealField() = default;
    RealField(TorusGrid g, Rank r)
        : grid(g), rank(r), v(std::size_t(rank_comps(r)) * g.n3(), 0.0) {}

    int comps() const { return rank_comps(rank); }
    double& at(int c, std::int64_t p) { return v[std::size_t(c) * grid.n3() + p]; }
    double at(int c, std::int64_t p) const { return v[std::size_t(c) * grid.n3() + p]; }
    std::span<double> comp(int c) { return {v.data() + std::size_t(c) * grid.n3(), std::size_t(grid.n3())}; }
    std::span<const double> comp(int c) const { return {v.data() + std::size_t(c) * grid.n3(), std::size_t(grid.n3())}; }
};

// Band-limited field on the torus, carried by its Fourier coefficients.
// Real-valuedness is the invariant coeff(k) = conj(coeff(-k)); the Nyquist
// plane is kept at zero so the band is |k_i| <= N/2 - 1. Scalar, vector
// and 3x3 matrix fields share the carrier; matrix components are stored
// row-major, comp(i,j) = 3*i + j.
class Field {
  public:
    Field() = default;
    Field(TorusGrid g, Rank r)
        : grid_(g), rank_(r), c_(std::size_t(rank_comps(r)) * g.n3(), cplx{0.0, 0.0}) {}

    const TorusGrid& grid() const { return grid_; }
    Rank rank() const { return rank_; }
    int comps() const { return rank_comps(rank_); }
    static int mat(int i, int j) { return 3 * i + j; }

    cplx& at(int c, std::int64_t p) { return c_[std::size_t(c) * grid_.n3() + p]; }
    cplx at(int c, std::int64_t p) const { return c_[std::size_t(c) * grid_.n3() + p]; }
    cplx& at(int c, int kx, int ky, int kz) {
        return at(c, grid_.idx(grid_.index_of(kx), grid_.index_of(ky), grid_.index_of(kz)));
    }
    cplx at(int c, int kx, int ky, int kz) const {
        return c_[std::size_t(c) * grid_.n3() +
                  grid_.idx(grid_.index_of(kx), grid_.index_of(ky), grid_.index_of(kz))];
    }
    std::span<cplx> comp(int c) { return {c_.data() + std::size_t(c) * grid_.n3(), std::size_t(grid_.n3())}; }
    std::span<const cplx> comp(int c) const { return {c_.data() + std::size_t(c) * grid_.n3(), std::size_t(grid_.n3())}; }

    // Hermitian-symmetrize (coeff(k) <- average with conj(coeff(-k)))
    // and zero the Nyquist plane.
    void make_real();
    void zero_nyquist();
    // Largest |Im f(x)| the coefficients would produce; diagnostic.
    double hermitian_defect() const;

    RealField to_phys() const;
    static Field from_phys(const RealField& f);

    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(double s);

  private:
    TorusGrid grid_;
    Rank rank_ = Rank::scalar;
    std::vector<cplx> c_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

}  // namespace forge
