#pragma once

#include <cstdint>
#include <stdexcept>

namespace forge {

inline constexpr double kTwoPi = 6.2831853071795864769252867665590058;
inline constexpr double kPi = 3.1415926535897932384626433832795029;

// Uniform N^3 grid of the 2pi-periodic torus. Wavevectors are integer
// triples with components in [-N/2, N/2); the Nyquist plane |k_i| = N/2
// is kept identically zero, so the usable band is |k_i| <= N/2 - 1.
struct TorusGrid {
    int n = 0;

    TorusGrid() = default;
    explicit TorusGrid(int n_points) : n(n_points) {
        if (n < 8 || n % 2 != 0)
            throw std::invalid_argument("TorusGrid: N must be even and >= 8");
    }

    std::int64_t n3() const { return std::int64_t(n) * n * n; }
    double spacing() const { return kTwoPi / n; }
    int max_wavenumber() const { return n / 2 - 1; }
    // 2/3-rule cutoff used when dealiasing quadratic products.
    int dealias_cutoff() const { return n / 3; }

    // Signed wavenumber of FFT index i (i in [0, n)).
    int wavenumber(int i) const { return i < n / 2 ? i : i - n; }
    // FFT index of signed wavenumber k (k in [-n/2, n/2)).
    int index_of(int k) const { return k >= 0 ? k : k + n; }

    std::int64_t idx(int ix, int iy, int iz) const {
        return (std::int64_t(ix) * n + iy) * n + iz;
    }
    double x(int i) const { return i * spacing(); }

    bool operator==(const TorusGrid& o) const { return n == o.n; }
};

// Loop over all FFT indices, calling fn(flat_index, kx, ky, kz).
template <class Fn>
void for_each_k(const TorusGrid& g, Fn&& fn) {
    std::int64_t p = 0;
    for (int ix = 0; ix < g.n; ++ix) {
        const int kx = g.wavenumber(ix);
        for (int iy = 0; iy < g.n; ++iy) {
            const int ky = g.wavenumber(iy);
            for (int iz = 0; iz < g.n; ++iz, ++p) {
                fn(p, kx, ky, g.wavenumber(iz));
            }
        }
    }
}

}  // namespace forge
