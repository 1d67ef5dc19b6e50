#pragma once

#include <array>
#include <complex>
#include <filesystem>
#include <map>
#include <vector>

#include "forge/field.hpp"
#include "forge/rational.hpp"

namespace forge {

using Vec3Q = std::array<Rat, 3>;
using Vec3 = std::array<double, 3>;
using Mat3 = std::array<double, 9>;  // row-major
using CVec3 = std::array<std::complex<double>, 3>;

inline double mat_at(const Mat3& m, int i, int j) { return m[3 * i + j]; }

// One direction xi in S^2 cap Q^3 with its orthonormal frame. A is the
// rational unit vector normal to xi (A_{-xi} = A_xi); B = (A + i xi x A)/sqrt(2).
struct WaveDirection {
    std::array<int, 3> m;  // integer numerators, xi = m / den
    int den = 1;
    Vec3Q A;
    Vec3Q C;  // xi x A, also rational
    Vec3 xi() const { return {double(m[0]) / den, double(m[1]) / den, double(m[2]) / den}; }
    CVec3 B() const;
};

// 12 directions (6 antipodal pairs) whose Id - xi (x) xi span Sym(3).
struct WaveFamily {
    int parity = 0;
    std::vector<WaveDirection> dirs;      // 12 entries; dirs[2i+1] = -dirs[2i]
    int n0 = 0;                           // least n with n*family in Z^3
    int pair_of(int dir_index) const { return dir_index / 2; }
};

// gamma_xi(R) = sqrt(g_xi(R)) with g linear in R, the unique pairwise
// solution of R = sum_pairs g_i (Id - xi_i (x) xi_i). r0 is the certified
// radius of positivity around Id, D the C^{N0} budget constant.
struct GammaSystem {
    int parity = 0;
    double r0 = 0.0;
    double D = 0.0;
    int n_order = 0;                         // N0 used for D
    std::array<Mat3, 6> G;                   // g_i(R) = <G_i, R>_F
    std::array<std::array<Rat, 6>, 6> G_exact;  // rows: vec6 coefficients
    double g_center(int pair) const;         // g_i(Id)
    double g(const Mat3& R, int pair) const;
    // derivative-magnitude budget ||gamma||_{C^k} pieces, see certify
};

struct WaveSystem {
    std::array<WaveFamily, 2> family;
    std::array<GammaSystem, 2> gamma_sys;
    int n0 = 0;  // common: least n with n*Lambda_a in Z^3 for both a
};

// Deterministic construction of the two families, the gamma systems, r0
// (bisection + exact linear bound, halved for safety) and D.
WaveSystem build_wave_system(int n_order = 9);

// sqrt(g_xi(R)); R must satisfy ||R - Id||_op <= r0.
double gamma_coeff(const GammaSystem& gs, int pair, const Mat3& R);

// Largest r such that min_i g_i over the sampled r-ball stays above the
// certification margin; returned value is already halved.
double certify_r0(const GammaSystem& gs, double bisect_tol = 1e-6);

// W(x) = sum_xi a_xi B_xi e^{i lambda xi . x} as a band-limited field.
// Coefficients must come in conjugate pairs a_{-xi} = conj(a_xi); lambda
// must be a positive multiple of the family's n0 and fit the band.
Field beltrami_field(const WaveFamily& fam, const std::map<int, std::complex<double>>& coeffs,
                     int lambda, const TorusGrid& grid);

void export_waves_json(const WaveSystem& ws, const std::filesystem::path& path);

// 3x3 symmetric helpers (Jacobi)
std::array<double, 3> sym_eigenvalues(const Mat3& m);
double op_norm_sym(const Mat3& m);
double nuclear_norm_sym(const Mat3& m);

}  // namespace forge
