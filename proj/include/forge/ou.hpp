#pragma once

#include <cstdint>
#include <vector>

#include "forge/field.hpp"
#include "forge/rng.hpp"
#include "forge/spectrum.hpp"

namespace forge {

// Per-mode update rule. exact_ou draws the stochastic convolution
// increment with its exact variance; wiener_bridge drives an exponential
// Euler step with raw Wiener increments that refine consistently under
// dyadic Brownian-bridge subdivision (used by the step-halving tests).
enum class NoiseModel { exact_ou, wiener_bridge };

struct OUPath {
    TorusGrid grid;
    NoiseSpectrum spec;
    double h = 0.0;
    std::uint64_t seed = 0;
    NoiseModel model = NoiseModel::exact_ou;
    std::vector<Field> z;  // nt+1 snapshots, divergence-free, z[0] = 0

    int nt() const { return int(z.size()) - 1; }
    double t(int i) const { return h * i; }
    double horizon() const { return h * nt(); }
};

// Exact per-mode OU evolution on counter-based streams keyed
// (seed, mode, step); conjugate modes are mirrored, not drawn. With
// model = wiener_bridge, h must equal h_base / 2^level and the increments
// are the bridge refinement of the level-0 draws, so paths at different
// levels are couplings of one another.
OUPath simulate_ou(const NoiseSpectrum& spec, const TorusGrid& grid, double h, double T,
                   std::uint64_t seed, NoiseModel model = NoiseModel::exact_ou,
                   double h_base = 0.0);

// Orthonormal real basis of the plane orthogonal to k.
void polarization_basis(int kx, int ky, int kz, double e1[3], double e2[3]);

// Brownian-bridge refinement of the coarse Wiener increment of step
// `step`: the sub-increment at dyadic (level, pos), 4 real coordinates
// with per-complex-coordinate variance q * h_base / 2^level.
std::array<double, 4> wiener_bridge_increment(const CounterRng& rng, std::uint64_t step,
                                              int level, int pos, double q, double h_base);

// Discrete Sobolev embedding constants on the grid band:
// C1: H^{(5+s)/2} -> H^{(3+s)/2}, C2: H^{(3+s)/2} -> L^inf (grid max).
struct SobolevConstants {
    double C1 = 1.0;
    double C2 = 1.0;
    double C_S = 1.0;  // max(C1*C2, C2)
};
SobolevConstants sobolev_constants(const TorusGrid& grid, double sigma);

struct StoppingClock {
    double L = 0.0;
    double delta = 0.0;
    double C_S = 1.0;
    double T_L = 0.0;
    // which threshold fired: 0 = capped at L (or horizon), 1 = H^{(5+s)/2},
    // 2 = time-Hoelder
    int fired = 0;
    bool bounds_ok = true;  // pathwise |z|, |grad z|, Hoelder bounds on [0,T_L)
};

// First grid time where ||z(t)||_{H^{(5+sigma)/2}} >= L^{1/4}/C_S or the
// discrete C_t^{1/2-2delta} H^{(3+sigma)/2} quotient (pairs with
// h <= t2-t1 <= 1) reaches L^{1/2}/C_S, capped at L.
StoppingClock stopping_time_TL(const OUPath& path, double L, double delta,
                               const SobolevConstants& cs);

// Norm series used by the CSV output and the moment diagnostics.
struct OUNormSeries {
    std::vector<double> t, l2, h_mid, h_high, holder_quotient;
};
OUNormSeries ou_norm_series(const OUPath& path, double delta);

}  // namespace forge
