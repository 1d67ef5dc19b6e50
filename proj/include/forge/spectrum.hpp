#pragma once

#include <stdexcept>

#include "forge/grid.hpp"

namespace forge {

// Diagonal power-law noise covariance: GG* acts on each of the two
// divergence-free polarizations of a driven mode 0 < |k|_inf <= kmax as
// multiplication by q_k = |k|^{-2 rho}. Under the unit-mode normalization
// this makes Tr(GG*) = sum_k 2 q_k over driven wavevectors.
struct NoiseSpectrum {
    double rho = 2.0;
    double alpha = 0.25;
    double sigma = 0.25;
    int kmax = 2;

    NoiseSpectrum() = default;
    NoiseSpectrum(double rho_, double alpha_, double sigma_, int kmax_)
        : rho(rho_), alpha(alpha_), sigma(sigma_), kmax(kmax_) {
        if (!(alpha > 0.0 && alpha < 0.5))
            throw std::invalid_argument("NoiseSpectrum: alpha outside (0,1/2)");
        if (sigma <= 0.0) throw std::invalid_argument("NoiseSpectrum: sigma must be positive");
        if (kmax < 1) throw std::invalid_argument("NoiseSpectrum: empty band");
        // weighted-trace condition: 2 alpha rho0 + 2 rho > 3
        if (!(2.0 * alpha * rho0() + 2.0 * rho > 3.0))
            throw std::invalid_argument(
                "NoiseSpectrum: Tr[(-Delta)^{-rho0 alpha} GG*] diverges (2a rho0 + 2rho <= 3)");
    }

    double rho0() const { return (5.0 + 2.0 * sigma - 2.0 * alpha) / (2.0 * alpha); }
    bool driven(int kx, int ky, int kz) const {
        const int a = std::abs(kx), b = std::abs(ky), c = std::abs(kz);
        const int m = a > b ? (a > c ? a : c) : (b > c ? b : c);
        return m > 0 && m <= kmax;
    }
    double q(double k2) const { return k2 == 0.0 ? 0.0 : std::pow(k2, -rho); }

    double trace() const;           // sum of 2 q_k over the driven band
    double weighted_trace() const;  // sum of 2 |k|^{-2 alpha rho0} q_k
};

}  // namespace forge
