#include "forge/spectrum.hpp"

#include <cmath>

namespace forge {

double NoiseSpectrum::trace() const {
    double s = 0.0;
    for (int kx = -kmax; kx <= kmax; ++kx)
        for (int ky = -kmax; ky <= kmax; ++ky)
            for (int kz = -kmax; kz <= kmax; ++kz) {
                if (!driven(kx, ky, kz)) continue;
                const double k2 = double(kx) * kx + double(ky) * ky + double(kz) * kz;
                s += 2.0 * q(k2);
            }
    return s;
}

double NoiseSpectrum::weighted_trace() const {
    double s = 0.0;
    for (int kx = -kmax; kx <= kmax; ++kx)
        for (int ky = -kmax; ky <= kmax; ++ky)
            for (int kz = -kmax; kz <= kmax; ++kz) {
                if (!driven(kx, ky, kz)) continue;
                const double k2 = double(kx) * kx + double(ky) * ky + double(kz) * kz;
                s += 2.0 * std::pow(k2, -alpha * rho0()) * q(k2);
            }
    return s;
}

}  // namespace forge
