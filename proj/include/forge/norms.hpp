#pragma once

#include <map>
#include <vector>

#include "forge/field.hpp"

namespace forge {

// Norm estimates of a band-limited field. L2 and H^s are exact Parseval
// sums under the <f,g> = (2pi)^{-3} int f.g normalization (so e^{ik.x}
// has unit L2 norm). C0/C1 are grid maxima of pointwise magnitudes and
// spectral first derivatives; the Hoelder seminorm is the max difference
// quotient over axis-aligned dyadic separations h = 2^m dx up to pi.
struct NormReport {
    double l2 = 0.0;
    double c0 = 0.0;
    double c1 = 0.0;  // c0 + max first-derivative magnitude
    std::map<double, double> sobolev;
    std::map<double, double> holder;
};

NormReport norm_report(const Field& f, const std::vector<double>& s_list = {},
                       const std::vector<double>& gamma_list = {});

double l2_norm(const Field& f);
double sobolev_norm(const Field& f, double s);
double c0_norm(const RealField& f);  // max pointwise Euclidean magnitude
double c0_norm(const Field& f);
double holder_seminorm(const RealField& f, double gamma);

// C^N norm: sum over orders 0..N of the max magnitude of order-k spectral
// derivatives (all multi-indices), per the seminorm-sum convention.
double cn_norm(const Field& f, int order);

}  // namespace forge
