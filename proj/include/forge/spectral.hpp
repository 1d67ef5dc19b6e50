#pragma once

#include <array>

#include "forge/field.hpp"

namespace forge {

// L2 orthogonal projection onto divergence-free fields. The k = 0 mode
// is unchanged; for k != 0 the coefficient becomes v - k (k.v)/|k|^2.
Field leray_project(const Field& v);

// Fractional Laplacian (-Delta)^alpha as the Fourier multiplier
// |k|^{2a}, power_sign = +1, or its inverse |k|^{-2a}, power_sign = -1.
// The k = 0 mode maps to zero in both cases (mean-removal convention).
Field frac_laplacian(const Field& f, double alpha, int power_sign);

// Right inverse of div producing symmetric trace-free matrix potentials;
// the mean of v is removed first, so div(R v) = v - mean(v) exactly.
Field inverse_divergence(const Field& v);

// div of a matrix field: (div M)_i = d_j M_ij. For a vector argument
// returns the scalar divergence.
Field divergence(const Field& m);
Field gradient_scalar(const Field& s);        // vector d_i s
Field gradient_vector(const Field& v);        // matrix comp(i,j) = d_j v_i
Field curl(const Field& v);

// Heat semigroup of (-Delta)^alpha: multiplier e^{-|k|^{2a} t}.
Field semigroup_apply(const Field& f, double t, double alpha);

// Zero all modes with any |k_i| > n/3 (2/3 rule).
Field dealias(const Field& f);
void dealias_inplace(Field& f);

std::array<double, 9> field_mean(const Field& f);  // k=0 coefficients

// Drift operator F_alpha(y) = -P div(y (x) y) - (-Delta)^alpha y with the
// quadratic term dealiased. max_div_rel reports the relative spectral
// divergence of the input (callers decide whether to reject).
Field f_alpha(const Field& y, double alpha, double* max_div_rel = nullptr);

// Relative L2 size of k.v_hat(k) against |k||v_hat|; 0 for v == 0.
double divergence_rel(const Field& v);

// L2 pairing <f,g> = sum_k f_hat . conj(g_hat) (real part).
double inner(const Field& f, const Field& g);

// --- pointwise helpers on samples ---------------------------------------
RealField outer_product(const RealField& a, const RealField& b);  // vec,vec -> matrix
RealField pointwise_dot(const RealField& a, const RealField& b);  // vec,vec -> scalar
RealField traceless_part(const RealField& m);
RealField matvec(const RealField& m, const RealField& v);

// Quadratic product of band-limited fields with both inputs and the
// result truncated by the 2/3 rule (alias-free in the kept band).
Field dealiased_outer(const Field& a, const Field& b);

}  // namespace forge
