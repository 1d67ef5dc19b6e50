#pragma once

#include <complex>

#include "forge/grid.hpp"

namespace forge {

// In-place c2c transforms on one n^3 component, FFTW layout (z fastest).
// Forward normalizes by 1/n^3 so that coefficients are the f_hat_k of
// f(x) = sum_k f_hat_k e^{ik.x}. Plans are cached per grid size with
// FFTW_ESTIMATE (deterministic plan choice); execution via the new-array
// interface is safe to call concurrently on distinct buffers.
void fft_forward(const TorusGrid& g, std::complex<double>* data);
void fft_backward(const TorusGrid& g, std::complex<double>* data);

}  // namespace forge
