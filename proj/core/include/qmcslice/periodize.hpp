#pragma once

#include <vector>

#include "qmcslice/kernels.hpp"
#include "qmcslice/nfft1d.hpp"

namespace qmcslice {

// Fourier coefficients (k = -n_ft/2 .. n_ft/2-1) of the 1-periodic function that
// equals f(|s| / tau) on [-T, T] and is bridged across [T, 1 - T] by the degree-9
// two-point Taylor polynomial matching derivatives 0..4 at both ends.
// Supported for the thin-plate and Riesz families.
std::vector<Complex> periodized_coefficients(const KernelSpec& kernel, double tau, double threshold, int n_ft,
                                             int oversample = 16);

// Derivatives f^(j)(t), j = 0..4, of the sliced thin-plate / Riesz profiles at t > 0.
std::vector<double> sliced_derivatives(const KernelSpec& kernel, double t);

}  // namespace qmcslice
