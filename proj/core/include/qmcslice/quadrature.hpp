#pragma once

#include <functional>

namespace qmcslice {

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  bool converged = false;
  int evaluations = 0;
};

using RealFn = std::function<double(double)>;

// Adaptive 21-point Gauss-Kronrod on [a, b] (global subdivision of the worst interval).
QuadResult integrate(const RealFn& f, double a, double b, double abs_tol, double rel_tol = 1e-13,
                     int max_intervals = 4000);

// I(t) = int_0^inf g(w) cos(2 pi w t) dw for g that decays and is eventually monotone
// beyond `bulk`. The range [0, bulk] (rounded up to whole half-periods) is integrated
// adaptively; the tail is summed over half-periods and accelerated by Wynn's epsilon.
QuadResult cosine_transform(const RealFn& g, double t, double bulk, double abs_tol);

}  // namespace qmcslice
