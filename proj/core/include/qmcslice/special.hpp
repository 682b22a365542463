#pragma once

#include <cmath>
#include <cstddef>

namespace qmcslice {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

double digamma(double x);
double trigamma(double x);
// H_x = psi(x + 1) + gamma_EM, valid for real x > -1.
double harmonic(double x);
// Inverse standard normal CDF (Wichura AS241), p in (0, 1).
double inv_normal_cdf(double p);
double normal_cdf(double x);

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace qmcslice
