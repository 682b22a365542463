#include "qmcslice/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "qmcslice/special.hpp"

namespace qmcslice {

namespace {

// QUADPACK qk21 abscissae and weights.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525048508, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Piece {
  double a, b, value, err;
  bool operator<(const Piece& o) const { return err < o.err; }
};

Piece gk21(const RealFn& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double resk = fc * kWgk[10];
  double resg = 0.0;
  for (int j = 0; j < 10; ++j) {
    const double x = h * kXgk[j];
    const double f1 = f(c - x);
    const double f2 = f(c + x);
    resk += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  const double value = resk * h;
  const double err = std::fabs((resk - resg) * h);
  return {a, b, value, err};
}

// Wynn epsilon extrapolation of a sequence of partial sums; returns the latest
// diagonal estimate and a crude error measure.
class WynnEpsilon {
 public:
  void push(double s) {
    std::vector<double> next(prev_.size() + 1);
    next[0] = s;
    for (std::size_t k = 1; k < next.size(); ++k) {
      const double diff = next[k - 1] - prev_[k - 1];
      const double before = k >= 2 ? prev_[k - 2] : 0.0;
      next[k] = (diff == 0.0) ? std::numeric_limits<double>::infinity() : before + 1.0 / diff;
      if (!std::isfinite(next[k])) {
        next.resize(k);
        break;
      }
    }
    prev_ = std::move(next);
    // Even columns hold the estimates.
    const std::size_t idx = (prev_.size() - 1) & ~std::size_t{1};
    last_ = estimate_;
    estimate_ = prev_[idx];
    ++count_;
  }
  double estimate() const { return estimate_; }
  double change() const { return count_ < 2 ? std::numeric_limits<double>::infinity() : std::fabs(estimate_ - last_); }

 private:
  std::vector<double> prev_;
  double estimate_ = 0.0;
  double last_ = 0.0;
  int count_ = 0;
};

}  // namespace

QuadResult integrate(const RealFn& f, double a, double b, double abs_tol, double rel_tol, int max_intervals) {
  QuadResult out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::priority_queue<Piece> heap;
  Piece first = gk21(f, a, b);
  heap.push(first);
  double total = first.value;
  double total_err = first.err;
  int n = 1;
  while (total_err > std::max(abs_tol, rel_tol * std::fabs(total)) && n < max_intervals) {
    Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {  // cannot split further
      heap.push(worst);
      break;
    }
    Piece l = gk21(f, worst.a, mid);
    Piece r = gk21(f, mid, worst.b);
    total += l.value + r.value - worst.value;
    total_err += l.err + r.err - worst.err;
    heap.push(l);
    heap.push(r);
    ++n;
  }
  // Re-sum to remove drift from incremental updates.
  CompensatedSum v, e;
  while (!heap.empty()) {
    v.add(heap.top().value);
    e.add(heap.top().err);
    heap.pop();
  }
  out.value = v.value();
  out.abs_error = e.value();
  out.converged = out.abs_error <= std::max(abs_tol, rel_tol * std::fabs(out.value));
  out.evaluations = 21 * (2 * n - 1);
  return out;
}

QuadResult cosine_transform(const RealFn& g, double t, double bulk, double abs_tol) {
  QuadResult out;
  const double w = 2.0 * kPi * t;
  if (t == 0.0) {
    // Non-oscillatory: [0, bulk] plus the mapped tail w = bulk / u.
    QuadResult head = integrate(g, 0.0, bulk, 0.25 * abs_tol);
    QuadResult tail = integrate(
        [&](double u) { return u <= 0.0 ? 0.0 : g(bulk / u) * bulk / (u * u); }, 0.0, 1.0, 0.25 * abs_tol);
    out.value = head.value + tail.value;
    out.abs_error = head.abs_error + tail.abs_error;
    out.converged = head.converged && tail.converged;
    return out;
  }
  const double half = 0.5 / t;
  const double start = std::ceil(bulk / half) * half;
  auto h = [&](double x) { return g(x) * std::cos(w * x); };
  const int max_head = static_cast<int>(std::min(200000.0, 400.0 + 40.0 * start / half));
  QuadResult head = integrate(h, 0.0, start, 0.25 * abs_tol, 1e-14, max_head);
  CompensatedSum partial;
  partial.add(head.value);
  WynnEpsilon eps;
  double err = head.abs_error;
  double lo = start;
  bool tail_done = false;
  double last_term = 0.0;
  for (int k = 0; k < 400; ++k) {
    QuadResult piece = integrate(h, lo, lo + half, 0.05 * abs_tol, 1e-14, 200);
    err += piece.abs_error;
    partial.add(piece.value);
    last_term = piece.value;
    lo += half;
    eps.push(partial.value());
    if (std::fabs(piece.value) < 0.01 * abs_tol) {
      tail_done = true;
      break;
    }
    if (k >= 6 && eps.change() < 0.1 * abs_tol) {
      tail_done = true;
      break;
    }
  }
  out.value = std::fabs(last_term) < 0.01 * abs_tol ? partial.value() : eps.estimate();
  out.abs_error = err + (tail_done ? std::min(eps.change(), std::fabs(last_term)) : std::fabs(last_term));
  out.converged = head.converged && tail_done;
  return out;
}

}  // namespace qmcslice
