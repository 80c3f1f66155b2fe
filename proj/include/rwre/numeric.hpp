#pragma once

#include <cmath>
#include <span>
#include <utility>

namespace rwre::numeric {

inline constexpr double kInvPhi = 0.6180339887498949;  // 1/golden ratio

// Minimizer of a unimodal f on [lo, hi], bracket shrunk below tol.
template <class F>
double golden_section_min(F&& f, double lo, double hi, double tol) {
  double c = hi - kInvPhi * (hi - lo);
  double d = lo + kInvPhi * (hi - lo);
  double fc = f(c), fd = f(d);
  while (hi - lo > tol) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kInvPhi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kInvPhi * (hi - lo);
      fd = f(d);
    }
  }
  return 0.5 * (lo + hi);
}

template <class F>
double golden_section_max(F&& f, double lo, double hi, double tol) {
  return golden_section_min([&](double x) { return -f(x); }, lo, hi, tol);
}

// Ternary search for the maximizer of a concave f on [lo, hi].
template <class F>
double ternary_search_max(F&& f, double lo, double hi, double tol) {
  while (hi - lo > tol) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (f(m1) < f(m2)) {
      lo = m1;
    } else {
      hi = m2;
    }
  }
  return 0.5 * (lo + hi);
}

// Boundary point of a predicate that holds at `inside` and fails at
// `outside`; the returned point is within tol of the switch.
template <class Pred>
double bisect(Pred&& holds, double inside, double outside, double tol) {
  while (std::abs(outside - inside) > tol) {
    const double mid = 0.5 * (inside + outside);
    if (holds(mid)) {
      inside = mid;
    } else {
      outside = mid;
    }
  }
  return 0.5 * (inside + outside);
}

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// log(sum exp(x_i)), stable for any spread of exponents.
inline double log_sum_exp(std::span<const double> xs) {
  double m = -INFINITY;
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  CompensatedSum s;
  for (double x : xs) s.add(std::exp(x - m));
  return m + std::log(s.value());
}

inline double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -INFINITY) return a;
  return a + std::log1p(std::exp(b - a));
}

}  // namespace rwre::numeric
