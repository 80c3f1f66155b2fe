#pragma once

// Independent reference computations used only by the tests. None of these
// reuse the library's numerical paths.

#include <Eigen/Dense>
#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <vector>

namespace oracle {

// Lambda for A in {1/2, 2} symmetric: E[A^t] = cosh(t ln 2) <= 1/q1.
inline double symmetric_lambda(double q1) { return 2.0 * std::acosh(1.0 / q1) / std::log(2.0); }

// L(lambda) for the same law: the chord root is -lambda/2 by symmetry.
inline double symmetric_big_L(double lambda) { return std::log(std::cosh(lambda * std::log(2.0) / 2.0)); }

// Speed of the walk on the b-regular tree with constant mark A: the
// generation is a birth-death chain with drift (bA - 1)/(bA + 1) away from
// the root.
inline double regular_tree_speed(int b, double a) { return (b * a - 1.0) / (b * a + 1.0); }

// Never-return probability of the walk on the half-line with constant mark A > 1.
inline double gambler_escape(double a) { return 1.0 - 1.0 / a; }

// P^0(T_n < T_{-1}) for constant mark A on {-1, ..., n}.
inline double geometric_ruin(double a, int n) {
  if (a == 1.0) return 1.0 / (n + 1);
  const double r = 1.0 / a;
  return (1.0 - r) / (1.0 - std::pow(r, n + 1));
}

// Dense solve of the absorbing chain on {-1, ..., n}: returns
// (P^0(T_n < T_{-1}), E^0[T_{-1} ^ T_n]).
inline std::pair<double, double> dense_line_solve(const std::vector<double>& marks, int n) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, 2);
  for (int i = 0; i < n; ++i) {
    const double f = marks[static_cast<std::size_t>(i)] / (1.0 + marks[static_cast<std::size_t>(i)]);
    if (i > 0) a(i, i - 1) -= 1.0 - f;
    if (i + 1 < n) a(i, i + 1) -= f;
    else rhs(i, 0) = f;
    rhs(i, 1) = 1.0;
  }
  const Eigen::MatrixXd x = a.fullPivLu().solve(rhs);
  return {x(0, 0), x(0, 1)};
}

// Exit time from the resistor formulas with plain long double sums.
inline long double naive_exit_time(const std::vector<double>& marks, int n) {
  std::vector<long double> ev(static_cast<std::size_t>(n) + 1);
  long double v = 0.0L;
  for (int i = 0; i <= n; ++i) {
    ev[static_cast<std::size_t>(i)] = std::exp(v);
    if (i < n) v -= std::log(static_cast<long double>(marks[static_cast<std::size_t>(i)]));
  }
  long double total = 0.0L;
  for (int i = 0; i < n; ++i) {
    long double pre = 0.0L, suf = 0.0L;
    for (int k = 0; k <= i; ++k) pre += ev[static_cast<std::size_t>(k)];
    for (int k = i + 1; k <= n; ++k) suf += ev[static_cast<std::size_t>(k)];
    const long double a = marks[static_cast<std::size_t>(i)];
    const long double escape = (1.0L / (1.0L + a)) * ev[static_cast<std::size_t>(i)] / pre +
                               (a / (1.0L + a)) * ev[static_cast<std::size_t>(i) + 1] / suf;
    total += (1.0L / pre) / escape;
  }
  return total;
}

// Child-slot CDF: Beta(1/2, (b+1)/2).
inline double child_slot_cdf(int b, double x) { return boost::math::ibeta(0.5, 0.5 * (b + 1), x); }

}  // namespace oracle
