#pragma once

// One-dimensional RWRE on {-1, 0, ..., n}: site i steps right with
// probability A(i)/(1+A(i)). Hitting and exit quantities come from the
// potential V(i) = -sum_{k<i} ln A(k) through the resistor picture, in which
// the edge (i-1, i) has resistance e^{V(i)}.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "rwre/error.hpp"
#include "rwre/gw_tree.hpp"
#include "rwre/law.hpp"
#include "rwre/numeric.hpp"
#include "rwre/parallel.hpp"
#include "rwre/random.hpp"
#include "rwre/stats.hpp"

namespace rwre {

class LineEnvironment {
 public:
  explicit LineEnvironment(std::vector<double> marks) : marks_(std::move(marks)) {
    for (double a : marks_)
      if (!(a > 0.0) || !std::isfinite(a)) throw InvalidLaw("line marks must be positive");
    const std::size_t n = marks_.size();
    v_.resize(n + 1);
    m_.resize(n + 1);
    log_prefix_.resize(n + 1);
    numeric::CompensatedSum acc;
    v_[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc.add(-std::log(marks_[i]));
      v_[i + 1] = acc.value();
    }
    m_[0] = v_[0];
    log_prefix_[0] = v_[0];
    for (std::size_t i = 1; i <= n; ++i) {
      m_[i] = std::max(m_[i - 1], v_[i]);
      log_prefix_[i] = numeric::log_add_exp(log_prefix_[i - 1], v_[i]);
    }
  }

  template <class G>
  static LineEnvironment sample(const ALaw& law, std::size_t n, G& g) {
    std::vector<double> marks(n);
    for (auto& a : marks) a = law.sample(g);
    return LineEnvironment(std::move(marks));
  }

  std::size_t size() const { return marks_.size(); }
  const std::vector<double>& marks() const { return marks_; }
  double mark(std::size_t i) const { return marks_.at(i); }

  double V(std::size_t i) const { return v_.at(i); }
  double M(std::size_t i) const { return m_.at(i); }
  double H1(std::size_t i) const { return m_.at(i) - v_.at(i); }
  double H2(std::size_t i, std::size_t p) const {
    if (i > p || p > size()) throw std::out_of_range("H2 needs i <= p <= n");
    double top = v_[i];
    for (std::size_t k = i + 1; k <= p; ++k) top = std::max(top, v_[k]);
    return top - v_[i];
  }

  double forward(std::size_t i) const { return marks_.at(i) / (1.0 + marks_[i]); }
  double backward(std::size_t i) const { return 1.0 / (1.0 + marks_.at(i)); }

  // ln sum_{k<=i} e^{V(k)}
  double log_prefix(std::size_t i) const { return log_prefix_.at(i); }

 private:
  std::vector<double> marks_;
  std::vector<double> v_;
  std::vector<double> m_;
  std::vector<double> log_prefix_;
};

// P_omega^0(T_i < T_{-1}) = 1 / sum_{k<=i} e^{V(k)}.
inline double hit_prob_before_minus1(const LineEnvironment& env, std::size_t i) {
  if (i > env.size()) throw std::out_of_range("target beyond the environment");
  return std::exp(-env.log_prefix(i));
}

// P_omega^j(T_p < T_{-1}) for -1 <= j <= p; j = -1 gives 0.
inline double hit_prob_between(const LineEnvironment& env, long j, std::size_t p) {
  if (p > env.size() || j > static_cast<long>(p)) throw std::out_of_range("need -1 <= j <= p <= n");
  if (j < 0) return 0.0;
  return std::exp(env.log_prefix(static_cast<std::size_t>(j)) - env.log_prefix(p));
}

namespace detail {
inline bool& circuit_fault() {
  static bool fault = false;
  return fault;
}
}  // namespace detail

// Fault injection for the verify suite: perturbs the escape probability in
// the exit-time formula.
inline void inject_circuit_fault(bool on) { detail::circuit_fault() = on; }

// ln E_omega^0[T_{-1} ^ T_n] = ln sum_{i<n} P^0(T_i < T_{-1}) G(i), where the
// Green function at i is the inverse of the escape probability
//   w-(i) P^{i-1}(T_{-1} < T_i) + w+(i) P^{i+1}(T_n < T_i).
inline double log_expected_exit_time(const LineEnvironment& env, std::size_t n) {
  if (n < 1) throw std::invalid_argument("exit time needs n >= 1");
  if (n > env.size()) throw std::out_of_range("exit level beyond the environment");
  if (n == 1) return 0.0;
  // log_suffix[i] = ln sum_{k=i}^{n} e^{V(k)}
  std::vector<double> log_suffix(n + 2, -std::numeric_limits<double>::infinity());
  for (std::size_t k = n + 1; k-- > 0;) log_suffix[k] = numeric::log_add_exp(log_suffix[k + 1], env.V(k));
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = env.mark(i);
    const double log_back = -std::log1p(a);
    const double log_fwd = std::log(a) + log_back;
    const double esc_down = env.V(i) - env.log_prefix(i);
    const double esc_up = env.V(i + 1) - log_suffix[i + 1];
    double log_escape = numeric::log_add_exp(log_back + esc_down, log_fwd + esc_up);
    if (detail::circuit_fault()) log_escape += 1e-3;
    terms[i] = -env.log_prefix(i) - log_escape;
  }
  return numeric::log_sum_exp(terms);
}

inline double expected_exit_time(const LineEnvironment& env, std::size_t n) {
  return std::exp(log_expected_exit_time(env, n));
}

struct LineOracle {
  std::vector<double> h;  // h(i) = P^i(T_n < T_{-1}), i = 0..n-1
  std::vector<double> u;  // u(i) = E^i[T_{-1} ^ T_n]

  // P^0(T_i < T_{-1}) by the strong Markov property: h(0) = P^0(T_i < T_{-1}) h(i).
  double hit(std::size_t i) const { return i == h.size() ? h[0] : h[0] / h[i]; }
  double exit_time() const { return u[0]; }
};

inline constexpr std::size_t kOracleMaxLevel = 10'000;

// Solves (I - P) h = 0 with h(-1) = 0, h(n) = 1 and (I - P) u = 1 with
// u(-1) = u(n) = 0 by tridiagonal elimination.
inline LineOracle oracle_solve(const LineEnvironment& env, std::size_t n) {
  if (n < 1 || n > kOracleMaxLevel) throw std::invalid_argument("oracle needs 1 <= n <= 1e4");
  if (n > env.size()) throw std::out_of_range("oracle level beyond the environment");
  // Row i: -b_i x_{i-1} + x_i - f_i x_{i+1} = rhs_i.
  auto thomas = [&](const std::vector<double>& rhs) {
    std::vector<double> c(n), d(n), x(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double lower = i == 0 ? 0.0 : -env.backward(i);
      const double upper = -env.forward(i);
      const double denom = 1.0 - lower * (i == 0 ? 0.0 : c[i - 1]);
      c[i] = upper / denom;
      d[i] = (rhs[i] - lower * (i == 0 ? 0.0 : d[i - 1])) / denom;
    }
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
  };
  std::vector<double> rhs_h(n, 0.0), rhs_u(n, 1.0);
  rhs_h[n - 1] = env.forward(n - 1);
  return {thomas(rhs_h), thomas(rhs_u)};
}

namespace detail {

// One annealed replicate: exit time of a walk from 0, capped at `cap`.
template <class G>
std::uint64_t line_exit_steps(const LineEnvironment& env, std::size_t n, std::uint64_t cap, G& g) {
  long x = 0;
  const long top = static_cast<long>(n);
  for (std::uint64_t k = 1; k <= cap; ++k) {
    x += uniform01(g) < env.forward(static_cast<std::size_t>(x)) ? 1 : -1;
    if (x < 0 || x >= top) return k;
  }
  return cap + 1;
}

}  // namespace detail

// m(n, lambda) = E[(E_omega^0[T_{-1} ^ T_n])^lambda] over environments.
inline EstimateWithCI m_estimate(const ALaw& a_law, std::size_t n, double lambda,
                                 std::size_t replicates, std::uint64_t seed,
                                 std::size_t workers = 1) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
  if (n < 1 || replicates < 1) throw std::invalid_argument("n and replicates must be >= 1");
  if (lambda == 0.0 || n == 1) return EstimateWithCI::make(1.0, 0.0, replicates, seed);
  const auto xs = map_replicates(replicates, workers, [&](std::size_t r) {
    Rng rng(derive_seed(seed, r));
    const auto env = LineEnvironment::sample(a_law, n, rng);
    return std::exp(lambda * log_expected_exit_time(env, n));
  });
  return EstimateWithCI::from_samples(xs, seed);
}

// p(n, a) = P^0(T_{-1} ^ T_n > a), annealed.
inline EstimateWithCI p_estimate(const ALaw& a_law, std::size_t n, double a,
                                 std::size_t replicates, std::uint64_t seed,
                                 std::size_t workers = 1) {
  if (n < 1 || replicates < 1) throw std::invalid_argument("n and replicates must be >= 1");
  if (a < 1.0) return EstimateWithCI::make(1.0, 0.0, replicates, seed);
  if (n == 1) return EstimateWithCI::make(0.0, 0.0, replicates, seed);
  const auto cap = static_cast<std::uint64_t>(std::floor(a));
  const auto xs = map_replicates(replicates, workers, [&](std::size_t r) {
    Rng rng(derive_seed(seed, r));
    const auto env = LineEnvironment::sample(a_law, n, rng);
    return detail::line_exit_steps(env, n, cap, rng) > cap ? 1.0 : 0.0;
  });
  return EstimateWithCI::from_samples(xs, seed);
}

// sup over n in [1, n_max] of ln(q1^n p(n, a)) / ln a, skipping levels where
// no replicate survived.
struct PExponent {
  double value = -std::numeric_limits<double>::infinity();
  std::size_t argmax = 0;
};

inline PExponent p_exponent(const ALaw& a_law, double q1, double a, std::size_t n_max,
                            std::size_t replicates, std::uint64_t seed, std::size_t workers = 1) {
  if (!(a > 1.0)) throw std::invalid_argument("a must exceed 1");
  PExponent best;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const auto p = p_estimate(a_law, n, a, replicates, derive_seed(seed, n), workers);
    if (p.point <= 0.0) continue;
    const double v = (static_cast<double>(n) * std::log(q1) + std::log(p.point)) / std::log(a);
    if (v > best.value) best = {v, n};
  }
  return best;
}

// Walk on the path from parent(x) to y with the off-path mass removed.
class ProjectedEnvironment {
 public:
  ProjectedEnvironment(MarkedTree& tree, NodeId x, NodeId y) : x_(x), y_(y) {
    if (x == kOrigin || !tree.is_ancestor(x, y)) throw NotAncestor("x must be an ancestor of y");
    for (NodeId v = y; v != x; v = tree.parent(v)) path_.push_back(v);
    path_.push_back(x);
    path_.push_back(tree.parent(x));
    std::reverse(path_.begin(), path_.end());
    // path_[0] = parent(x), path_[i + 1] = x_i.
    const std::size_t p = path_.size() - 2;
    std::vector<double> marks;
    for (std::size_t i = 0; i < p; ++i) {
      const NodeId xi = path_[i + 1];
      const NodeId next = path_[i + 2];
      const auto rec = tree.expand(xi);
      const double fwd = rec.p_children[static_cast<std::size_t>(tree.child_index(next))];
      const double back = rec.p_parent;
      forward_.push_back(fwd / (fwd + back));
      backward_.push_back(back / (fwd + back));
      marks.push_back(tree.mark(next));
    }
    line_ = LineEnvironment(std::move(marks));
  }

  NodeId x() const { return x_; }
  NodeId y() const { return y_; }
  std::size_t length() const { return path_.size() - 2; }  // p
  // parent(x), x_0, ..., x_p.
  const std::vector<NodeId>& path() const { return path_; }
  double forward(std::size_t i) const { return forward_.at(i); }
  double backward(std::size_t i) const { return backward_.at(i); }
  const LineEnvironment& as_line() const { return line_; }

  // P~^{x_j}(T_y < T_parent(x)).
  double hit_y(std::size_t j) const { return hit_prob_between(line_, static_cast<long>(j), length()); }

  // P~^{x_j}(T_parent(x) < T_y) = sum_{j<k<=p} e^{V(k)} / sum_{k<=p} e^{V(k)}.
  double hit_parent(std::size_t j) const {
    std::vector<double> upper;
    for (std::size_t k = j + 1; k <= length(); ++k) upper.push_back(line_.V(k));
    return std::exp(numeric::log_sum_exp(upper) - line_.log_prefix(length()));
  }

 private:
  NodeId x_, y_;
  std::vector<NodeId> path_;
  std::vector<double> forward_, backward_;
  LineEnvironment line_{std::vector<double>{}};
};

inline ProjectedEnvironment project_to_path(MarkedTree& tree, NodeId x, NodeId y) {
  return ProjectedEnvironment(tree, x, y);
}

struct DominationRow {
  std::size_t j = 0;  // start at x_j
  double tree_hit_y = 0.0;
  double projected_hit_y = 0.0;
  double tree_hit_parent = 0.0;
  double projected_hit_parent = 0.0;
};

// Exact hitting probabilities of y and parent(x) on the tree restricted to the
// path plus off-path subtrees cut `truncation` levels below the path; the cut
// leaves absorb and count for neither event.
inline std::vector<DominationRow> path_domination(MarkedTree& tree, NodeId x, NodeId y,
                                                  int truncation = 3) {
  const ProjectedEnvironment proj(tree, x, y);
  const auto& path = proj.path();
  const std::size_t p = proj.length();
  const NodeId target_parent = path.front();
  std::unordered_map<NodeId, int> index;
  std::vector<NodeId> states;
  auto add = [&](NodeId v) {
    index.emplace(v, static_cast<int>(states.size()));
    states.push_back(v);
  };
  std::vector<int> off_depth;  // levels below the path, 0 on the path
  for (std::size_t i = 0; i < p; ++i) {
    add(path[i + 1]);
    off_depth.push_back(0);
  }
  for (std::size_t i = 0; i < p; ++i) {
    const NodeId xi = path[i + 1];
    const NodeId on_path = path[i + 2];
    std::vector<std::pair<NodeId, int>> stack;
    for (int c = 0; c < tree.offspring(xi); ++c) {
      const NodeId child = tree.child(xi, c);
      if (child != on_path) stack.push_back({child, 1});
    }
    while (!stack.empty()) {
      const auto [v, d] = stack.back();
      stack.pop_back();
      if (d > truncation) continue;  // cut leaf: absorbing
      add(v);
      off_depth.push_back(d);
      for (int c = 0; c < tree.offspring(v); ++c) stack.push_back({tree.child(v, c), d + 1});
    }
  }
  const auto n = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, 2);
  for (Eigen::Index s = 0; s < n; ++s) {
    const NodeId v = states[static_cast<std::size_t>(s)];
    const auto rec = tree.expand(v);
    auto route = [&](NodeId to, double prob) {
      if (to == y) {
        rhs(s, 0) += prob;
      } else if (to == target_parent) {
        rhs(s, 1) += prob;
      } else if (auto it = index.find(to); it != index.end()) {
        a(s, it->second) -= prob;
      }
    };
    route(tree.parent(v), rec.p_parent);
    for (int c = 0; c < rec.offspring; ++c)
      route(tree.child(v, c), rec.p_children[static_cast<std::size_t>(c)]);
  }
  const Eigen::MatrixXd sol = a.partialPivLu().solve(rhs);
  std::vector<DominationRow> rows;
  for (std::size_t j = 0; j < p; ++j) {
    DominationRow r;
    r.j = j;
    r.tree_hit_y = sol(static_cast<Eigen::Index>(j), 0);
    r.tree_hit_parent = sol(static_cast<Eigen::Index>(j), 1);
    r.projected_hit_y = proj.hit_y(j);
    r.projected_hit_parent = proj.hit_parent(j);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace rwre
