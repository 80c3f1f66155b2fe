#pragma once

// Linearly edge-reinforced random walk on the rooted b-ary tree (root degree
// b, other vertices degree b + 1) and its random-environment representation
// with Dirichlet transition vectors.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rwre/error.hpp"
#include "rwre/parallel.hpp"
#include "rwre/random.hpp"
#include "rwre/stats.hpp"

namespace rwre {

inline constexpr int kParentEdge = -1;

class UrnState {
 public:
  UrnState(int b, double delta) : b_(b), delta_(delta) {
    if (b < 2) throw std::invalid_argument("LERRW needs b >= 2");
    if (!(delta >= 0.0)) throw std::invalid_argument("reinforcement must be non-negative");
    nodes_.push_back(Node{0, 0, 0, 0.0, static_cast<double>(b)});
  }

  int branching() const { return b_; }
  double delta() const { return delta_; }
  std::uint32_t current() const { return cur_; }
  int depth() const { return nodes_[cur_].depth; }
  std::uint64_t steps() const { return steps_; }

  std::uint32_t parent(std::uint32_t v) const { return nodes_.at(v).parent; }
  int child_index(std::uint32_t v) const {
    if (v == 0) throw std::invalid_argument("the root is nobody's child");
    return static_cast<int>(v - nodes_[nodes_[v].parent].first_child);
  }

  // Weight of the edge from v to its parent (v must not be the root).
  double up_weight(std::uint32_t v) const { return nodes_.at(v).up_weight; }

  double total_weight(std::uint32_t v) const {
    return (v == 0 ? 0.0 : nodes_[v].up_weight) + nodes_[v].child_sum;
  }

  double edge_weight(std::uint32_t v, int edge) const {
    if (edge == kParentEdge) {
      if (v == 0) throw std::invalid_argument("the root has no parent edge");
      return nodes_[v].up_weight;
    }
    const Node& n = nodes_[v];
    return n.first_child == 0 ? 1.0 : nodes_[n.first_child + static_cast<std::uint32_t>(edge)].up_weight;
  }

  // Probability that the next step from the current vertex uses `edge`.
  double move_probability(int edge) const { return edge_weight(cur_, edge) / total_weight(cur_); }

  // Chooses an incident edge with probability proportional to its weight,
  // crosses it and reinforces it by delta. Returns kParentEdge or the child
  // index.
  template <class G>
  int step(G& g) {
    Node& n = nodes_[cur_];
    const double up = cur_ == 0 ? 0.0 : n.up_weight;
    double x = uniform01(g) * (up + n.child_sum);
    int edge;
    if (x < up) {
      edge = kParentEdge;
    } else {
      x -= up;
      if (n.first_child == 0) {
        edge = std::min(static_cast<int>(x), b_ - 1);
      } else {
        edge = b_ - 1;
        for (int i = 0; i < b_ - 1; ++i) {
          x -= nodes_[n.first_child + static_cast<std::uint32_t>(i)].up_weight;
          if (x < 0.0) {
            edge = i;
            break;
          }
        }
      }
    }
    if (edge == kParentEdge) {
      const std::uint32_t p = n.parent;
      n.up_weight += delta_;
      nodes_[p].child_sum += delta_;
      cur_ = p;
    } else {
      const std::uint32_t c = children_of(cur_) + static_cast<std::uint32_t>(edge);
      nodes_[c].up_weight += delta_;
      nodes_[cur_].child_sum += delta_;
      cur_ = c;
    }
    ++steps_;
    return edge;
  }

  // Sum over all edges of (weight - 1); equals steps * delta.
  double excess_weight_sum() const {
    double s = 0.0;
    for (std::size_t v = 1; v < nodes_.size(); ++v) s += nodes_[v].up_weight - 1.0;
    return s;
  }

 private:
  struct Node {
    std::uint32_t parent;
    std::uint32_t first_child;  // 0 while the children are untouched
    std::int32_t depth;
    double up_weight;
    double child_sum;
  };

  std::uint32_t children_of(std::uint32_t v) {
    if (nodes_[v].first_child == 0) {
      const auto first = static_cast<std::uint32_t>(nodes_.size());
      const std::int32_t d = nodes_[v].depth + 1;
      for (int i = 0; i < b_; ++i) nodes_.push_back(Node{v, 0, d, 1.0, static_cast<double>(b_)});
      nodes_[v].first_child = first;
    }
    return nodes_[v].first_child;
  }

  int b_;
  double delta_;
  std::vector<Node> nodes_;
  std::uint32_t cur_ = 0;
  std::uint64_t steps_ = 0;
};

template <class G>
int urn_step(UrnState& state, G& g) {
  return state.step(g);
}

// Dirichlet parameters of the environment at a vertex for reinforcement
// delta: every return to a vertex adds 2 delta to one exit, and the parent
// edge already carries 1 + delta on the first arrival.
struct DirichletParams {
  double parent;
  double child;

  static DirichletParams for_delta(double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("the representation needs delta > 0");
    return {(1.0 + delta) / (2.0 * delta), 1.0 / (2.0 * delta)};
  }
};

struct BetaEnvNode {
  double parent = 0.0;  // 0 at the root
  std::vector<double> children;
};

template <class G>
BetaEnvNode sample_beta_env(int b, G& g, bool has_parent = true, double child_alpha = 0.5,
                            double parent_alpha = 1.0) {
  if (b < 2) throw std::invalid_argument("b must be >= 2");
  BetaEnvNode node;
  node.children.resize(static_cast<std::size_t>(b));
  std::gamma_distribution<double> child_gamma(child_alpha, 1.0);
  double sum = 0.0;
  for (auto& c : node.children) sum += (c = child_gamma(g));
  if (has_parent) {
    std::gamma_distribution<double> parent_gamma(parent_alpha, 1.0);
    node.parent = parent_gamma(g);
    sum += node.parent;
  }
  node.parent /= sum;
  for (auto& c : node.children) c /= sum;
  return node;
}

// Walk on the b-ary tree in Dirichlet environments drawn on first visit.
class BetaEnvWalk {
 public:
  BetaEnvWalk(int b, DirichletParams params) : b_(b), params_(params) {
    nodes_.push_back(Node{0, 0, 0, {}});
  }

  std::uint32_t current() const { return cur_; }
  int depth() const { return nodes_[cur_].depth; }

  template <class G>
  int step(G& g) {
    if (nodes_[cur_].env.children.empty())
      nodes_[cur_].env = sample_beta_env(b_, g, cur_ != 0, params_.child, params_.parent);
    const BetaEnvNode& env = nodes_[cur_].env;
    double x = uniform01(g);
    int edge = b_ - 1;
    if (x < env.parent) {
      edge = kParentEdge;
    } else {
      x -= env.parent;
      for (int i = 0; i < b_ - 1; ++i) {
        x -= env.children[static_cast<std::size_t>(i)];
        if (x < 0.0) {
          edge = i;
          break;
        }
      }
    }
    if (edge == kParentEdge) {
      cur_ = nodes_[cur_].parent;
    } else {
      if (nodes_[cur_].first_child == 0) {
        const auto first = static_cast<std::uint32_t>(nodes_.size());
        const std::int32_t d = nodes_[cur_].depth + 1;
        for (int i = 0; i < b_; ++i) nodes_.push_back(Node{cur_, 0, d, {}});
        nodes_[cur_].first_child = first;
      }
      cur_ = nodes_[cur_].first_child + static_cast<std::uint32_t>(edge);
    }
    return edge;
  }

 private:
  struct Node {
    std::uint32_t parent;
    std::uint32_t first_child;
    std::int32_t depth;
    BetaEnvNode env;
  };

  int b_;
  DirichletParams params_;
  std::vector<Node> nodes_;
  std::uint32_t cur_ = 0;
};

inline char encode_edge(int edge) {
  return edge == kParentEdge ? 'p' : static_cast<char>('0' + edge);
}

struct EquivalenceResult {
  double p_value = 0.0;
  double statistic = 0.0;
  int df = 0;
  std::size_t pooled_cells = 0;
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> cells;  // prefix -> (urn, env)
};

// Chi-square homogeneity test between s-step prefixes of the urn walk and of
// the walk in Dirichlet environments. `child_alpha` overrides the child
// Dirichlet parameter (negative controls).
inline EquivalenceResult equivalence_test(int b, double delta, int s, std::size_t replicates,
                                          std::uint64_t seed,
                                          std::optional<double> child_alpha = std::nullopt) {
  if (s < 1 || s > 10) throw std::invalid_argument("prefix length must lie in [1, 10]");
  DirichletParams params = DirichletParams::for_delta(delta);
  if (child_alpha) params.child = *child_alpha;
  EquivalenceResult out;
  std::string prefix;
  for (std::size_t r = 0; r < replicates; ++r) {
    Rng g(derive_seed(seed, r, 0));
    UrnState urn(b, delta);
    prefix.clear();
    for (int k = 0; k < s; ++k) prefix += encode_edge(urn.step(g));
    ++out.cells[prefix].first;
  }
  for (std::size_t r = 0; r < replicates; ++r) {
    Rng g(derive_seed(seed, r, 1));
    BetaEnvWalk walk(b, params);
    prefix.clear();
    for (int k = 0; k < s; ++k) prefix += encode_edge(walk.step(g));
    ++out.cells[prefix].second;
  }
  const auto chi = chi_square_homogeneity(out.cells);
  out.p_value = chi.p_value;
  out.statistic = chi.statistic;
  out.df = chi.df;
  out.pooled_cells = chi.pooled_cells;
  return out;
}

// Mean of (|X_n| - |X_m|) / (n - m) over urn replicates, m = floor(burn_in n).
// burn_in = 0 gives |X_n| / n.
inline EstimateWithCI lerrw_speed(int b, double delta, std::size_t steps, std::size_t replicates,
                                  std::uint64_t seed, double burn_in = 0.0,
                                  std::size_t workers = 1) {
  if (b < 2 || !(delta > 0.0)) throw std::invalid_argument("need b >= 2 and delta > 0");
  if (!(burn_in >= 0.0 && burn_in < 1.0)) throw std::invalid_argument("burn_in must lie in [0, 1)");
  if (steps < 1 || replicates < 1) throw std::invalid_argument("steps and replicates must be >= 1");
  const auto warm = static_cast<std::size_t>(std::floor(burn_in * static_cast<double>(steps)));
  const auto xs = map_replicates(replicates, workers, [&](std::size_t r) {
    Rng g(derive_seed(seed, r));
    UrnState urn(b, delta);
    int start = 0;
    for (std::size_t k = 0; k < steps; ++k) {
      if (k == warm) start = urn.depth();
      urn.step(g);
    }
    return static_cast<double>(urn.depth() - start) / static_cast<double>(steps - warm);
  });
  return EstimateWithCI::from_samples(xs, seed);
}

// CDF of the parent slot: density (b/2)(1-x)^{b/2-1}.
inline double f0_cdf(int b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return 1.0 - std::pow(1.0 - x, 0.5 * b);
}

// CDF of a child slot, density proportional to x^{-1/2}(1-x)^{(b-1)/2}.
// Integrated numerically after x = u^2 and tabulated once per b.
inline double f1_cdf(int b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  constexpr int kCells = 4096;
  static std::mutex mu;
  static std::map<int, std::vector<double>> cache;
  const std::vector<double>* table;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(b);
    if (it == cache.end()) {
      const double norm = 1.0 / boost::math::beta(0.5, 0.5 * (b + 1));
      auto integrand = [&](double u) { return 2.0 * norm * std::pow(1.0 - u * u, 0.5 * (b - 1)); };
      std::vector<double> cum(kCells + 1, 0.0);
      for (int i = 0; i < kCells; ++i) {
        const double lo = static_cast<double>(i) / kCells, hi = static_cast<double>(i + 1) / kCells;
        cum[i + 1] = cum[i] +
                     boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, lo, hi);
      }
      it = cache.emplace(b, std::move(cum)).first;
    }
    table = &it->second;
  }
  // Whole cells from the table, the last partial cell directly.
  const double u = std::sqrt(x);
  const int cell = std::min(static_cast<int>(u * kCells), kCells - 1);
  const double lo = static_cast<double>(cell) / kCells;
  const double norm = 1.0 / boost::math::beta(0.5, 0.5 * (b + 1));
  const double partial = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      [&](double v) { return 2.0 * norm * std::pow(1.0 - v * v, 0.5 * (b - 1)); }, lo, u);
  return std::min(1.0, (*table)[static_cast<std::size_t>(cell)] + partial);
}

struct HypothesisCheck {
  bool holds = false;
  double tail_index = 0.0;
  double tail_index_lo = 0.0;  // lower 99% bound
  double mc_mean = 0.0;        // sample mean of (sum A_i)^{-1}
  std::size_t samples = 0;
  std::size_t tail_k = 0;
};

// E[(sum_i A_i)^{-1}] < infinity with A_i = w_child_i / w_parent, judged by a
// Hill estimate of the tail index of (sum A_i)^{-1} = w_p / (1 - w_p): the
// check holds when the lower 99% bound exceeds 1.
inline HypothesisCheck check_theorem_errw_hypothesis(int b, std::size_t samples,
                                                     std::uint64_t seed) {
  if (b < 2) throw std::invalid_argument("b must be >= 2");
  if (samples < 100) throw std::invalid_argument("need at least 100 samples");
  Rng g(seed);
  std::vector<double> ys(samples);
  RunningStats mean;
  for (auto& y : ys) {
    const auto env = sample_beta_env(b, g);
    y = env.parent / (1.0 - env.parent);
    mean.add(y);
  }
  HypothesisCheck out;
  out.samples = samples;
  out.tail_k = static_cast<std::size_t>(std::sqrt(static_cast<double>(samples)));
  const auto hill = hill_tail_index(std::move(ys), out.tail_k);
  out.tail_index = hill.index;
  out.tail_index_lo = hill.index - 2.5758293035489004 * hill.std_error;
  out.mc_mean = mean.mean();
  out.holds = out.tail_index_lo > 1.0;
  return out;
}

}  // namespace rwre
