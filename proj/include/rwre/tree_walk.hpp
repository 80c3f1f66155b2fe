#pragma once

// Quenched walk on a MarkedTree, regeneration detection, and the Monte Carlo
// estimators built on them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rwre/error.hpp"
#include "rwre/gw_tree.hpp"
#include "rwre/law.hpp"
#include "rwre/parallel.hpp"
#include "rwre/random.hpp"
#include "rwre/stats.hpp"

namespace rwre {

struct RecordOptions {
  bool positions = true;
  bool occupation = false;
  std::size_t occupation_vertex_cap = 1'000'000;
};

struct WalkTrajectory {
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  std::vector<NodeId> positions;          // X_0..X_n, empty unless recorded
  std::vector<std::int32_t> generations;  // |X_0|..|X_n|
  std::vector<std::size_t> tau;           // tau[l]: first k with |X_k| = l
  std::unordered_map<NodeId, std::uint64_t> occupation;
  bool occupation_complete = true;
  std::vector<std::uint64_t> level_occupation;  // N_l at index l + 1 (l >= -1)

  int final_generation() const { return generations.back(); }
  bool has_positions() const { return !positions.empty(); }
};

// Samples the quenched chain from the root for `steps` steps.
inline WalkTrajectory run_walk(MarkedTree& tree, std::size_t steps, std::uint64_t seed,
                               const RecordOptions& record = {}) {
  if (steps < 1) throw std::invalid_argument("run_walk needs at least one step");
  WalkTrajectory traj;
  traj.seed = seed;
  traj.steps = steps;
  traj.generations.reserve(steps + 1);
  if (record.positions) traj.positions.reserve(steps + 1);
  Rng rng(seed);

  NodeId x = kRoot;
  auto visit = [&](NodeId v, std::size_t k) {
    const int g = tree.depth(v);
    traj.generations.push_back(g);
    if (record.positions) traj.positions.push_back(v);
    if (g >= 0 && static_cast<std::size_t>(g) == traj.tau.size()) traj.tau.push_back(k);
    const auto slot = static_cast<std::size_t>(g + 1);
    if (slot >= traj.level_occupation.size()) traj.level_occupation.resize(slot + 1, 0);
    ++traj.level_occupation[slot];
    if (record.occupation) {
      auto it = traj.occupation.find(v);
      if (it != traj.occupation.end()) {
        ++it->second;
      } else if (traj.occupation.size() < record.occupation_vertex_cap) {
        traj.occupation.emplace(v, 1);
      } else {
        traj.occupation_complete = false;
      }
    }
  };
  visit(x, 0);
  for (std::size_t k = 1; k <= steps; ++k) {
    x = tree.step(x, uniform01(rng));
    visit(x, k);
  }
  if (!record.occupation) traj.occupation_complete = false;
  return traj;
}

struct RegenerationRecord {
  std::size_t time = 0;
  int level = 0;
  bool censored = false;

  friend bool operator==(const RegenerationRecord&, const RegenerationRecord&) = default;
};

// Times k > 0 with nu(X_k) >= 2, k = tau_{|X_k|}, and no step to the parent of
// X_k during (k, min(k + H, n)]. Records whose window is cut by the end of
// the trajectory are flagged censored.
inline std::vector<RegenerationRecord> detect_regenerations(const WalkTrajectory& traj,
                                                            MarkedTree& tree,
                                                            std::size_t horizon) {
  if (!traj.has_positions())
    throw std::invalid_argument("regeneration detection needs recorded positions");
  const auto& gen = traj.generations;
  const std::size_t n = gen.size() - 1;

  // first_drop[k]: first j > k with gen[j] < gen[k]. Inside the subtree of
  // X_k the generation never goes below |X_k|, so the walk steps to the
  // parent of X_k exactly when the generation first drops below |X_k|.
  constexpr std::size_t kNever = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> first_drop(n + 1, kNever);
  std::vector<std::size_t> stack;
  for (std::size_t j = n + 1; j-- > 0;) {
    while (!stack.empty() && gen[stack.back()] >= gen[j]) stack.pop_back();
    first_drop[j] = stack.empty() ? kNever : stack.back();
    stack.push_back(j);
  }

  std::vector<RegenerationRecord> out;
  for (std::size_t k = 1; k <= n; ++k) {
    const int level = gen[k];
    if (level < 0 || traj.tau[static_cast<std::size_t>(level)] != k) continue;
    const std::size_t window_end = std::min(k + horizon, n);
    if (first_drop[k] != kNever && first_drop[k] <= window_end) continue;
    if (tree.offspring(traj.positions[k]) < 2) continue;
    out.push_back({k, level, k + horizon > n});
  }
  return out;
}

namespace detail {

inline void require_transient(const ALaw& a_law, const OffspringLaw& off) {
  if (!is_transient(a_law, off)) throw NotTransient("the walk is recurrent for these laws");
}

inline std::uint64_t tree_seed(std::uint64_t seed, std::size_t r) { return derive_seed(seed, r, 0); }
inline std::uint64_t walk_seed(std::uint64_t seed, std::size_t r) { return derive_seed(seed, r, 1); }

// Generations of the walk at the requested (sorted) times, without storing
// the trajectory.
inline std::vector<int> generations_at(MarkedTree& tree, std::uint64_t seed,
                                       const std::vector<std::size_t>& times) {
  std::vector<int> out;
  out.reserve(times.size());
  Rng rng(seed);
  NodeId x = kRoot;
  std::size_t k = 0;
  for (std::size_t t : times) {
    for (; k < t; ++k) x = tree.step(x, uniform01(rng));
    out.push_back(tree.depth(x));
  }
  return out;
}

}  // namespace detail

// |X_n| at every n of the sorted schedule, one row per replicate; replicate r
// uses its own tree and walk seeds derived from (seed, r).
inline std::vector<std::vector<int>> replicate_generations(const ALaw& a_law,
                                                           const OffspringLaw& off,
                                                           const std::vector<std::size_t>& schedule,
                                                           std::size_t replicates,
                                                           std::uint64_t seed,
                                                           std::size_t workers = 1) {
  detail::require_transient(a_law, off);
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (!std::is_sorted(schedule.begin(), schedule.end())) throw std::invalid_argument("unsorted schedule");
  return map_replicates(replicates, workers, [&](std::size_t r) {
    MarkedTree tree(a_law, off, detail::tree_seed(seed, r));
    return detail::generations_at(tree, detail::walk_seed(seed, r), schedule);
  });
}

inline EstimateWithCI speed_from_generations(const std::vector<std::vector<int>>& gens,
                                             std::size_t column, std::size_t steps,
                                             std::uint64_t seed) {
  std::vector<double> v;
  v.reserve(gens.size());
  for (const auto& g : gens) v.push_back(static_cast<double>(g[column]) / static_cast<double>(steps));
  return EstimateWithCI::from_samples(v, seed);
}

// Mean over replicates of |X_steps| / steps; each replicate owns its tree.
inline EstimateWithCI estimate_speed(const ALaw& a_law, const OffspringLaw& off,
                                     std::size_t steps, std::size_t replicates,
                                     std::uint64_t seed, std::size_t workers = 1) {
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  return speed_from_generations(replicate_generations(a_law, off, {steps}, replicates, seed, workers),
                                0, steps, seed);
}

struct ExponentRow {
  std::size_t n = 0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double iqr = 0.0;
  std::size_t replicates = 0;
};

// ln|X_n| / ln n with |X_n| floored at 1, so walks sitting at the root or
// its parent contribute 0.
inline double escape_exponent(int generation, std::size_t n) {
  return std::log(std::max(1.0, static_cast<double>(generation))) /
         std::log(static_cast<double>(n));
}

inline std::vector<ExponentRow> summarize_exponents(const std::vector<std::size_t>& schedule,
                                                    const std::vector<std::vector<int>>& gens) {
  std::vector<ExponentRow> rows;
  for (std::size_t j = 0; j < schedule.size(); ++j) {
    std::vector<double> e;
    e.reserve(gens.size());
    for (const auto& g : gens) e.push_back(escape_exponent(g[j], schedule[j]));
    ExponentRow row;
    row.n = schedule[j];
    row.median = median(e);
    row.q25 = quantile(e, 0.25);
    row.q75 = quantile(e, 0.75);
    row.iqr = row.q75 - row.q25;
    row.replicates = e.size();
    rows.push_back(row);
  }
  return rows;
}

// Per-n summary of ln|X_n| / ln n over independent replicates.
inline std::vector<ExponentRow> estimate_exponent(const ALaw& a_law, const OffspringLaw& off,
                                                  std::vector<std::size_t> schedule,
                                                  std::size_t replicates, std::uint64_t seed,
                                                  std::size_t workers = 1) {
  if (schedule.empty()) throw std::invalid_argument("empty exponent schedule");
  std::sort(schedule.begin(), schedule.end());
  if (schedule.front() < 2) throw std::invalid_argument("exponent schedule must start at n >= 2");
  return summarize_exponents(
      schedule, replicate_generations(a_law, off, schedule, replicates, seed, workers));
}

// Fraction of walks from `vertex` that avoid its parent for `horizon` steps.
// Biased upward relative to beta(vertex) for finite horizons.
inline EstimateWithCI estimate_beta_mc(MarkedTree& tree, NodeId vertex, std::size_t horizon,
                                       std::size_t replicates, std::uint64_t seed) {
  if (vertex == kOrigin) throw std::invalid_argument("beta is undefined at the origin");
  const NodeId target = tree.parent(vertex);
  std::size_t escaped = 0;
  for (std::size_t r = 0; r < replicates; ++r) {
    Rng rng(derive_seed(seed, r));
    NodeId x = vertex;
    bool hit = false;
    for (std::size_t k = 0; k < horizon; ++k) {
      x = tree.step(x, uniform01(rng));
      if (x == target) {
        hit = true;
        break;
      }
    }
    if (!hit) ++escaped;
  }
  const double p = static_cast<double>(escaped) / static_cast<double>(replicates);
  return EstimateWithCI::make(p, std::sqrt(p * (1.0 - p) / static_cast<double>(replicates)),
                              replicates, seed);
}

// E_Q[beta]: one walk from the root of a fresh tree per replicate, counted as
// escaped when it avoids the origin for `horizon` steps.
inline EstimateWithCI estimate_beta_fresh_roots(const ALaw& a_law, const OffspringLaw& off,
                                                std::size_t horizon, std::size_t replicates,
                                                std::uint64_t seed, std::size_t workers = 1) {
  const auto escaped = map_replicates(replicates, workers, [&](std::size_t r) {
    MarkedTree tree(a_law, off, detail::tree_seed(seed, r));
    return estimate_beta_mc(tree, kRoot, horizon, 1, detail::walk_seed(seed, r)).point;
  });
  return EstimateWithCI::from_samples(escaped, seed);
}

struct BetaBracket {
  double lo = 0.0;
  double hi = 1.0;
};

// Escape probability of the worst-case tree in which every vertex has the
// minimal offspring count and every mark equals ess inf A. The recursion is
// monotone, so this bounds beta from below on every tree of the laws.
inline double beta_floor(const ALaw& a_law, const OffspringLaw& off) {
  const double growth = static_cast<double>(off.min_offspring()) * a_law.ess_inf();
  return growth > 1.0 ? 1.0 - 1.0 / growth : 0.0;
}

// Iterates 1/beta(x) = 1 + 1/sum_i A(x_i) beta(x_i) up from depth d below
// `vertex`, once with boundary 1 (upper bound) and once with the worst-case
// floor (lower bound).
inline BetaBracket estimate_beta_recursion(MarkedTree& tree, NodeId vertex, int depth) {
  if (depth < 0) throw std::invalid_argument("depth must be non-negative");
  const double floor = beta_floor(tree.a_law(), tree.offspring_law());
  auto rec = [&](auto&& self, NodeId v, int remaining) -> std::pair<double, double> {
    if (remaining == 0) return {floor, 1.0};
    double s_lo = 0.0, s_hi = 0.0;
    const int nu = tree.offspring(v);
    for (int i = 0; i < nu; ++i) {
      const NodeId c = tree.child(v, i);
      const auto [lo, hi] = self(self, c, remaining - 1);
      s_lo += tree.mark(c) * lo;
      s_hi += tree.mark(c) * hi;
    }
    return {s_lo / (1.0 + s_lo), s_hi / (1.0 + s_hi)};
  };
  const auto [lo, hi] = rec(rec, vertex, depth);
  return {lo, hi};
}

struct RegenerationStats {
  std::size_t gaps = 0;
  double mean_level_gap = 0.0;
  double mean_time_gap = 0.0;
  double level_gap_stderr = 0.0;
  double time_gap_stderr = 0.0;
  double power_sum = 0.0;  // sum over gaps of (time gap)^lambda
  std::vector<double> level_gaps;
  std::vector<double> time_gaps;
};

// Gap statistics over consecutive uncensored regeneration records.
inline RegenerationStats regeneration_statistics(const std::vector<RegenerationRecord>& records,
                                                 double lambda) {
  std::vector<const RegenerationRecord*> kept;
  for (const auto& r : records)
    if (!r.censored) kept.push_back(&r);
  if (kept.size() < 2)
    throw InsufficientRegenerations("need at least two uncensored regeneration records");
  RegenerationStats s;
  RunningStats level, time;
  for (std::size_t i = 1; i < kept.size(); ++i) {
    const double dl = kept[i]->level - kept[i - 1]->level;
    const double dt = static_cast<double>(kept[i]->time - kept[i - 1]->time);
    s.level_gaps.push_back(dl);
    s.time_gaps.push_back(dt);
    level.add(dl);
    time.add(dt);
    s.power_sum += lambda == 0.0 ? 1.0 : std::pow(dt, lambda);
  }
  s.gaps = kept.size() - 1;
  s.mean_level_gap = level.mean();
  s.mean_time_gap = time.mean();
  s.level_gap_stderr = level.std_error();
  s.time_gap_stderr = time.std_error();
  return s;
}

// E_Q[#{|x| = n : T_x < infinity}] with each walk stopped at tau_{n+K} or at
// the step cap; visits to level n after the walk has reached n + K are
// ignored.
inline EstimateWithCI visited_per_generation(const ALaw& a_law, const OffspringLaw& off,
                                             int level, std::size_t replicates,
                                             std::uint64_t seed, int lookahead = 20,
                                             std::size_t step_cap = 10'000'000,
                                             std::size_t workers = 1) {
  detail::require_transient(a_law, off);
  if (level < 0) throw std::invalid_argument("level must be non-negative");
  const auto counts = map_replicates(replicates, workers, [&](std::size_t r) {
    MarkedTree tree(a_law, off, detail::tree_seed(seed, r));
    Rng rng(detail::walk_seed(seed, r));
    std::unordered_set<NodeId> seen;
    NodeId x = kRoot;
    if (level == 0) seen.insert(x);
    for (std::size_t k = 0; k < step_cap && tree.depth(x) < level + lookahead; ++k) {
      x = tree.step(x, uniform01(rng));
      if (tree.depth(x) == level) seen.insert(x);
    }
    return static_cast<double>(seen.size());
  });
  return EstimateWithCI::from_samples(counts, seed);
}

// Everything one replicate of `simulate` reports.
struct ReplicateSummary {
  std::size_t replicate = 0;
  std::size_t steps = 0;
  int generation = 0;
  std::size_t tau = 0;
  std::vector<int> generations_at;  // at the exponent schedule
  std::size_t regenerations = 0;
  std::size_t censored = 0;
  std::vector<double> level_gaps;
  std::vector<double> time_gaps;

  double censored_rate() const {
    return regenerations ? static_cast<double>(censored) / static_cast<double>(regenerations)
                         : 0.0;
  }
};

inline ReplicateSummary simulate_replicate(const ALaw& a_law, const OffspringLaw& off,
                                           std::size_t steps,
                                           const std::vector<std::size_t>& schedule,
                                           std::size_t horizon, std::uint64_t seed,
                                           std::size_t r) {
  MarkedTree tree(a_law, off, detail::tree_seed(seed, r));
  const auto traj = run_walk(tree, steps, detail::walk_seed(seed, r));
  ReplicateSummary s;
  s.replicate = r;
  s.steps = steps;
  s.generation = traj.final_generation();
  s.tau = traj.tau[static_cast<std::size_t>(std::max(s.generation, 0))];
  for (std::size_t t : schedule) s.generations_at.push_back(traj.generations[std::min(t, steps)]);
  const auto records = detect_regenerations(traj, tree, horizon);
  s.regenerations = records.size();
  for (const auto& rec : records) s.censored += rec.censored ? 1 : 0;
  if (records.size() - s.censored >= 2) {
    const auto stats = regeneration_statistics(records, 1.0);
    s.level_gaps = stats.level_gaps;
    s.time_gaps = stats.time_gaps;
  }
  return s;
}

}  // namespace rwre
