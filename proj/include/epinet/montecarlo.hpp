#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "epinet/graph.hpp"
#include "epinet/model.hpp"

namespace epinet {

struct InitSpec {
  enum class Kind { all_infected, fraction, explicit_states };
  Kind kind = Kind::all_infected;
  double fraction = 1.0;
  /// explicit_states: one digit per node (0 S, 1 I, 2 R).
  std::vector<std::uint8_t> digits;

  static InitSpec all_infected() { return {}; }
  static InitSpec with_fraction(double f) { return {Kind::fraction, f, {}}; }
  static InitSpec with_states(std::vector<std::uint8_t> d) { return {Kind::explicit_states, 0.0, std::move(d)}; }
  /// Nodes in `infected` start in I, the rest in S.
  static InitSpec with_infected_set(std::size_t n, const std::vector<std::size_t>& infected);
};

struct SimState {
  std::vector<std::uint8_t> states;
  std::uint32_t t = 0;
  std::uint64_t seed = 0;
  std::uint32_t replicate = 0;
};

/// Stream tags in the last Philox counter word.
inline constexpr std::uint32_t kDynamicsStream = 0;
inline constexpr std::uint32_t kInitStream = 1;

SimState initial_state(const ModelSpec& model, const Graph& g, const InitSpec& init,
                       std::uint64_t seed, std::uint32_t replicate);

/// One synchronous step; every node draws one uniform from its
/// (node, step, replicate) counter and m_i is read from the pre-update state.
SimState mc_step(const ModelSpec& model, const Graph& g, const SimState& state);

struct Counts {
  std::uint32_t s = 0;
  std::uint32_t i = 0;
  std::uint32_t r = 0;
};

Counts count_states(const std::vector<std::uint8_t>& states);

struct TrajectoryRecord {
  std::vector<Counts> rows;  // t = 0..t_max
  /// First t with no infected node, absent when censored.
  std::optional<std::size_t> extinction_step;
};

TrajectoryRecord mc_run(const ModelSpec& model, const Graph& g, const InitSpec& init,
                        std::size_t t_max, std::uint64_t seed, std::uint32_t replicate);

struct EnsembleOptions {
  std::vector<std::size_t> marginal_times;
  /// 0 = hardware concurrency, further capped by EPINET_THREADS.
  unsigned threads = 0;
};

struct EnsembleRow {
  double mean_s = 0.0, mean_i = 0.0, mean_r = 0.0;
  double q05_i = 0.0, q50_i = 0.0, q95_i = 0.0;
};

struct NodeMarginals {
  std::size_t t = 0;
  std::vector<std::uint64_t> infected;  // replicate counts per node
  std::vector<std::uint64_t> recovered;
};

struct EnsembleResult {
  std::size_t n_reps = 0;
  std::vector<EnsembleRow> rows;
  std::vector<std::optional<std::size_t>> extinction;  // per replicate
  std::vector<NodeMarginals> marginals;
  std::size_t extinct_count() const;
};

/// Replicate r runs mc_run(..., master_seed, r); results do not depend on the
/// thread count.
EnsembleResult mc_ensemble(const ModelSpec& model, const Graph& g, const InitSpec& init,
                           std::size_t t_max, std::size_t n_reps, std::uint64_t master_seed,
                           const EnsembleOptions& opts = {});

/// First t with i_count = 0, absent when censored at `cap`.
std::optional<std::size_t> extinction_time(const ModelSpec& model, const Graph& g,
                                           const InitSpec& init, std::uint64_t seed,
                                           std::uint32_t replicate, std::size_t cap);

/// Worker count after applying EPINET_THREADS.
unsigned worker_count(unsigned requested);

}  // namespace epinet
