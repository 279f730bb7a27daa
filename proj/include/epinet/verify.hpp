#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "epinet/graph.hpp"
#include "epinet/model.hpp"

namespace epinet {

/// Unset fields fall back to the suite's own defaults.
struct VerifyOptions {
  std::optional<std::size_t> n_max;
  std::optional<std::size_t> trials;
  std::uint64_t seed = 1;
};

struct SuiteResult {
  std::string name;
  bool pass = false;
  nlohmann::json detail;
  /// First failing instance, serialized for replay.
  std::optional<nlohmann::json> offending;
};

/// Every runnable suite, in the order "all" runs them.
const std::vector<std::string>& suite_names();

/// Throws std::invalid_argument for an unknown name.
SuiteResult run_suite(const std::string& name, const VerifyOptions& opts = {});

nlohmann::json model_json(const ModelSpec& model);
nlohmann::json instance_json(const ModelSpec& model, const Graph& g);

/// Uniform random tree plus independent extra edges with probability `extra`;
/// weights uniform in (0,1] when `weighted`.
Graph random_connected_graph(std::size_t n, std::mt19937_64& rng, double extra = 0.3,
                             bool weighted = false);

/// Connected G(n, p), resampling with successive seeds; the seed used is stored in `used_seed`.
Graph connected_er(std::size_t n, double p, std::uint64_t seed, std::uint64_t* used_seed = nullptr);

}  // namespace epinet
