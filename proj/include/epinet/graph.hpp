#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace epinet {

struct Edge {
  std::uint32_t u;
  std::uint32_t v;
  double weight = 1.0;
};

/// Undirected network with optional edge weights in [0,1].
///
/// Edges are stored once with u < v; neighbor lists are kept in CSR form and
/// sorted by neighbor index. Immutable after construction.
class Graph {
 public:
  Graph() = default;

  /// Throws `std::invalid_argument` on a
  /// self-loop, an index >= n, or a weight outside [0,1]. Duplicate pairs keep
  /// the first occurrence.
  Graph(std::size_t n, std::vector<Edge> edges);

  std::size_t n() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  bool weighted() const noexcept { return weighted_; }

  std::span<const std::uint32_t> neighbors(std::size_t i) const noexcept {
    return {adj_.data() + offsets_[i], adj_.data() + offsets_[i + 1]};
  }
  std::span<const double> neighbor_weights(std::size_t i) const noexcept {
    return {wts_.data() + offsets_[i], wts_.data() + offsets_[i + 1]};
  }
  std::size_t degree(std::size_t i) const noexcept { return offsets_[i + 1] - offsets_[i]; }

  /// Weight of edge (i, j), 0 when absent.
  double weight(std::size_t i, std::size_t j) const noexcept;

  bool connected() const;

  /// y = A x with the weighted adjacency matrix.
  void multiply(std::span<const double> x, std::span<double> y) const;

  /// Same graph with node i renamed to perm[i].
  Graph relabeled(std::span<const std::uint32_t> perm) const;

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::uint32_t> adj_;
  std::vector<double> wts_;
  bool weighted_ = false;
};

/// Line-oriented edge list: "u v" or "u v w", '#' comments, optional "n=<k>".
Graph parse_edge_list(std::string_view text);
std::string format_edge_list(const Graph& g);

Graph read_edge_list_file(const std::string& path);

enum class GeneratorKind { er, geometric, complete, star, path };

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::er;
  std::size_t n = 0;
  double p = 0.0;  // er
  double r = 0.0;  // geometric
};

GeneratorKind parse_generator_kind(std::string_view name);
std::string_view to_string(GeneratorKind kind);

/// Deterministic for a fixed (spec, seed). Geometric graphs use uniform points
/// in the unit square joined when their distance is strictly below r.
Graph generate(const GeneratorSpec& spec, std::uint64_t seed);

struct DegreeStats {
  std::size_t min = 0;
  std::size_t max = 0;
  double mean = 0.0;
};

DegreeStats degree_stats(const Graph& g);

}  // namespace epinet
