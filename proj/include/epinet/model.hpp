#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <limits>
#include <optional>
#include <string_view>

#include "epinet/graph.hpp"

namespace epinet {

enum class Variant { sis_nia, sis_ia, sis_general, sirs, siv_id, siv_vd };

Variant parse_variant(std::string_view name);
std::string_view to_string(Variant v) noexcept;

/// Number of per-node states: 2 for the SIS family, 3 otherwise.
inline int states_per_node(Variant v) noexcept {
  return v == Variant::sis_nia || v == Variant::sis_ia || v == Variant::sis_general ? 2 : 3;
}
inline bool is_siv(Variant v) noexcept { return v == Variant::siv_id || v == Variant::siv_vd; }

struct ModelSpec {
  Variant variant = Variant::sis_nia;
  std::optional<double> beta;
  std::optional<double> delta;
  std::optional<double> gamma;
  std::optional<double> theta;
  std::optional<Eigen::MatrixXd> contact;

  int k() const noexcept { return states_per_node(variant); }

  // Accessors throw ModelError when the field is absent.
  double b() const;
  double d() const;
  double g() const;
  double th() const;
  const Eigen::MatrixXd& m() const;

  /// Rejects missing fields, out-of-range rates, a contact matrix of the wrong
  /// size, and the SIV period-2 case gamma = theta = 1.
  void validate(std::size_t n) const;
};

ModelSpec sis_nia(double beta, double delta);
ModelSpec sis_ia(double beta, double delta);
ModelSpec sis_general(Eigen::MatrixXd contact);
ModelSpec sirs(double beta, double delta, double gamma);
ModelSpec siv_id(double beta, double delta, double gamma, double theta);
ModelSpec siv_vd(double beta, double delta, double gamma, double theta);

/// m_ij = beta * w_ij off the diagonal, m_ii = 1 - delta.
Eigen::MatrixXd contact_from_graph(const Graph& g, double beta, double delta);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Local-stability ratio of the disease-free point; +inf when delta = 0 < beta.
double threshold_ratio(const ModelSpec& model, const Graph& g);
/// Same, with a precomputed lambda_max(A) (ignored for sis-general).
double threshold_ratio(const ModelSpec& model, double lambda_max);

/// Norm whose contraction drives the mixing bound (+inf sentinel handled by the caller).
double contraction_norm(const ModelSpec& model, const Graph& g);
double contraction_norm(const ModelSpec& model, double lambda_max);

/// log(N/eps) / -log(norm), N = n for SIS and 2n otherwise; +inf when norm >= 1.
double mixing_time_bound(const ModelSpec& model, const Graph& g, double eps);
double mixing_time_bound(const ModelSpec& model, std::size_t n, double lambda_max, double eps);

/// Largest singular value of [[a, d], [0, b]].
double upper_triangular_2x2_norm(double a, double d, double b);

}  // namespace epinet
