#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "epinet/graph.hpp"
#include "epinet/model.hpp"

namespace epinet {

/// Per-node infection probabilities, plus recovered probabilities when k = 3.
struct MeanFieldPoint {
  Eigen::VectorXd p_i;
  Eigen::VectorXd p_r;  // size 0 for the SIS family
};

MeanFieldPoint zero_point(const ModelSpec& model, std::size_t n);
/// Origin for SIS/SIRS; p_r = theta/(gamma+theta), p_i = 0 for SIV.
MeanFieldPoint base_point(const ModelSpec& model, std::size_t n);
/// (p_r = 0, p_i = 1).
MeanFieldPoint upper_corner(const ModelSpec& model, std::size_t n);

/// Stacked coordinates: p_i for k = 2, [p_r; p_i] for k = 3.
Eigen::VectorXd flatten(const MeanFieldPoint& x);
MeanFieldPoint unflatten(const ModelSpec& model, const Eigen::VectorXd& v);

/// One synchronous application of the variant's map. Throws InvariantError
/// if the output leaves the probability simplex beyond rounding.
MeanFieldPoint mf_step(const ModelSpec& model, const Graph& g, const MeanFieldPoint& x);

struct LinearModel {
  Eigen::MatrixXd matrix;
  MeanFieldPoint base_point;
};

/// Linearization at the disease-free point; for k = 3 blocks are ordered [R; I].
LinearModel mf_linear_model(const ModelSpec& model, const Graph& g);

/// Analytic Jacobian of mf_step at x (same block order as flatten).
Eigen::MatrixXd mf_jacobian(const ModelSpec& model, const Graph& g, const MeanFieldPoint& x);

/// x0 followed by t iterates.
std::vector<MeanFieldPoint> mf_iterate(const ModelSpec& model, const Graph& g,
                                       const MeanFieldPoint& x0, std::size_t t);

enum class Classification { disease_free, endemic, cycle, non_converged };
std::string to_string(Classification c, int period = 0);

struct FixedPointOptions {
  double tol = 1e-12;
  std::size_t cap = 1'000'000;
  /// Damping weight; defaults to 1 for sis-nia/sis-general and 0.5 otherwise.
  std::optional<double> eta;
  std::optional<MeanFieldPoint> start;
  /// Defaults to computing the spectrum when the map dimension is at most 400.
  std::optional<bool> spectrum;
};

struct FixedPointReport {
  MeanFieldPoint point;
  double residual = 0.0;
  std::size_t iterations = 0;
  Classification classification = Classification::non_converged;
  int period = 0;
  std::vector<std::complex<double>> jacobian_spectrum;
  std::optional<double> relation_defect;  // k = 3 endemic points
};

/// sis-nia and sis-general descend monotonically from the all-ones corner (the
/// decrease is checked every step); other variants use damped iteration from
/// the upper corner with cycle detection.
FixedPointReport find_fixed_point(const ModelSpec& model, const Graph& g,
                                  const FixedPointOptions& opts = {});

/// sirs: ||p_r - (delta/gamma) p_i||; siv: distance to the affine p_r(p_i) relation.
/// Absent for the SIS family.
std::optional<double> fixed_point_relation_defect(const ModelSpec& model, const MeanFieldPoint& x);

struct StabilityReport {
  double spectral_radius = 0.0;
  bool stable = false;
  std::complex<double> dominant;
  /// Largest eigenvalue with zero imaginary part (within 1e-9), -inf if none.
  double max_real_eigenvalue = 0.0;
  std::vector<std::complex<double>> eigenvalues;
};

std::vector<std::complex<double>> jacobian_eigenvalues(const ModelSpec& model, const Graph& g,
                                                       const MeanFieldPoint& x);

/// Asserts that `point` is a fixed point (residual <= fixed_tol) before
/// computing the spectrum.
StabilityReport classify_stability(const ModelSpec& model, const Graph& g,
                                   const MeanFieldPoint& point, double fixed_tol = 1e-6);

/// Above threshold: unit-norm Perron vector v of (1-delta)I + beta A (or M)
/// with (L - I) v > 0 checked componentwise. Absent when the ratio is below 1.
std::optional<Eigen::VectorXd> perron_certificate(const ModelSpec& model, const Graph& g);

/// min over infection coordinates of (bounding linear map)(x) - map(x).
double linear_bound_check(const ModelSpec& model, const Graph& g, const MeanFieldPoint& x);

/// The linear map used by linear_bound_check applied to the infection
/// coordinates: (1-delta)p_i + beta A p_i ((1-theta) beta for siv-vd, M p for sis-general).
Eigen::VectorXd linear_bound_map(const ModelSpec& model, const Graph& g, const MeanFieldPoint& x);

}  // namespace epinet
