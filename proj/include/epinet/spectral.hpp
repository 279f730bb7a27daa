#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "epinet/graph.hpp"

namespace epinet {

struct SpectralReport {
  double lambda_max = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;
  std::vector<double> eigvec;  // unit max entry
  bool connected = true;
};

/// Dominant eigenpair of the weighted adjacency matrix by shifted power
/// iteration from the all-ones vector. Throws ConvergenceError at the cap.
SpectralReport spectral_radius(const Graph& g, double tol = 1e-12, std::size_t cap = 1'000'000);

/// Spectral radius of a square matrix (dense eigen-solve).
double spectral_radius(const Eigen::MatrixXd& m);

/// Largest singular value.
double two_norm(const Eigen::MatrixXd& m);

/// Dense weighted adjacency matrix.
Eigen::MatrixXd adjacency_matrix(const Graph& g);

}  // namespace epinet
