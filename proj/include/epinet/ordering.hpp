#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "epinet/chain.hpp"
#include "epinet/graph.hpp"
#include "epinet/model.hpp"

namespace epinet {

/// R_{X,Y} = 1 iff X <= Y (support inclusion); R^-1_{X,Y} = (-1)^{|Y-X|} when X <= Y.
/// Integer entries, so the product check is exact.
struct RPair {
  Eigen::MatrixXi r;
  Eigen::MatrixXi r_inv;
};

RPair build_R_pair(std::size_t n);

struct OrderReport {
  double min_entry = 0.0;       // min over (X,Z) of (R^-1 S R)_{X,Z}
  double identity_defect = 0.0; // max |(R^-1 S R)_{X,Z} - D_{not Z, not X}|
  std::size_t worst_x = 0;
  std::size_t worst_z = 0;
};

/// `dual` is the transition matrix of the chain with the transposed contact
/// matrix (the chain itself when contacts are symmetric).
OrderReport check_order_preservation(const TransitionMatrix& S, const TransitionMatrix& dual);

/// mu' is mu with 1-3 random chunks of mass moved from a state X to a random
/// superset Y of X, so mu <=_st mu'.
std::pair<Dist, Dist> sample_ordered_pair(std::size_t n, std::mt19937_64& rng);

/// min over t <= t_max and all coordinates of (mu S^t - mu' S^t) R.
double ordered_pair_slack(const Dist& mu, const Dist& mu2, const TransitionMatrix& S,
                          std::size_t t_max);

/// u(r)_X = prod_{i in S(X)} (1 - r_i).
std::vector<double> u_vector(const std::vector<double>& r);

/// min over X of (S u(r))_X - u(Phi(r))_X.
double check_u_bound(const TransitionMatrix& S, const ModelSpec& model, const Graph& g,
                     const std::vector<double>& r);

struct NonAbsorption {
  double exact = 0.0;
  double bound = 0.0;
  double slack = 0.0;
};

/// P(state at t is not all-healthy | X0) against 1 - prod_{i in S(X0)} (1 - Phi^t_i(1)).
NonAbsorption non_absorption_check(const ModelSpec& model, const Graph& g,
                                   const TransitionMatrix& S, std::size_t x0, std::size_t t);

}  // namespace epinet
