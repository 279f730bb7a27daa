#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "epinet/graph.hpp"
#include "epinet/kernels.hpp"
#include "epinet/model.hpp"

namespace epinet {

/// Default cap on the number of states of a dense chain (k^n). 2^13 states
/// keep one dense matrix at 512 MiB.
inline constexpr std::size_t kDefaultStateCap = 8192;

/// k^n, or throws CapacityError when it exceeds `cap`.
std::size_t state_count(int k, std::size_t n, std::size_t cap = kDefaultStateCap);

/// Digit i (base k) of `code` is the state of node i; node 0 is least significant.
std::vector<std::uint8_t> decode_state(std::size_t code, int k, std::size_t n);
std::size_t encode_state(const std::vector<std::uint8_t>& digits, int k);

/// Probability of stay-healthy pressure on node i: prod over infected j of (1 - beta w_ij),
/// or prod over infected j of (1 - m_ij) for sis-general.
double stay_healthy(const ModelSpec& model, const Graph& g, const std::vector<std::uint8_t>& x,
                    std::size_t i);

/// Next-state distribution of node i over digits 0..k-1 given the whole state.
std::array<double, 3> node_row(const ModelSpec& model, const std::vector<std::uint8_t>& x,
                               std::size_t i, double q);
double node_transition_prob(const ModelSpec& model, const Graph& g,
                            const std::vector<std::uint8_t>& x, std::size_t i, int y);

/// Dense row-major transition matrix over k^n states.
struct TransitionMatrix {
  int k = 2;
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> s;

  double at(std::size_t r, std::size_t c) const { return s[r * dim + c]; }
  const double* row(std::size_t r) const { return s.data() + r * dim; }
};

TransitionMatrix build_transition_matrix(const ModelSpec& model, const Graph& g,
                                         std::size_t cap = kDefaultStateCap);

using Dist = std::vector<double>;

Dist point_mass(std::size_t dim, std::size_t code);

/// mu S^t, renormalized each step; the largest normalization drift is stored in `drift`.
Dist propagate(const Dist& mu, const TransitionMatrix& S, std::size_t t, double* drift = nullptr);

struct Marginals {
  std::vector<double> p_i;
  std::vector<double> p_r;  // empty for k = 2
};

Marginals marginals(const Dist& mu, int k, std::size_t n);

/// e_0 for SIS/SIRS, the product form for SIV. Throws InvariantError when
/// pi S = pi fails beyond 1e-10.
Dist stationary(const ModelSpec& model, const Graph& g, const TransitionMatrix& S);
Dist stationary_product_form(const ModelSpec& model, std::size_t n);
/// max |(pi S - pi)_X|
double stationary_defect(const Dist& pi, const TransitionMatrix& S);

double tv_distance(const Dist& a, const Dist& b);

struct MixingReport {
  std::size_t t_mix = 0;
  bool reached = false;
  double epsilon = 0.0;
  double final_distance = 1.0;
  std::size_t worst_initial = 0;
  // for every t examined, the worst initial was the all-infected state (ties within 1e-12)
  bool worst_always_all_infected = true;
  std::vector<double> distance;  // d(t), t = 0..t_mix
};

/// Smallest t with max over point-mass initials of TV(e_X S^t, pi) <= eps. TV
/// is convex in the initial distribution, so point masses attain the sup.
MixingReport mixing_time_exact(const TransitionMatrix& S, const Dist& pi, double eps,
                               std::size_t t_cap = 100000);

/// Smallest t with P(no infected node at t | X) >= 1 - eps for every start X;
/// t_cap when never reached.
std::size_t infection_free_time(const TransitionMatrix& S, double eps, std::size_t t_cap = 100000);

}  // namespace epinet
