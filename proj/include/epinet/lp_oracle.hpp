#pragma once

#include <cstddef>
#include <vector>

#include "epinet/chain.hpp"
#include "epinet/graph.hpp"
#include "epinet/model.hpp"

namespace epinet {

struct LpResult {
  std::vector<double> lp_max;       // per node: max of P(node infected next) over feasible mu
  std::vector<double> closed_form;  // per node: the linear bound
  std::size_t bases_tried = 0;
  std::size_t bases_feasible = 0;
};

/// Brute-force LP over {mu >= 0 : sum mu = 1, marginals of mu = p} by
/// enumerating every basis of the equality system. `p.p_r` is used for k = 3.
/// Throws ModelError when no distribution has the requested marginals.
LpResult lp_marginal_bound(const ModelSpec& model, const Graph& g, const Marginals& p);

double lp_marginal_max(const ModelSpec& model, const Graph& g, std::size_t i, const Marginals& p);

/// (1-delta) p_i + beta sum_j w_ij p_j, with (1-theta) beta for siv-vd and
/// sum_j m_ij p_j for sis-general.
std::vector<double> closed_form_marginal_bound(const ModelSpec& model, const Graph& g,
                                               const Marginals& p);

/// States allowed in the brute-force LP: 2^4 for k = 2 and 3^3 for k = 3.
inline constexpr std::size_t kLpStateCap = 27;

}  // namespace epinet
