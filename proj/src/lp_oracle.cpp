#include "epinet/lp_oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <limits>

#include "epinet/error.hpp"

namespace epinet {

std::vector<double> closed_form_marginal_bound(const ModelSpec& model, const Graph& g,
                                               const Marginals& p) {
  const auto n = g.n();
  std::vector<double> out(n);
  if (model.variant == Variant::sis_general) {
    const auto& m = model.m();
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        acc += m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * p.p_i[j];
      out[i] = acc;
    }
    return out;
  }
  double scale = model.b();
  if (model.variant == Variant::siv_vd) scale *= 1.0 - model.th();
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    const auto nb = g.neighbors(i);
    const auto w = g.neighbor_weights(i);
    for (std::size_t k = 0; k < nb.size(); ++k) acc += w[k] * p.p_i[nb[k]];
    out[i] = (1.0 - model.d()) * p.p_i[i] + scale * acc;
  }
  return out;
}

LpResult lp_marginal_bound(const ModelSpec& model, const Graph& g, const Marginals& p) {
  model.validate(g.n());
  const int k = model.k();
  const std::size_t n = g.n();
  const std::size_t dim = state_count(k, n, kLpStateCap);
  if (p.p_i.size() != n || (k == 3 && p.p_r.size() != n))
    throw std::invalid_argument("marginal vector has the wrong length");

  // constraint rows: total mass, infected marginals, then recovered marginals
  const std::size_t m = 1 + n * static_cast<std::size_t>(k - 1);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(dim));
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(m));
  rhs[0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    rhs[static_cast<Eigen::Index>(1 + i)] = p.p_i[i];
    if (k == 3) rhs[static_cast<Eigen::Index>(1 + n + i)] = p.p_r[i];
  }
  // objective per node: probability that node i is infected after one step
  Eigen::MatrixXd obj(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (std::size_t c = 0; c < dim; ++c) {
    const auto x = decode_state(c, k, n);
    const auto ci = static_cast<Eigen::Index>(c);
    a(0, ci) = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i] == 1) a(static_cast<Eigen::Index>(1 + i), ci) = 1.0;
      if (x[i] == 2) a(static_cast<Eigen::Index>(1 + n + i), ci) = 1.0;
      obj(static_cast<Eigen::Index>(i), ci) = node_row(model, x, i, stay_healthy(model, g, x, i))[1];
    }
  }

  LpResult res;
  res.lp_max.assign(n, -std::numeric_limits<double>::infinity());
  res.closed_form = closed_form_marginal_bound(model, g, p);

  std::vector<std::size_t> cols(m);
  for (std::size_t j = 0; j < m; ++j) cols[j] = j;
  Eigen::MatrixXd basis(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  while (true) {
    ++res.bases_tried;
    for (std::size_t j = 0; j < m; ++j) basis.col(static_cast<Eigen::Index>(j)) = a.col(static_cast<Eigen::Index>(cols[j]));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
    if (lu.isInvertible()) {
      const Eigen::VectorXd sol = lu.solve(rhs);
      if (sol.minCoeff() >= -1e-12 && (basis * sol - rhs).cwiseAbs().maxCoeff() <= 1e-10) {
        ++res.bases_feasible;
        for (std::size_t i = 0; i < n; ++i) {
          double v = 0.0;
          for (std::size_t j = 0; j < m; ++j)
            v += obj(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[j])) * sol[static_cast<Eigen::Index>(j)];
          res.lp_max[i] = std::max(res.lp_max[i], v);
        }
      }
    }
    // next combination in lexicographic order
    std::size_t j = m;
    while (j > 0 && cols[j - 1] == dim - m + j - 1) --j;
    if (j == 0) break;
    ++cols[j - 1];
    for (std::size_t t = j; t < m; ++t) cols[t] = cols[t - 1] + 1;
  }
  if (res.bases_feasible == 0) throw ModelError("no distribution has the requested marginals");
  return res;
}

double lp_marginal_max(const ModelSpec& model, const Graph& g, std::size_t i, const Marginals& p) {
  return lp_marginal_bound(model, g, p).lp_max.at(i);
}

}  // namespace epinet
