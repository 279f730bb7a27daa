#include "epinet/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "epinet/error.hpp"

namespace epinet {

SpectralReport spectral_radius(const Graph& g, double tol, std::size_t cap) {
  SpectralReport rep;
  const auto n = g.n();
  rep.connected = g.connected();
  if (n == 0) return rep;
  if (g.edge_count() == 0) {
    rep.eigvec.assign(n, 1.0);
    return rep;
  }
  std::vector<double> v(n, 1.0), av(n), next(n);
  double lambda = 0.0;
  // A + I keeps bipartite graphs from oscillating
  constexpr double shift = 1.0;
  for (std::size_t it = 1; it <= cap; ++it) {
    g.multiply(v, av);
    double vav = 0.0, vv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      vav += v[i] * av[i];
      vv += v[i] * v[i];
    }
    const double rq = vav / vv;
    double res = 0.0, vmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      res = std::max(res, std::abs(av[i] - rq * v[i]));
      vmax = std::max(vmax, v[i]);
    }
    res /= vmax;
    const double dl = std::abs(rq - lambda);
    lambda = rq;
    rep.iterations = it;
    rep.residual = res;
    if (dl < tol && res < tol) break;
    if (it == cap) throw ConvergenceError("power iteration hit the iteration cap", res);
    double nmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = av[i] + shift * v[i];
      nmax = std::max(nmax, next[i]);
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = next[i] / nmax;
  }
  double vmax = *std::max_element(v.begin(), v.end());
  for (auto& x : v) x /= vmax;
  rep.lambda_max = lambda;
  rep.eigvec = std::move(v);
  return rep;
}

double spectral_radius(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  if (m.isApprox(m.transpose(), 0.0)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double two_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

Eigen::MatrixXd adjacency_matrix(const Graph& g) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.n()),
                                            static_cast<Eigen::Index>(g.n()));
  for (const auto& e : g.edges()) {
    a(e.u, e.v) = e.weight;
    a(e.v, e.u) = e.weight;
  }
  return a;
}

}  // namespace epinet
