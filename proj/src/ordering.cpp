#include "epinet/ordering.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "epinet/error.hpp"
#include "epinet/meanfield.hpp"

namespace epinet {

RPair build_R_pair(std::size_t n) {
  const std::size_t dim = state_count(2, n);
  const auto d = static_cast<Eigen::Index>(dim);
  RPair p{Eigen::MatrixXi::Zero(d, d), Eigen::MatrixXi::Zero(d, d)};
  for (std::size_t x = 0; x < dim; ++x)
    for (std::size_t y = 0; y < dim; ++y)
      if ((x & ~y) == 0) {
        const auto xi = static_cast<Eigen::Index>(x), yi = static_cast<Eigen::Index>(y);
        p.r(xi, yi) = 1;
        p.r_inv(xi, yi) = std::popcount(y & ~x) % 2 ? -1 : 1;
      }
  return p;
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMatrix> as_matrix(const TransitionMatrix& S) {
  const auto d = static_cast<Eigen::Index>(S.dim);
  return Eigen::Map<const RowMatrix>(S.s.data(), d, d);
}

}  // namespace

OrderReport check_order_preservation(const TransitionMatrix& S, const TransitionMatrix& dual) {
  if (S.k != 2 || dual.k != 2 || S.dim != dual.dim)
    throw ModelError("order preservation applies to two-state chains of equal size");
  const auto rp = build_R_pair(S.n);
  const Eigen::MatrixXd r = rp.r.cast<double>(), r_inv = rp.r_inv.cast<double>();
  const Eigen::MatrixXd t = r_inv * as_matrix(S) * r;
  const std::size_t full = S.dim - 1;
  OrderReport rep;
  rep.min_entry = t.minCoeff();
  for (std::size_t x = 0; x < S.dim; ++x)
    for (std::size_t z = 0; z < S.dim; ++z) {
      const double v = t(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(z));
      if (v <= rep.min_entry) {
        rep.worst_x = x;
        rep.worst_z = z;
      }
      rep.identity_defect = std::max(rep.identity_defect, std::abs(v - dual.at(full ^ z, full ^ x)));
    }
  return rep;
}

std::pair<Dist, Dist> sample_ordered_pair(std::size_t n, std::mt19937_64& rng) {
  const std::size_t dim = state_count(2, n);
  auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  Dist mu(dim);
  double total = 0.0;
  for (auto& v : mu) {
    v = -std::log(1.0 - unit());
    total += v;
  }
  for (auto& v : mu) v /= total;
  Dist up = mu;
  const int moves = 1 + static_cast<int>(rng() % 3);
  for (int m = 0; m < moves; ++m) {
    const std::size_t x = rng() % dim;
    // random superset of x
    const std::size_t y = x | (rng() & (dim - 1));
    const double amount = up[x] * unit();
    up[x] -= amount;
    up[y] += amount;
  }
  return {mu, up};
}

double ordered_pair_slack(const Dist& mu, const Dist& mu2, const TransitionMatrix& S,
                          std::size_t t_max) {
  const auto rp = build_R_pair(S.n);
  const Eigen::MatrixXd r = rp.r.cast<double>();
  const auto sm = as_matrix(S);
  const auto d = static_cast<Eigen::Index>(S.dim);
  Eigen::RowVectorXd diff = Eigen::Map<const Eigen::RowVectorXd>(mu.data(), d) -
                            Eigen::Map<const Eigen::RowVectorXd>(mu2.data(), d);
  double worst = (diff * r).minCoeff();
  for (std::size_t t = 1; t <= t_max; ++t) {
    diff = diff * sm;
    worst = std::min(worst, (diff * r).minCoeff());
  }
  return worst;
}

std::vector<double> u_vector(const std::vector<double>& r) {
  const std::size_t n = r.size();
  const std::size_t dim = state_count(2, n, std::size_t{1} << 30);
  std::vector<double> u(dim, 1.0);
  for (std::size_t x = 1; x < dim; ++x) {
    // peel the lowest set bit
    const auto low = static_cast<std::size_t>(std::countr_zero(x));
    u[x] = u[x & (x - 1)] * (1.0 - r[low]);
  }
  return u;
}

double check_u_bound(const TransitionMatrix& S, const ModelSpec& model, const Graph& g,
                     const std::vector<double>& r) {
  if (model.variant != Variant::sis_nia) throw ModelError("the u(r) bound is stated for sis-nia");
  const auto u = u_vector(r);
  MeanFieldPoint x;
  x.p_i = Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
  const auto phi = mf_step(model, g, x);
  const auto u_phi = u_vector(std::vector<double>(phi.p_i.data(), phi.p_i.data() + phi.p_i.size()));
  std::vector<double> su(S.dim);
  kernels::mat_vec(kernels::active(), S.s.data(), u.data(), su.data(), S.dim);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < S.dim; ++i) worst = std::min(worst, su[i] - u_phi[i]);
  return worst;
}

NonAbsorption non_absorption_check(const ModelSpec& model, const Graph& g,
                                   const TransitionMatrix& S, std::size_t x0, std::size_t t) {
  if (model.variant != Variant::sis_nia) throw ModelError("the non-absorption bound is stated for sis-nia");
  NonAbsorption out;
  const Dist mu = propagate(point_mass(S.dim, x0), S, t);
  out.exact = 1.0 - mu[0];
  auto x = upper_corner(model, g.n());
  for (std::size_t s = 0; s < t; ++s) x = mf_step(model, g, x);
  double healthy = 1.0;
  for (std::size_t i = 0; i < g.n(); ++i)
    if ((x0 >> i) & 1U) healthy *= 1.0 - x.p_i[static_cast<Eigen::Index>(i)];
  out.bound = 1.0 - healthy;
  out.slack = out.bound - out.exact;
  return out;
}

}  // namespace epinet
