#include "epinet/chain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "epinet/error.hpp"

namespace epinet {

std::size_t state_count(int k, std::size_t n, std::size_t cap) {
  std::size_t dim = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (dim > cap / static_cast<std::size_t>(k)) {
      // report k^n saturated rather than overflowing
      std::size_t req = dim;
      for (std::size_t j = i; j < n && req < (std::size_t{1} << 60); ++j) req *= static_cast<std::size_t>(k);
      throw CapacityError(req, cap);
    }
    dim *= static_cast<std::size_t>(k);
  }
  if (dim > cap) throw CapacityError(dim, cap);
  return dim;
}

std::vector<std::uint8_t> decode_state(std::size_t code, int k, std::size_t n) {
  std::vector<std::uint8_t> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = static_cast<std::uint8_t>(code % static_cast<std::size_t>(k));
    code /= static_cast<std::size_t>(k);
  }
  return d;
}

std::size_t encode_state(const std::vector<std::uint8_t>& digits, int k) {
  std::size_t code = 0;
  for (std::size_t i = digits.size(); i-- > 0;) code = code * static_cast<std::size_t>(k) + digits[i];
  return code;
}

double stay_healthy(const ModelSpec& model, const Graph& g, const std::vector<std::uint8_t>& x,
                    std::size_t i) {
  double q = 1.0;
  if (model.variant == Variant::sis_general) {
    const auto& m = model.m();
    for (std::size_t j = 0; j < x.size(); ++j)
      if (x[j] == 1) q *= 1.0 - m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return q;
  }
  const double beta = model.b();
  const auto nb = g.neighbors(i);
  const auto w = g.neighbor_weights(i);
  for (std::size_t k = 0; k < nb.size(); ++k)
    if (x[nb[k]] == 1) q *= 1.0 - beta * w[k];
  return q;
}

std::array<double, 3> node_row(const ModelSpec& model, const std::vector<std::uint8_t>& x,
                               std::size_t i, double q) {
  const int xi = x[i];
  switch (model.variant) {
    case Variant::sis_nia:
      if (xi == 0) return {q, 1.0 - q, 0.0};
      return {model.d() * q, 1.0 - model.d() * q, 0.0};
    case Variant::sis_ia:
      if (xi == 0) return {q, 1.0 - q, 0.0};
      return {model.d(), 1.0 - model.d(), 0.0};
    case Variant::sis_general:
      return {q, 1.0 - q, 0.0};
    case Variant::sirs:
    case Variant::siv_id:
    case Variant::siv_vd:
      break;
  }
  const double delta = model.d(), gamma = model.g();
  if (xi == 1) return {0.0, 1.0 - delta, delta};
  if (xi == 2) return {gamma, 0.0, 1.0 - gamma};
  if (model.variant == Variant::sirs) return {q, 1.0 - q, 0.0};
  const double theta = model.th();
  if (model.variant == Variant::siv_id) return {q * (1.0 - theta), 1.0 - q, q * theta};
  return {q * (1.0 - theta), (1.0 - q) * (1.0 - theta), theta};
}

double node_transition_prob(const ModelSpec& model, const Graph& g,
                            const std::vector<std::uint8_t>& x, std::size_t i, int y) {
  if (i >= x.size()) throw std::out_of_range("node index out of range");
  if (y < 0 || y >= model.k())
    throw ModelError("digit " + std::to_string(y) + " is not a state of " +
                     std::string(to_string(model.variant)));
  return node_row(model, x, i, stay_healthy(model, g, x, i))[static_cast<std::size_t>(y)];
}

TransitionMatrix build_transition_matrix(const ModelSpec& model, const Graph& g, std::size_t cap) {
  model.validate(g.n());
  TransitionMatrix S;
  S.k = model.k();
  S.n = g.n();
  S.dim = state_count(S.k, S.n, cap);
  S.s.assign(S.dim * S.dim, 0.0);
  const auto k = static_cast<std::size_t>(S.k);
  std::vector<double> buf(S.dim);
  std::vector<std::array<double, 3>> rows(S.n);
  for (std::size_t code = 0; code < S.dim; ++code) {
    const auto x = decode_state(code, S.k, S.n);
    for (std::size_t i = 0; i < S.n; ++i) rows[i] = node_row(model, x, i, stay_healthy(model, g, x, i));
    // Kronecker expansion, node 0 fastest
    double* out = S.s.data() + code * S.dim;
    out[0] = 1.0;
    std::size_t len = 1;
    for (std::size_t i = 0; i < S.n; ++i) {
      for (std::size_t y = k; y-- > 0;) {
        const double p = rows[i][y];
        for (std::size_t j = 0; j < len; ++j) out[y * len + j] = out[j] * p;
      }
      len *= k;
    }
  }
  return S;
}

Dist point_mass(std::size_t dim, std::size_t code) {
  Dist d(dim, 0.0);
  d.at(code) = 1.0;
  return d;
}

Dist propagate(const Dist& mu, const TransitionMatrix& S, std::size_t t, double* drift) {
  if (mu.size() != S.dim) throw std::invalid_argument("distribution length does not match the chain");
  const auto& kt = kernels::active();
  Dist cur = mu, next(S.dim);
  double worst = 0.0;
  for (std::size_t step = 0; step < t; ++step) {
    kernels::vec_mat(kt, cur.data(), S.s.data(), next.data(), S.dim);
    const double total = kt.sum(next.data(), S.dim);
    worst = std::max(worst, std::abs(total - 1.0));
    for (auto& v : next) v = std::max(0.0, v) / total;
    cur.swap(next);
  }
  if (drift) *drift = worst;
  return cur;
}

Marginals marginals(const Dist& mu, int k, std::size_t n) {
  Marginals m;
  m.p_i.assign(n, 0.0);
  if (k == 3) m.p_r.assign(n, 0.0);
  for (std::size_t code = 0; code < mu.size(); ++code) {
    if (mu[code] == 0.0) continue;
    std::size_t c = code;
    for (std::size_t i = 0; i < n; ++i) {
      const auto digit = c % static_cast<std::size_t>(k);
      c /= static_cast<std::size_t>(k);
      if (digit == 1) m.p_i[i] += mu[code];
      else if (digit == 2) m.p_r[i] += mu[code];
    }
  }
  return m;
}

Dist stationary_product_form(const ModelSpec& model, std::size_t n) {
  const double gamma = model.g(), theta = model.th();
  const double ps = gamma / (gamma + theta), pr = theta / (gamma + theta);
  const std::size_t dim = state_count(3, n, std::size_t{1} << 40);
  Dist pi(dim, 0.0);
  for (std::size_t code = 0; code < dim; ++code) {
    double p = 1.0;
    std::size_t c = code;
    for (std::size_t i = 0; i < n && p != 0.0; ++i) {
      const auto digit = c % 3;
      c /= 3;
      p *= digit == 0 ? ps : digit == 1 ? 0.0 : pr;
    }
    pi[code] = p;
  }
  return pi;
}

double stationary_defect(const Dist& pi, const TransitionMatrix& S) {
  Dist next(S.dim);
  kernels::vec_mat(kernels::active(), pi.data(), S.s.data(), next.data(), S.dim);
  double worst = 0.0;
  for (std::size_t i = 0; i < S.dim; ++i) worst = std::max(worst, std::abs(next[i] - pi[i]));
  return worst;
}

Dist stationary(const ModelSpec& model, const Graph& g, const TransitionMatrix& S) {
  Dist pi = is_siv(model.variant) ? stationary_product_form(model, g.n()) : point_mass(S.dim, 0);
  const double defect = stationary_defect(pi, S);
  if (!(defect <= 1e-10))
    throw InvariantError("stationary distribution check failed: max |pi S - pi| = " +
                         std::to_string(defect));
  return pi;
}

double tv_distance(const Dist& a, const Dist& b) {
  if (a.size() != b.size()) throw std::invalid_argument("tv_distance: length mismatch");
  return 0.5 * kernels::active().l1_distance(a.data(), b.data(), a.size());
}

namespace {

std::size_t all_infected_code(int k, std::size_t n) {
  std::size_t code = 0;
  for (std::size_t i = 0; i < n; ++i) code = code * static_cast<std::size_t>(k) + 1;
  return code;
}

constexpr std::size_t kGeneralPiCap = 6561;

}  // namespace

MixingReport mixing_time_exact(const TransitionMatrix& S, const Dist& pi, double eps,
                               std::size_t t_cap) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("epsilon must lie in (0,1)");
  if (pi.size() != S.dim) throw std::invalid_argument("pi length does not match the chain");
  const auto& kt = kernels::active();
  MixingReport rep;
  rep.epsilon = eps;
  const std::size_t dim = S.dim;
  const std::size_t top = all_infected_code(S.k, S.n);

  std::size_t z = dim;
  for (std::size_t c = 0; c < dim; ++c)
    if (pi[c] == 1.0) z = c;

  if (z < dim) {
    // TV(e_X S^t, e_z) = 1 - (S^t)_{X,z}; track that column.
    Dist v = point_mass(dim, z), next(dim);
    for (std::size_t t = 0;; ++t) {
      std::size_t arg = 0;
      for (std::size_t c = 1; c < dim; ++c)
        if (v[c] < v[arg]) arg = c;
      const double d = std::max(0.0, 1.0 - v[arg]);
      rep.distance.push_back(d);
      rep.worst_initial = arg;
      if (v[top] > v[arg] + 1e-12) rep.worst_always_all_infected = false;
      rep.final_distance = d;
      if (d <= eps) {
        rep.t_mix = t;
        rep.reached = true;
        return rep;
      }
      if (t == t_cap) {
        rep.t_mix = t;
        return rep;
      }
      kernels::mat_vec(kt, S.s.data(), v.data(), next.data(), dim);
      v.swap(next);
    }
  }

  if (dim > kGeneralPiCap) throw CapacityError(dim, kGeneralPiCap);
  // rows of S^t for every start, advanced as S * S^(t-1) over the nonzeros of S
  std::vector<std::size_t> row_start{0};
  std::vector<std::uint32_t> cols;
  std::vector<double> vals;
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c)
      if (const double s = S.s[r * dim + c]; s != 0.0) {
        cols.push_back(static_cast<std::uint32_t>(c));
        vals.push_back(s);
      }
    row_start.push_back(cols.size());
  }
  std::vector<double> P(dim * dim, 0.0), Q(dim * dim);
  for (std::size_t r = 0; r < dim; ++r) P[r * dim + r] = 1.0;
  for (std::size_t t = 0;; ++t) {
    double d = 0.0, dtop = 0.0;
    std::size_t arg = 0;
    for (std::size_t r = 0; r < dim; ++r) {
      const double dr = 0.5 * kt.l1_distance(P.data() + r * dim, pi.data(), dim);
      if (dr > d) {
        d = dr;
        arg = r;
      }
      if (r == top) dtop = dr;
    }
    rep.distance.push_back(d);
    rep.worst_initial = arg;
    if (dtop < d - 1e-12) rep.worst_always_all_infected = false;
    rep.final_distance = d;
    if (d <= eps) {
      rep.t_mix = t;
      rep.reached = true;
      return rep;
    }
    if (t == t_cap) {
      rep.t_mix = t;
      return rep;
    }
    std::fill(Q.begin(), Q.end(), 0.0);
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t e = row_start[r]; e < row_start[r + 1]; ++e)
        kt.axpy(vals[e], P.data() + cols[e] * dim, Q.data() + r * dim, dim);
    P.swap(Q);
  }
}

std::size_t infection_free_time(const TransitionMatrix& S, double eps, std::size_t t_cap) {
  const auto& kt = kernels::active();
  Dist v(S.dim), next(S.dim);
  for (std::size_t c = 0; c < S.dim; ++c) {
    const auto digits = decode_state(c, S.k, S.n);
    v[c] = std::find(digits.begin(), digits.end(), 1) == digits.end() ? 1.0 : 0.0;
  }
  for (std::size_t t = 0; t < t_cap; ++t) {
    if (*std::min_element(v.begin(), v.end()) >= 1.0 - eps) return t;
    kernels::mat_vec(kt, S.s.data(), v.data(), next.data(), S.dim);
    v.swap(next);
  }
  return t_cap;
}

}  // namespace epinet
