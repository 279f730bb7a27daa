#include "epinet/meanfield.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "epinet/error.hpp"
#include "epinet/spectral.hpp"

namespace epinet {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index idx(std::size_t i) { return static_cast<Index>(i); }

// Xi_i = 1 - prod_{j in N_i} (1 - beta w_ij x_j)
VectorXd infection_pressure(const Graph& g, double beta, const VectorXd& x) {
  const auto n = g.n();
  VectorXd xi(idx(n));
  for (std::size_t i = 0; i < n; ++i) {
    double p = 1.0;
    const auto nb = g.neighbors(i);
    const auto w = g.neighbor_weights(i);
    for (std::size_t k = 0; k < nb.size(); ++k) p *= 1.0 - beta * w[k] * x[nb[k]];
    xi[idx(i)] = 1.0 - p;
  }
  return xi;
}

// d Xi_i / d x_j, dense.
MatrixXd pressure_gradient(const Graph& g, double beta, const VectorXd& x, const VectorXd& xi) {
  const auto n = g.n();
  MatrixXd d = MatrixXd::Zero(idx(n), idx(n));
  std::vector<double> pre, suf;
  for (std::size_t i = 0; i < n; ++i) {
    const auto nb = g.neighbors(i);
    const auto w = g.neighbor_weights(i);
    bool printed = true;
    for (std::size_t k = 0; k < nb.size(); ++k)
      if (1.0 - beta * w[k] * x[nb[k]] < 1e-8) printed = false;
    if (printed) {
      const double stay = 1.0 - xi[idx(i)];
      for (std::size_t k = 0; k < nb.size(); ++k)
        d(idx(i), nb[k]) = stay * beta * w[k] / (1.0 - beta * w[k] * x[nb[k]]);
      continue;
    }
    // product rule without division
    const auto m = nb.size();
    pre.assign(m + 1, 1.0);
    suf.assign(m + 1, 1.0);
    for (std::size_t k = 0; k < m; ++k) pre[k + 1] = pre[k] * (1.0 - beta * w[k] * x[nb[k]]);
    for (std::size_t k = m; k-- > 0;) suf[k] = suf[k + 1] * (1.0 - beta * w[k] * x[nb[k]]);
    for (std::size_t k = 0; k < m; ++k) d(idx(i), nb[k]) = beta * w[k] * pre[k] * suf[k + 1];
  }
  return d;
}

VectorXd general_map(const MatrixXd& m, const VectorXd& x) {
  const Index n = m.rows();
  VectorXd out(n);
  for (Index i = 0; i < n; ++i) {
    double p = 1.0;
    for (Index j = 0; j < n; ++j) p *= 1.0 - m(i, j) * x[j];
    out[i] = 1.0 - p;
  }
  return out;
}

MatrixXd general_jacobian(const MatrixXd& m, const VectorXd& x) {
  const Index n = m.rows();
  MatrixXd d = MatrixXd::Zero(n, n);
  std::vector<double> pre(static_cast<std::size_t>(n) + 1), suf(static_cast<std::size_t>(n) + 1);
  for (Index i = 0; i < n; ++i) {
    const auto un = static_cast<std::size_t>(n);
    pre[0] = 1.0;
    for (std::size_t j = 0; j < un; ++j) pre[j + 1] = pre[j] * (1.0 - m(i, idx(j)) * x[idx(j)]);
    suf[un] = 1.0;
    for (std::size_t j = un; j-- > 0;) suf[j] = suf[j + 1] * (1.0 - m(i, idx(j)) * x[idx(j)]);
    for (std::size_t j = 0; j < un; ++j) d(i, idx(j)) = m(i, idx(j)) * pre[j] * suf[j + 1];
  }
  return d;
}

void check_range(const MeanFieldPoint& y) {
  constexpr double slack = 1e-12;
  for (Index i = 0; i < y.p_i.size(); ++i) {
    const double pi = y.p_i[i];
    const double pr = y.p_r.size() ? y.p_r[i] : 0.0;
    if (!(pi >= -slack && pi <= 1.0 + slack && pr >= -slack && pr <= 1.0 + slack &&
          pi + pr <= 1.0 + slack))
      throw InvariantError("mean-field map left the probability simplex at node " +
                           std::to_string(i));
  }
}

void clamp(MeanFieldPoint& y) {
  for (Index i = 0; i < y.p_i.size(); ++i) {
    y.p_i[i] = std::clamp(y.p_i[i], 0.0, 1.0);
    if (y.p_r.size()) y.p_r[i] = std::clamp(y.p_r[i], 0.0, 1.0 - y.p_i[i]);
  }
}

MatrixXd dense_linear(const Graph& g, double diag, double scale) {
  MatrixXd m = scale * adjacency_matrix(g);
  m.diagonal().array() += diag;
  return m;
}

}  // namespace

MeanFieldPoint zero_point(const ModelSpec& model, std::size_t n) {
  MeanFieldPoint x;
  x.p_i = VectorXd::Zero(idx(n));
  if (model.k() == 3) x.p_r = VectorXd::Zero(idx(n));
  return x;
}

MeanFieldPoint base_point(const ModelSpec& model, std::size_t n) {
  auto x = zero_point(model, n);
  if (is_siv(model.variant)) x.p_r.setConstant(model.th() / (model.g() + model.th()));
  return x;
}

MeanFieldPoint upper_corner(const ModelSpec& model, std::size_t n) {
  auto x = zero_point(model, n);
  x.p_i.setOnes();
  return x;
}

VectorXd flatten(const MeanFieldPoint& x) {
  if (x.p_r.size() == 0) return x.p_i;
  VectorXd v(x.p_r.size() + x.p_i.size());
  v << x.p_r, x.p_i;
  return v;
}

MeanFieldPoint unflatten(const ModelSpec& model, const VectorXd& v) {
  MeanFieldPoint x;
  if (model.k() == 2) {
    x.p_i = v;
    return x;
  }
  const Index n = v.size() / 2;
  x.p_r = v.head(n);
  x.p_i = v.tail(n);
  return x;
}

MeanFieldPoint mf_step(const ModelSpec& model, const Graph& g, const MeanFieldPoint& x) {
  MeanFieldPoint y;
  const auto& pi = x.p_i;
  switch (model.variant) {
    case Variant::sis_general:
      y.p_i = general_map(model.m(), pi);
      break;
    case Variant::sis_nia: {
      const double keep = 1.0 - model.d();
      const VectorXd xi = infection_pressure(g, model.b(), pi);
      y.p_i = keep * pi.array() + (1.0 - keep * pi.array()) * xi.array();
      break;
    }
    case Variant::sis_ia: {
      const double keep = 1.0 - model.d();
      const VectorXd xi = infection_pressure(g, model.b(), pi);
      y.p_i = keep * pi.array() + (1.0 - pi.array()) * xi.array();
      break;
    }
    case Variant::sirs:
    case Variant::siv_id:
    case Variant::siv_vd: {
      const double delta = model.d(), gamma = model.g();
      const double theta = model.variant == Variant::sirs ? 0.0 : model.th();
      const auto& pr = x.p_r;
      const VectorXd xi = infection_pressure(g, model.b(), pi);
      const VectorXd s = (1.0 - pr.array() - pi.array()).max(0.0);
      if (model.variant == Variant::siv_vd) {
        y.p_r = (1.0 - gamma) * pr.array() + delta * pi.array() + theta * s.array();
        y.p_i = (1.0 - delta) * pi.array() + (1.0 - theta) * xi.array() * s.array();
      } else {
        y.p_r = (1.0 - gamma) * pr.array() + delta * pi.array() +
                theta * (1.0 - xi.array()) * s.array();
        y.p_i = (1.0 - delta) * pi.array() + xi.array() * s.array();
      }
      break;
    }
  }
  check_range(y);
  clamp(y);
  return y;
}

LinearModel mf_linear_model(const ModelSpec& model, const Graph& g) {
  model.validate(g.n());
  LinearModel lm;
  lm.base_point = base_point(model, g.n());
  const Index n = idx(g.n());
  switch (model.variant) {
    case Variant::sis_general:
      lm.matrix = model.m();
      return lm;
    case Variant::sis_nia:
    case Variant::sis_ia:
      lm.matrix = dense_linear(g, 1.0 - model.d(), model.b());
      return lm;
    case Variant::sirs:
    case Variant::siv_id:
    case Variant::siv_vd:
      break;
  }
  const double beta = model.b(), delta = model.d(), gamma = model.g();
  const double theta = model.variant == Variant::sirs ? 0.0 : model.th();
  const double ps = model.variant == Variant::sirs ? 1.0 : gamma / (gamma + theta);
  const MatrixXd a = adjacency_matrix(g);
  const MatrixXd id = MatrixXd::Identity(n, n);
  lm.matrix = MatrixXd::Zero(2 * n, 2 * n);
  lm.matrix.topLeftCorner(n, n) = (1.0 - gamma - theta) * id;
  if (model.variant == Variant::siv_vd) {
    lm.matrix.topRightCorner(n, n) = (delta - theta) * id;
    lm.matrix.bottomRightCorner(n, n) = (1.0 - delta) * id + (1.0 - theta) * ps * beta * a;
  } else {
    lm.matrix.topRightCorner(n, n) = (delta - theta) * id - theta * ps * beta * a;
    lm.matrix.bottomRightCorner(n, n) = (1.0 - delta) * id + ps * beta * a;
  }
  return lm;
}

MatrixXd mf_jacobian(const ModelSpec& model, const Graph& g, const MeanFieldPoint& x) {
  const Index n = idx(g.n());
  const auto& pi = x.p_i;
  if (model.variant == Variant::sis_general) return general_jacobian(model.m(), pi);
  const double beta = model.b(), delta = model.d();
  const VectorXd xi = infection_pressure(g, beta, pi);
  const MatrixXd dxi = pressure_gradient(g, beta, pi, xi);
  if (model.variant == Variant::sis_nia) {
    MatrixXd j = (1.0 - (1.0 - delta) * pi.array()).matrix().asDiagonal() * dxi;
    j.diagonal() = ((1.0 - delta) * (1.0 - xi.array())).matrix();
    return j;
  }
  if (model.variant == Variant::sis_ia) {
    MatrixXd j = (1.0 - pi.array()).matrix().asDiagonal() * dxi;
    j.diagonal() = ((1.0 - delta) - xi.array()).matrix();
    return j;
  }
  const double gamma = model.g();
  const double theta = model.variant == Variant::sirs ? 0.0 : model.th();
  const VectorXd s = (1.0 - x.p_r.array() - pi.array()).matrix();
  MatrixXd j = MatrixXd::Zero(2 * n, 2 * n);
  auto rr = j.topLeftCorner(n, n);
  auto ri = j.topRightCorner(n, n);
  auto ir = j.bottomLeftCorner(n, n);
  auto ii = j.bottomRightCorner(n, n);
  if (model.variant == Variant::siv_vd) {
    rr.diagonal().setConstant(1.0 - gamma - theta);
    ri.diagonal().setConstant(delta - theta);
    ii = (1.0 - theta) * s.asDiagonal() * dxi;
    ir.diagonal() = (-(1.0 - theta) * xi.array()).matrix();
    ii.diagonal() = ((1.0 - delta) - (1.0 - theta) * xi.array()).matrix();
    return j;
  }
  // sirs is siv-id with theta = 0
  rr.diagonal() = ((1.0 - gamma) - theta * (1.0 - xi.array())).matrix();
  ri = -theta * s.asDiagonal() * dxi;
  ri.diagonal() = (delta - theta * (1.0 - xi.array())).matrix();
  ii = s.asDiagonal() * dxi;
  ir.diagonal() = (-xi.array()).matrix();
  ii.diagonal() = ((1.0 - delta) - xi.array()).matrix();
  return j;
}

std::vector<MeanFieldPoint> mf_iterate(const ModelSpec& model, const Graph& g,
                                       const MeanFieldPoint& x0, std::size_t t) {
  std::vector<MeanFieldPoint> out;
  out.reserve(t + 1);
  out.push_back(x0);
  for (std::size_t s = 0; s < t; ++s) out.push_back(mf_step(model, g, out.back()));
  return out;
}

std::string to_string(Classification c, int period) {
  switch (c) {
    case Classification::disease_free: return "disease-free";
    case Classification::endemic: return "endemic";
    case Classification::cycle: return "cycle(" + std::to_string(period) + ")";
    case Classification::non_converged: return "non-converged";
  }
  return "?";
}

std::optional<double> fixed_point_relation_defect(const ModelSpec& model, const MeanFieldPoint& x) {
  if (model.k() == 2) return std::nullopt;
  const double delta = model.d(), gamma = model.g();
  VectorXd expect;
  if (model.variant == Variant::sirs) {
    if (gamma == 0.0) return std::nullopt;
    expect = (delta / gamma) * x.p_i;
  } else {
    const double theta = model.th();
    const double slope = model.variant == Variant::siv_id ? delta - theta - delta * theta : delta - theta;
    expect = (theta / (gamma + theta) + (slope / (gamma + theta)) * x.p_i.array()).matrix();
  }
  return (x.p_r - expect).cwiseAbs().maxCoeff();
}

FixedPointReport find_fixed_point(const ModelSpec& model, const Graph& g,
                                  const FixedPointOptions& opts) {
  model.validate(g.n());
  if (!(opts.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const bool monotone = model.variant == Variant::sis_nia || model.variant == Variant::sis_general;
  const double eta = opts.eta.value_or(monotone ? 1.0 : 0.5);
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("damping must lie in (0,1]");
  const bool check_descent = monotone && eta == 1.0 && !opts.start;

  FixedPointReport rep;
  VectorXd v = flatten(opts.start ? *opts.start : upper_corner(model, g.n()));
  constexpr std::size_t window = 64;
  std::deque<VectorXd> history;
  double prev_step = std::numeric_limits<double>::infinity();
  bool done = false;

  for (std::size_t it = 1; it <= opts.cap; ++it) {
    const VectorXd fx = flatten(mf_step(model, g, unflatten(model, v)));
    const double res = (fx - v).cwiseAbs().maxCoeff();
    rep.iterations = it;
    rep.residual = res;
    if (check_descent && ((fx - v).maxCoeff() > 1e-13))
      throw InvariantError("upper iteration failed to decrease at step " + std::to_string(it));
    if (res == 0.0) {
      done = true;
      break;
    }
    const VectorXd next = (1.0 - eta) * v + eta * fx;
    const double step = eta * res;
    const double r = step / prev_step;
    prev_step = step;
    const bool contracting = r < 1.0 && step * r / (1.0 - r) <= 0.1 * opts.tol;
    const bool at_rounding = step <= 8.0 * std::numeric_limits<double>::epsilon() *
                                         std::max(1.0, v.cwiseAbs().maxCoeff());
    if (res <= opts.tol && (contracting || at_rounding)) {
      v = next;
      rep.residual = (flatten(mf_step(model, g, unflatten(model, v))) - v).cwiseAbs().maxCoeff();
      done = true;
      break;
    }
    v = next;
    history.push_back(v);
    if (history.size() > window + 1) history.pop_front();
    if (it >= 2 * window && it % window == 0 && res >= 1e-6) {
      for (std::size_t q = 2; q <= window; ++q) {
        const auto& past = history[history.size() - 1 - q];
        if ((v - past).cwiseAbs().maxCoeff() < 1e-9) {
          rep.classification = Classification::cycle;
          rep.period = static_cast<int>(q);
          rep.point = unflatten(model, v);
          return rep;
        }
      }
    }
  }

  rep.point = unflatten(model, v);
  if (!done) {
    rep.classification = Classification::non_converged;
    return rep;
  }
  rep.classification = rep.point.p_i.cwiseAbs().maxCoeff() < opts.tol ? Classification::disease_free
                                                                      : Classification::endemic;
  if (rep.classification == Classification::endemic)
    rep.relation_defect = fixed_point_relation_defect(model, rep.point);
  const auto dim = static_cast<std::size_t>(v.size());
  if (opts.spectrum.value_or(dim <= 400)) rep.jacobian_spectrum = jacobian_eigenvalues(model, g, rep.point);
  return rep;
}

std::vector<std::complex<double>> jacobian_eigenvalues(const ModelSpec& model, const Graph& g,
                                                       const MeanFieldPoint& x) {
  std::vector<std::complex<double>> out;
  const bool sis_graph = model.variant == Variant::sis_nia || model.variant == Variant::sis_ia;
  if (sis_graph && !g.weighted() && g.n() > 0) {
    // J = D + diag(a) A diag(b) is similar to a symmetric matrix when a, b > 0.
    const double beta = model.b(), delta = model.d();
    const auto& pi = x.p_i;
    const VectorXd xi = infection_pressure(g, beta, pi);
    const Index n = pi.size();
    VectorXd a(n), b(n), diag(n);
    bool ok = true;
    for (Index i = 0; i < n; ++i) {
      const double stay = 1.0 - xi[i];
      if (model.variant == Variant::sis_nia) {
        a[i] = (1.0 - (1.0 - delta) * pi[i]) * stay;
        diag[i] = (1.0 - delta) * stay;
      } else {
        a[i] = (1.0 - pi[i]) * stay;
        diag[i] = (1.0 - delta) - xi[i];
      }
      b[i] = beta / (1.0 - beta * pi[i]);
      if (!(a[i] > 1e-300 && b[i] > 1e-300 && 1.0 - beta * pi[i] > 1e-8)) ok = false;
    }
    if (ok) {
      const VectorXd c = (a.array() * b.array()).sqrt().matrix();
      MatrixXd sym = c.asDiagonal() * adjacency_matrix(g) * c.asDiagonal();
      sym.diagonal() = diag;
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym, Eigen::EigenvaluesOnly);
      for (Index i = 0; i < n; ++i) out.emplace_back(es.eigenvalues()[i], 0.0);
      return out;
    }
  }
  const MatrixXd j = mf_jacobian(model, g, x);
  Eigen::EigenSolver<MatrixXd> es(j, false);
  for (Index i = 0; i < j.rows(); ++i) out.push_back(es.eigenvalues()[i]);
  return out;
}

StabilityReport classify_stability(const ModelSpec& model, const Graph& g,
                                   const MeanFieldPoint& point, double fixed_tol) {
  const double res =
      (flatten(mf_step(model, g, point)) - flatten(point)).cwiseAbs().maxCoeff();
  if (!(res <= fixed_tol))
    throw InvariantError("classify_stability called away from a fixed point (residual " +
                         std::to_string(res) + ")");
  StabilityReport rep;
  rep.eigenvalues = jacobian_eigenvalues(model, g, point);
  rep.max_real_eigenvalue = -std::numeric_limits<double>::infinity();
  for (const auto& e : rep.eigenvalues) {
    if (std::abs(e) > rep.spectral_radius) {
      rep.spectral_radius = std::abs(e);
      rep.dominant = e;
    }
    if (std::abs(e.imag()) <= 1e-9) rep.max_real_eigenvalue = std::max(rep.max_real_eigenvalue, e.real());
  }
  rep.stable = rep.spectral_radius < 1.0;
  return rep;
}

std::optional<VectorXd> perron_certificate(const ModelSpec& model, const Graph& g) {
  if (model.k() != 2) throw ModelError("perron_certificate applies to the SIS family only");
  model.validate(g.n());
  if (!(threshold_ratio(model, g) > 1.0)) return std::nullopt;
  const MatrixXd l = model.variant == Variant::sis_general
                         ? model.m()
                         : dense_linear(g, 1.0 - model.d(), model.b());
  VectorXd v;
  if (l.isApprox(l.transpose(), 0.0)) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(l);
    v = es.eigenvectors().col(l.rows() - 1);
  } else {
    Eigen::EigenSolver<MatrixXd> es(l);
    Index best = 0;
    for (Index i = 1; i < l.rows(); ++i)
      if (es.eigenvalues()[i].real() > es.eigenvalues()[best].real()) best = i;
    v = es.eigenvectors().col(best).real();
  }
  if (v.sum() < 0.0) v = -v;
  v /= v.norm();
  const VectorXd gap = (l - MatrixXd::Identity(l.rows(), l.cols())) * v;
  for (Index i = 0; i < gap.size(); ++i)
    if (!(gap[i] > 1e-12))
      throw InvariantError("Perron certificate fails at node " + std::to_string(i));
  return v;
}

VectorXd linear_bound_map(const ModelSpec& model, const Graph& g, const MeanFieldPoint& x) {
  const auto& pi = x.p_i;
  if (model.variant == Variant::sis_general) return model.m() * pi;
  double scale = model.b();
  if (model.variant == Variant::siv_vd) scale *= 1.0 - model.th();
  VectorXd ax(pi.size());
  g.multiply(std::span<const double>(pi.data(), static_cast<std::size_t>(pi.size())),
             std::span<double>(ax.data(), static_cast<std::size_t>(ax.size())));
  return (1.0 - model.d()) * pi + scale * ax;
}

double linear_bound_check(const ModelSpec& model, const Graph& g, const MeanFieldPoint& x) {
  const VectorXd lin = linear_bound_map(model, g, x);
  const VectorXd nonlin = mf_step(model, g, x).p_i;
  if (lin.size() == 0) return 0.0;
  return (lin - nonlin).minCoeff();
}

}  // namespace epinet
