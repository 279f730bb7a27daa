#include "epinet/model.hpp"

#include <cmath>
#include <string>

#include "epinet/error.hpp"
#include "epinet/spectral.hpp"

namespace epinet {

Variant parse_variant(std::string_view name) {
  if (name == "sis-nia") return Variant::sis_nia;
  if (name == "sis-ia") return Variant::sis_ia;
  if (name == "sis-general") return Variant::sis_general;
  if (name == "sirs") return Variant::sirs;
  if (name == "siv-id") return Variant::siv_id;
  if (name == "siv-vd") return Variant::siv_vd;
  throw ModelError("unknown variant: " + std::string(name));
}

std::string_view to_string(Variant v) noexcept {
  switch (v) {
    case Variant::sis_nia: return "sis-nia";
    case Variant::sis_ia: return "sis-ia";
    case Variant::sis_general: return "sis-general";
    case Variant::sirs: return "sirs";
    case Variant::siv_id: return "siv-id";
    case Variant::siv_vd: return "siv-vd";
  }
  return "?";
}

namespace {

double need(const std::optional<double>& x, const char* name, Variant v) {
  if (!x) throw ModelError(std::string(to_string(v)) + " requires " + name);
  return *x;
}

void check_prob(const std::optional<double>& x, const char* name) {
  if (x && !(*x >= 0.0 && *x <= 1.0)) throw ModelError(std::string(name) + " must lie in [0,1]");
}

}  // namespace

double ModelSpec::b() const { return need(beta, "beta", variant); }
double ModelSpec::d() const { return need(delta, "delta", variant); }
double ModelSpec::g() const { return need(gamma, "gamma", variant); }
double ModelSpec::th() const { return need(theta, "theta", variant); }
const Eigen::MatrixXd& ModelSpec::m() const {
  if (!contact) throw ModelError("sis-general requires a contact matrix");
  return *contact;
}

void ModelSpec::validate(std::size_t n) const {
  check_prob(beta, "beta");
  check_prob(delta, "delta");
  check_prob(gamma, "gamma");
  check_prob(theta, "theta");
  if (variant == Variant::sis_general) {
    const auto& c = m();
    if (c.rows() != static_cast<Eigen::Index>(n) || c.cols() != static_cast<Eigen::Index>(n))
      throw ModelError("contact matrix must be " + std::to_string(n) + "x" + std::to_string(n));
    if (!c.allFinite() || c.minCoeff() < 0.0 || c.maxCoeff() > 1.0)
      throw ModelError("contact matrix entries must lie in [0,1]");
    return;
  }
  b();
  d();
  if (k() == 3) g();
  if (is_siv(variant)) {
    th();
    if (*gamma == 1.0 && *theta == 1.0)
      throw ModelError("gamma = theta = 1 makes the single-node chain periodic");
    if (*gamma + *theta == 0.0) throw ModelError("gamma + theta must be positive");
  }
}

ModelSpec sis_nia(double beta, double delta) {
  return {Variant::sis_nia, beta, delta, std::nullopt, std::nullopt, std::nullopt};
}
ModelSpec sis_ia(double beta, double delta) {
  return {Variant::sis_ia, beta, delta, std::nullopt, std::nullopt, std::nullopt};
}
ModelSpec sis_general(Eigen::MatrixXd contact) {
  return {Variant::sis_general, std::nullopt, std::nullopt, std::nullopt, std::nullopt,
          std::move(contact)};
}
ModelSpec sirs(double beta, double delta, double gamma) {
  return {Variant::sirs, beta, delta, gamma, std::nullopt, std::nullopt};
}
ModelSpec siv_id(double beta, double delta, double gamma, double theta) {
  return {Variant::siv_id, beta, delta, gamma, theta, std::nullopt};
}
ModelSpec siv_vd(double beta, double delta, double gamma, double theta) {
  return {Variant::siv_vd, beta, delta, gamma, theta, std::nullopt};
}

Eigen::MatrixXd contact_from_graph(const Graph& g, double beta, double delta) {
  Eigen::MatrixXd m = beta * adjacency_matrix(g);
  m.diagonal().setConstant(1.0 - delta);
  return m;
}

double threshold_ratio(const ModelSpec& model, const Graph& g) {
  if (model.variant == Variant::sis_general) return spectral_radius(model.m());
  return threshold_ratio(model, spectral_radius(g).lambda_max);
}

double threshold_ratio(const ModelSpec& model, double lambda_max) {
  if (model.variant == Variant::sis_general) return spectral_radius(model.m());
  const double beta = model.b(), delta = model.d();
  const double num = beta * lambda_max;
  if (delta == 0.0) return num > 0.0 ? kInfinity : 0.0;
  double r = num / delta;
  if (is_siv(model.variant)) {
    const double gamma = model.g(), theta = model.th();
    r *= gamma / (gamma + theta);
    if (model.variant == Variant::siv_vd) r *= 1.0 - theta;
  }
  return r;
}

double upper_triangular_2x2_norm(double a, double d, double b) {
  const double t = a * a + d * d + b * b;
  const double disc = std::max(0.0, t * t - 4.0 * a * a * b * b);
  return std::sqrt(0.5 * (t + std::sqrt(disc)));
}

double contraction_norm(const ModelSpec& model, const Graph& g) {
  if (model.variant == Variant::sis_general) return two_norm(model.m());
  return contraction_norm(model, spectral_radius(g).lambda_max);
}

double contraction_norm(const ModelSpec& model, double lambda_max) {
  switch (model.variant) {
    case Variant::sis_general:
      return two_norm(model.m());
    case Variant::sis_nia:
    case Variant::sis_ia:
    case Variant::siv_id:
      return 1.0 - model.d() + model.b() * lambda_max;
    case Variant::siv_vd:
      return 1.0 - model.d() + (1.0 - model.th()) * model.b() * lambda_max;
    case Variant::sirs:
      // The block matrix splits into 2x2 upper-triangular pieces along the
      // eigenvectors of A; the norm is largest at lambda_max.
      return upper_triangular_2x2_norm(1.0 - model.g(), model.d(),
                                       1.0 - model.d() + model.b() * lambda_max);
  }
  return kInfinity;
}

double mixing_time_bound(const ModelSpec& model, std::size_t n, double lambda_max, double eps) {
  const double norm = contraction_norm(model, lambda_max);
  if (!(norm < 1.0)) return kInfinity;
  const double states = model.k() == 2 ? static_cast<double>(n) : 2.0 * static_cast<double>(n);
  // limit of the bound as the norm goes to 0 from above
  if (norm <= 0.0) return std::nextafter(0.0, 1.0);
  return std::log(states / eps) / -std::log(norm);
}

double mixing_time_bound(const ModelSpec& model, const Graph& g, double eps) {
  const double lm = model.variant == Variant::sis_general ? 0.0 : spectral_radius(g).lambda_max;
  return mixing_time_bound(model, g.n(), lm, eps);
}

}  // namespace epinet
