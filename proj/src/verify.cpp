#include "epinet/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>

#include "epinet/chain.hpp"
#include "epinet/error.hpp"
#include "epinet/lp_oracle.hpp"
#include "epinet/meanfield.hpp"
#include "epinet/montecarlo.hpp"
#include "epinet/ordering.hpp"
#include "epinet/spectral.hpp"

namespace epinet {

using nlohmann::json;

namespace {

using Rng = std::mt19937_64;

double unif(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

constexpr Variant kAllVariants[] = {Variant::sis_nia, Variant::sis_ia, Variant::sis_general,
                                    Variant::sirs,    Variant::siv_id, Variant::siv_vd};

Eigen::MatrixXd random_contact(std::size_t n, Rng& rng, double scale) {
  const auto m = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd c(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) c(i, j) = i == j ? unif(rng, 0.05, 0.95) : scale * unif(rng);
  return c;
}

ModelSpec random_model(Variant v, std::size_t n, Rng& rng) {
  const double b = unif(rng, 0.02, 0.98), d = unif(rng, 0.02, 0.98);
  switch (v) {
    case Variant::sis_nia: return sis_nia(b, d);
    case Variant::sis_ia: return sis_ia(b, d);
    case Variant::sis_general: return sis_general(random_contact(n, rng, unif(rng, 0.0, 0.6)));
    case Variant::sirs: return sirs(b, d, unif(rng, 0.02, 0.98));
    case Variant::siv_id: return siv_id(b, d, unif(rng, 0.02, 0.98), unif(rng, 0.02, 0.98));
    case Variant::siv_vd: return siv_vd(b, d, unif(rng, 0.02, 0.98), unif(rng, 0.02, 0.98));
  }
  throw std::logic_error("unreachable");
}

/// Rescales beta (or the off-diagonal contacts) so the threshold ratio equals `target`.
ModelSpec with_ratio(ModelSpec model, const Graph& g, double target) {
  if (model.variant == Variant::sis_general) {
    Eigen::MatrixXd m = *model.contact;
    const Eigen::VectorXd diag = m.diagonal();
    Eigen::MatrixXd off = m;
    off.diagonal().setZero();
    // lambda_max(D + s*Off) is increasing in s; bisect
    double lo = 0.0, hi = 1.0;
    auto ratio_at = [&](double s) {
      Eigen::MatrixXd t = s * off;
      t.diagonal() = diag;
      return spectral_radius(t);
    };
    while (ratio_at(hi) < target && hi < 1e6) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (ratio_at(mid) < target ? lo : hi) = mid;
    }
    Eigen::MatrixXd t = lo * off;
    t.diagonal() = diag;
    if ((t.array() > 1.0).any()) throw ModelError("target ratio needs contacts above 1");
    model.contact = t;
    return model;
  }
  const double r = threshold_ratio(model, g);
  model.beta = *model.beta * target / r;
  if (*model.beta > 1.0) throw ModelError("target ratio needs beta above 1");
  return model;
}

Eigen::VectorXd random_vector(std::size_t n, Rng& rng, double lo, double hi) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = unif(rng, lo, hi);
  return v;
}

/// Strictly interior point of the variant's domain.
MeanFieldPoint random_interior(const ModelSpec& model, std::size_t n, Rng& rng) {
  MeanFieldPoint x;
  if (model.k() == 2) {
    x.p_i = random_vector(n, rng, 0.01, 0.99);
    return x;
  }
  x.p_i.resize(static_cast<Eigen::Index>(n));
  x.p_r.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.p_i.size(); ++i) {
    const double a = unif(rng, 0.02, 1.0), b = unif(rng, 0.02, 1.0), c = unif(rng, 0.02, 1.0);
    x.p_i[i] = a / (a + b + c);
    x.p_r[i] = b / (a + b + c);
  }
  return x;
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

struct Ctx {
  std::size_t n_max;
  std::size_t trials;
  Rng rng;
};

/// Running minimum of a slack with the first offending instance kept.
struct Tracker {
  double worst = kInfinity;
  std::optional<json> offending;
  void see(double slack, double floor, const std::function<json()>& instance) {
    worst = std::min(worst, slack);
    if (slack < floor && !offending) offending = instance();
  }
};

SuiteResult finish(std::string name, json detail, std::optional<json> offending) {
  SuiteResult r;
  r.name = std::move(name);
  r.pass = !offending;
  r.detail = std::move(detail);
  r.offending = std::move(offending);
  return r;
}

SuiteResult suite_ordering(Ctx& c) {
  std::optional<json> bad;
  bool r_ok = true;
  for (std::size_t n = 1; n <= 6; ++n) {
    const auto p = build_R_pair(n);
    const Eigen::MatrixXi prod = p.r * p.r_inv;
    if (prod != Eigen::MatrixXi::Identity(prod.rows(), prod.cols())) {
      r_ok = false;
      if (!bad) bad = json{{"check", "R R^-1 = I"}, {"n", n}};
    }
  }
  Tracker entry, pair;
  double identity = 0.0;
  const std::size_t cap = std::min<std::size_t>(c.n_max, 10);
  for (std::size_t t = 0; t < c.trials; ++t) {
    const std::size_t n = pick(c.rng, 1, cap);
    const bool general = t % 3 == 2;
    const auto g = general ? parse_edge_list("n=" + std::to_string(n)) : random_connected_graph(n, c.rng, 0.3, t % 3 == 1);
    const auto model = general ? sis_general(random_contact(n, c.rng, 0.5)) : sis_nia(unif(c.rng), unif(c.rng));
    const auto S = build_transition_matrix(model, g);
    const auto rep = general ? check_order_preservation(S, build_transition_matrix(sis_general(model.m().transpose()), g))
                             : check_order_preservation(S, S);
    identity = std::max(identity, rep.identity_defect);
    entry.see(rep.min_entry, -1e-12, [&] {
      auto j = instance_json(model, g);
      j["check"] = "R^-1 S R >= 0";
      j["min_entry"] = rep.min_entry;
      return j;
    });
    if (rep.identity_defect > 1e-12 && !entry.offending)
      entry.offending = json{{"check", "dual identity"}, {"defect", rep.identity_defect}, {"instance", instance_json(model, g)}};
  }
  for (std::size_t t = 0; t < 2 * c.trials; ++t) {
    const std::size_t n = pick(c.rng, 1, std::min<std::size_t>(c.n_max, 8));
    const auto g = random_connected_graph(n, c.rng);
    const auto model = sis_nia(unif(c.rng), unif(c.rng));
    const auto S = build_transition_matrix(model, g);
    const auto [mu, up] = sample_ordered_pair(n, c.rng);
    const double s = ordered_pair_slack(mu, up, S, 20);
    pair.see(s, -1e-12, [&] {
      auto j = instance_json(model, g);
      j["check"] = "ordered pair";
      j["mu"] = mu;
      j["mu_upper"] = up;
      return j;
    });
  }
  if (!bad) bad = entry.offending;
  if (!bad) bad = pair.offending;
  json d{{"r_inverse_exact", r_ok},       {"instances", c.trials},           {"min_entry", entry.worst},
         {"max_identity_defect", identity}, {"ordered_pairs", 2 * c.trials}, {"min_pair_slack", pair.worst}};
  return finish("ordering", d, bad);
}

SuiteResult suite_ubound(Ctx& c) {
  Tracker tr;
  for (std::size_t t = 0; t < c.trials; ++t) {
    const std::size_t n = pick(c.rng, 1, std::min<std::size_t>(c.n_max, 10));
    const auto g = random_connected_graph(n, c.rng, 0.3, t % 2 == 1);
    const auto model = sis_nia(unif(c.rng), unif(c.rng));
    std::vector<double> r(n);
    for (auto& x : r) x = unif(c.rng);
    const double s = check_u_bound(build_transition_matrix(model, g), model, g, r);
    tr.see(s, -1e-12, [&] {
      auto j = instance_json(model, g);
      j["r"] = r;
      return j;
    });
  }
  return finish("ubound", json{{"trials", c.trials}, {"min_slack", tr.worst}}, tr.offending);
}

SuiteResult suite_lp(Ctx& c) {
  Tracker upper, equal;
  std::size_t attained = 0, family = 0, bases = 0;
  for (std::size_t t = 0; t < c.trials; ++t) {
    const Variant v = kAllVariants[t % 6];
    const int k = states_per_node(v);
    const std::size_t n = pick(c.rng, 1, std::min<std::size_t>(c.n_max, k == 2 ? 4 : 3));
    const auto g = random_connected_graph(n, c.rng, 0.5, t % 4 == 3);
    const auto model = random_model(v, n, c.rng);

    // marginals of a random distribution
    const std::size_t dim = state_count(k, n);
    Dist mu(dim);
    for (auto& x : mu) x = -std::log(unif(c.rng, 1e-12, 1.0));
    const double tot = std::accumulate(mu.begin(), mu.end(), 0.0);
    for (auto& x : mu) x /= tot;
    const auto p = marginals(mu, k, n);
    const auto res = lp_marginal_bound(model, g, p);
    bases += res.bases_tried;
    for (std::size_t i = 0; i < n; ++i)
      upper.see(res.closed_form[i] - res.lp_max[i], -1e-9, [&] {
        auto j = instance_json(model, g);
        j["p_i"] = p.p_i;
        j["p_r"] = p.p_r;
        j["node"] = i;
        return j;
      });

    // small-marginal family: total mass off the all-healthy state at most 1
    Marginals small;
    small.p_i.resize(n);
    if (k == 3) small.p_r.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      small.p_i[i] = unif(c.rng) / static_cast<double>(k - 1) / static_cast<double>(n);
      if (k == 3) small.p_r[i] = unif(c.rng) / 2.0 / static_cast<double>(n);
    }
    const auto eq = lp_marginal_bound(model, g, small);
    for (std::size_t i = 0; i < n; ++i) {
      ++family;
      const double gap = std::abs(eq.lp_max[i] - eq.closed_form[i]);
      attained += gap <= 1e-6;
      equal.see(-gap, -1e-6, [&] {
        auto j = instance_json(model, g);
        j["p_i"] = small.p_i;
        j["p_r"] = small.p_r;
        j["node"] = i;
        return j;
      });
    }
  }
  json d{{"instances", c.trials},          {"bases_tried", bases},          {"min_bound_slack", upper.worst},
         {"family_nodes", family},         {"family_attained", attained},   {"max_family_gap", -equal.worst}};
  return finish("lp", d, upper.offending ? upper.offending : equal.offending);
}

SuiteResult suite_nonabsorption(Ctx& c) {
  Tracker tr;
  for (std::size_t t = 0; t < c.trials; ++t) {
    const std::size_t n = pick(c.rng, 1, std::min<std::size_t>(c.n_max, 10));
    const auto g = random_connected_graph(n, c.rng, 0.3, t % 2 == 1);
    const auto model = sis_nia(unif(c.rng), unif(c.rng));
    const auto S = build_transition_matrix(model, g);
    const std::size_t x0 = pick(c.rng, 0, S.dim - 1), steps = pick(c.rng, 0, 50);
    const auto r = non_absorption_check(model, g, S, x0, steps);
    tr.see(r.slack, -1e-10, [&] {
      auto j = instance_json(model, g);
      j["x0"] = x0;
      j["t"] = steps;
      j["exact"] = r.exact;
      j["bound"] = r.bound;
      return j;
    });
  }
  return finish("nonabsorption", json{{"trials", c.trials}, {"min_slack", tr.worst}}, tr.offending);
}

SuiteResult suite_linear_bound(Ctx& c) {
  Tracker tr;
  std::map<std::string, double> per_variant;
  for (std::size_t t = 0; t < c.trials; ++t) {
    const Variant v = kAllVariants[t % 6];
    const std::size_t n = pick(c.rng, 1, c.n_max);
    const auto g = random_connected_graph(n, c.rng, std::min(0.3, 3.0 / static_cast<double>(n)), t % 2 == 1);
    const auto model = random_model(v, n, c.rng);
    const auto x = random_interior(model, n, c.rng);
    const double s = linear_bound_check(model, g, x);
    auto& w = per_variant.try_emplace(std::string(to_string(v)), kInfinity).first->second;
    w = std::min(w, s);
    tr.see(s, -1e-12, [&] {
      auto j = instance_json(model, g);
      j["p_i"] = vec_json(x.p_i);
      j["p_r"] = vec_json(x.p_r);
      return j;
    });
  }
  return finish("linear-bound", json{{"trials", c.trials}, {"min_slack", tr.worst}, {"min_slack_by_variant", per_variant}},
                tr.offending);
}

SuiteResult suite_jacobian(Ctx& c) {
  Tracker tr;
  std::map<std::string, double> per_variant;
  for (const Variant v : kAllVariants) {
    double worst = 0.0;
    for (std::size_t t = 0; t < c.trials; ++t) {
      const std::size_t n = pick(c.rng, 1, c.n_max);
      const auto g = random_connected_graph(n, c.rng, 0.4, t % 2 == 1);
      const auto model = random_model(v, n, c.rng);
      const auto x = random_interior(model, n, c.rng);
      const Eigen::MatrixXd J = mf_jacobian(model, g, x);
      const Eigen::VectorXd v0 = flatten(x);
      Eigen::MatrixXd fd(v0.size(), v0.size());
      const double h = 1e-6;
      for (Eigen::Index col = 0; col < v0.size(); ++col) {
        Eigen::VectorXd a = v0, b = v0;
        a[col] += h;
        b[col] -= h;
        fd.col(col) = (flatten(mf_step(model, g, unflatten(model, a))) - flatten(mf_step(model, g, unflatten(model, b)))) / (2 * h);
      }
      const double err = (J - fd).cwiseAbs().rowwise().sum().maxCoeff();
      worst = std::max(worst, err);
      tr.see(-err, -1e-6, [&] {
        auto j = instance_json(model, g);
        j["p_i"] = vec_json(x.p_i);
        j["p_r"] = vec_json(x.p_r);
        j["error"] = err;
        return j;
      });
    }
    per_variant[std::string(to_string(v))] = worst;
  }
  return finish("jacobian", json{{"points_per_variant", c.trials}, {"max_error_by_variant", per_variant}}, tr.offending);
}

SuiteResult suite_threshold(Ctx& c) {
  std::optional<json> bad;
  std::size_t below = 0, above = 0;
  std::size_t max_iters = 0;
  double max_spread = 0.0, min_entry = kInfinity;
  for (std::size_t t = 0; t < c.trials; ++t) {
    const std::size_t n = pick(c.rng, 2, std::max<std::size_t>(2, c.n_max));
    const auto g = random_connected_graph(n, c.rng, 0.3, false);
    const bool is_below = t % 2 == 0;
    const double delta = unif(c.rng, 0.1, 0.95);
    const double lambda = spectral_radius(g).lambda_max;
    const double target = is_below ? unif(c.rng, 0.3, 0.95) : unif(c.rng, 1.05, std::min(3.0, std::max(1.05, 0.99 * lambda / delta)));
    const auto model = with_ratio(sis_nia(0.5, delta), g, target);
    if (is_below) {
      ++below;
      MeanFieldPoint x = upper_corner(model, n);
      std::size_t it = 0;
      while (inf_norm(x.p_i) >= 1e-8 && it < 1'000'000) {
        x = mf_step(model, g, x);
        ++it;
      }
      max_iters = std::max(max_iters, it);
      if (inf_norm(x.p_i) >= 1e-8 && !bad) {
        bad = instance_json(model, g);
        (*bad)["check"] = "extinction from the all-ones start";
      }
      continue;
    }
    ++above;
    const auto ref = find_fixed_point(model, g);
    min_entry = std::min(min_entry, ref.point.p_i.minCoeff());
    bool ok = ref.classification == Classification::endemic && ref.point.p_i.minCoeff() > 0.0;
    for (int s = 0; s < 50 && ok; ++s) {
      FixedPointOptions o;
      o.start = MeanFieldPoint{random_vector(n, c.rng, 1e-3, 1.0), {}};
      o.spectrum = false;
      const auto r = find_fixed_point(model, g, o);
      const double spread = inf_norm(r.point.p_i - ref.point.p_i);
      max_spread = std::max(max_spread, spread);
      ok = r.classification == Classification::endemic && spread <= 1e-7;
    }
    if (!ok && !bad) {
      bad = instance_json(model, g);
      (*bad)["check"] = "unique positive endemic point";
    }
  }
  json d{{"below", below},          {"above", above},           {"max_extinction_iterations", max_iters},
         {"max_multistart_spread", max_spread}, {"min_endemic_entry", min_entry}};
  return finish("threshold", d, bad);
}

SuiteResult suite_mixing(Ctx& c) {
  std::optional<json> bad;
  json per = json::object();
  const double eps = 0.25;
  for (const Variant v : kAllVariants) {
    const int k = states_per_node(v);
    std::size_t cap = std::min<std::size_t>(c.n_max, k == 2 ? 12 : 8);
    std::size_t finite = 0, tested = 0, worst_top = 0, violations = 0;
    double tightest = kInfinity;
    json rows = json::array();
    for (std::size_t t = 0; t < c.trials; ++t) {
      // spread sizes evenly up to the cap so the largest admissible size is always covered
      std::size_t n = std::max<std::size_t>(1, cap - (t * cap) / std::max<std::size_t>(c.trials, 1) / 2);
      // a general stationary law needs every start propagated; only the first SIV trial runs at 3^8
      if (is_siv(v) && t > 0 && cap > 7) n = std::min<std::size_t>(n, 7);
      const auto g = random_connected_graph(n, c.rng, 0.3, false);
      ModelSpec model = random_model(v, n, c.rng);
      // half of the instances sit where the contraction norm is below 1, so the bound is finite
      const bool want_finite = t % 2 == 0;
      for (int attempt = 0; attempt < 1000; ++attempt) {
        model = random_model(v, n, c.rng);
        if (threshold_ratio(model, g) >= 1.0) continue;
        if (want_finite && !(contraction_norm(model, g) < 1.0)) continue;
        break;
      }
      if (threshold_ratio(model, g) >= 1.0) continue;
      const auto S = build_transition_matrix(model, g);
      const auto pi = stationary(model, g, S);
      const double bound = mixing_time_bound(model, g, eps);
      const auto rep = mixing_time_exact(S, pi, eps, 1'000'000);
      ++tested;
      if (std::isfinite(bound)) {
        ++finite;
        tightest = std::min(tightest, std::ceil(bound) - static_cast<double>(rep.t_mix));
      }
      worst_top += rep.worst_always_all_infected;
      json row{{"n", n}, {"t_mix", rep.t_mix}, {"bound", std::isfinite(bound) ? json(bound) : json("inf")}};
      if (is_siv(v)) {
        row["infection_free_time"] = infection_free_time(S, eps, 1'000'000);
        row["vaccine_rate"] = std::abs(1.0 - model.g() - model.th());
        row["contraction_norm"] = contraction_norm(model, g);
      }
      rows.push_back(row);
      const bool ok = rep.reached && static_cast<double>(rep.t_mix) <= std::ceil(bound);
      violations += !ok;
      if (!ok && !bad) {
        bad = instance_json(model, g);
        (*bad)["t_mix"] = rep.t_mix;
        (*bad)["bound"] = bound;
        (*bad)["contraction_norm"] = contraction_norm(model, g);
      }
    }
    per[std::string(to_string(v))] = {{"tested", tested},
                                      {"violations", violations},
                                      {"finite_bounds", finite},
                                      {"min_bound_minus_tmix", std::isfinite(tightest) ? json(tightest) : json(nullptr)},
                                      {"worst_start_all_infected", worst_top},
                                      {"instances", rows}};
  }
  return finish("mixing", json{{"epsilon", eps}, {"variants", per}}, bad);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

SuiteResult suite_extinction_scaling(Ctx& c) {
  const double delta = 0.9, ratio = 0.1 * 4.0 / 0.9;
  std::vector<double> logn, med;
  json rows = json::array();
  std::size_t censored = 0;
  for (std::size_t n = 8; n <= std::max<std::size_t>(c.n_max, 16); n *= 2) {
    const auto g = generate({GeneratorKind::complete, n}, 0);
    const auto model = sis_nia(ratio * delta / static_cast<double>(n - 1), delta);
    std::vector<double> times;
    for (std::size_t r = 0; r < c.trials; ++r) {
      const auto e = extinction_time(model, g, InitSpec::all_infected(), c.rng(), static_cast<std::uint32_t>(r), 1'000'000);
      if (!e) {
        ++censored;
        continue;
      }
      times.push_back(static_cast<double>(*e));
    }
    if (times.empty()) times.push_back(kInfinity);
    logn.push_back(std::log(static_cast<double>(n)));
    med.push_back(median(times));
    rows.push_back({{"n", n}, {"beta", *model.beta}, {"median", med.back()}});
  }
  // least-squares slope of median against log n
  const double mx = std::accumulate(logn.begin(), logn.end(), 0.0) / static_cast<double>(logn.size());
  const double my = std::accumulate(med.begin(), med.end(), 0.0) / static_cast<double>(med.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < logn.size(); ++i) {
    sxy += (logn[i] - mx) * (med[i] - my);
    sxx += (logn[i] - mx) * (logn[i] - mx);
  }
  const double slope = sxy / sxx;
  const double growth = med.back() / med.front();
  const double size_growth = std::exp(logn.back() - logn.front());
  const bool ok = censored == 0 && slope > 0.0 && growth < size_growth;
  json d{{"ratio", ratio}, {"delta", delta}, {"replicates", c.trials}, {"rows", rows},
         {"slope_vs_log_n", slope}, {"median_growth", growth}, {"size_growth", size_growth}, {"censored", censored}};
  std::optional<json> bad;
  if (!ok) bad = d;
  return finish("extinction-scaling", d, bad);
}

SuiteResult suite_stability(Ctx& c) {
  std::optional<json> bad;
  json rows = json::array();
  double prev_rate = -1.0;
  bool monotone = true, high = true;
  for (std::size_t n = 200; n <= std::max<std::size_t>(c.n_max, 200); n *= 2) {
    const double p = 2.0 * std::log(static_cast<double>(n)) / static_cast<double>(n);
    std::size_t stable = 0, tried = 0, non_converged = 0;
    double worst_radius = 0.0;
    for (std::size_t t = 0; t < c.trials; ++t) {
      std::uint64_t used = 0;
      const auto g = connected_er(n, p, c.rng(), &used);
      const double lambda = spectral_radius(g).lambda_max;
      ModelSpec model = sis_ia(0.5, 0.5);
      do model = sis_ia(unif(c.rng, 0.05, 0.95), unif(c.rng, 0.05, 0.95));
      while (!(threshold_ratio(model, lambda) > 1.0));
      ++tried;
      FixedPointOptions o;
      o.spectrum = false;
      const auto fp = find_fixed_point(model, g, o);
      bool ok = fp.classification == Classification::endemic;
      double radius = kInfinity;
      if (ok) {
        radius = classify_stability(model, g, fp.point).spectral_radius;
        ok = radius < 1.0;
      } else {
        ++non_converged;
      }
      if (std::isfinite(radius)) worst_radius = std::max(worst_radius, radius);
      stable += ok;
      if (!ok && !bad) bad = json{{"n", n}, {"p", p}, {"graph_seed", used}, {"model", model_json(model)},
                                  {"spectral_radius", std::isfinite(radius) ? json(radius) : json("n/a")},
                                  {"classification", to_string(fp.classification, fp.period)}};
    }
    const double rate = static_cast<double>(stable) / static_cast<double>(tried);
    high = high && rate >= 0.95;
    monotone = monotone && rate >= prev_rate;
    prev_rate = rate;
    rows.push_back({{"n", n}, {"p", p}, {"instances", tried}, {"stable", stable}, {"rate", rate},
                    {"non_converged", non_converged}, {"max_spectral_radius", worst_radius}});
  }
  json d{{"rows", rows}, {"rate_at_least_095", high}, {"rate_non_decreasing", monotone}};
  if (high && monotone) bad.reset();
  else if (!bad) bad = d;
  return finish("stability", d, bad);
}

SuiteResult suite_real_eigen(Ctx& c) {
  std::optional<json> bad;
  double worst = -kInfinity;
  std::size_t tested = 0, non_converged = 0;
  for (std::size_t t = 0; t < c.trials; ++t) {
    const std::size_t n = pick(c.rng, 2, std::max<std::size_t>(2, c.n_max));
    const auto g = random_connected_graph(n, c.rng, 0.4, t % 3 == 2);
    ModelSpec model = sis_ia(0.5, 0.5);
    do model = sis_ia(unif(c.rng, 0.05, 0.95), unif(c.rng, 0.05, 0.95));
    while (!(threshold_ratio(model, g) > 1.0));
    const auto fp = find_fixed_point(model, g);
    if (fp.classification != Classification::endemic) {
      ++non_converged;
      continue;
    }
    ++tested;
    const auto st = classify_stability(model, g, fp.point);
    worst = std::max(worst, st.max_real_eigenvalue);
    if (st.max_real_eigenvalue >= 1.0 - 1e-9 && !bad) {
      bad = instance_json(model, g);
      (*bad)["max_real_eigenvalue"] = st.max_real_eigenvalue;
    }
  }
  return finish("real-eigen", json{{"tested", tested}, {"non_converged", non_converged}, {"max_real_eigenvalue", worst}}, bad);
}

SuiteResult suite_siv_stationary(Ctx& c) {
  Tracker tr;
  for (std::size_t t = 0; t < c.trials; ++t) {
    const std::size_t n = pick(c.rng, 1, std::min<std::size_t>(c.n_max, 6));
    const auto g = random_connected_graph(n, c.rng, 0.4, t % 3 == 2);
    const auto model = random_model(t % 2 ? Variant::siv_vd : Variant::siv_id, n, c.rng);
    const auto S = build_transition_matrix(model, g);
    const double defect = stationary_defect(stationary_product_form(model, n), S);
    tr.see(-defect, -1e-10, [&] {
      auto j = instance_json(model, g);
      j["defect"] = defect;
      return j;
    });
  }
  // long-run susceptible fraction after the infection has died out
  const std::size_t n = 200, reps = 20;
  const auto g = connected_er(n, 0.02, c.rng());
  json mc = json::array();
  std::optional<json> mc_bad;
  for (const Variant v : {Variant::siv_id, Variant::siv_vd}) {
    const double gamma = unif(c.rng, 0.1, 0.6), theta = unif(c.rng, 0.1, 0.6);
    const auto model = with_ratio(v == Variant::siv_id ? siv_id(0.5, 0.9, gamma, theta) : siv_vd(0.5, 0.9, gamma, theta), g, 0.5);
    const auto res = mc_ensemble(model, g, InitSpec::with_fraction(0.1), 400, reps, c.rng());
    const double frac = res.rows.back().mean_s / static_cast<double>(n);
    const double target = gamma / (gamma + theta);
    const double sigma = std::sqrt(target * (1.0 - target) / static_cast<double>(n * reps));
    const bool ok = res.extinct_count() == reps && std::abs(frac - target) <= 3.0 * sigma;
    mc.push_back({{"variant", to_string(v)}, {"s_fraction", frac}, {"target", target}, {"sigma", sigma},
                  {"extinct", res.extinct_count()}});
    if (!ok && !mc_bad) mc_bad = mc.back();
  }
  return finish("siv-stationary", json{{"instances", c.trials}, {"max_defect", -tr.worst}, {"monte_carlo", mc}},
                tr.offending ? tr.offending : mc_bad);
}

SuiteResult suite_oracle(Ctx& c) {
  std::optional<json> bad;
  const std::size_t reps = c.trials;
  double worst_z = 0.0;
  std::size_t compared = 0;
  for (const Variant v : kAllVariants) {
    for (const std::size_t n : {std::min<std::size_t>(3, c.n_max), std::min<std::size_t>(6, c.n_max)}) {
      const auto g = random_connected_graph(n, c.rng, 0.4, v == Variant::sis_nia);
      const auto model = random_model(v, n, c.rng);
      const auto S = build_transition_matrix(model, g);
      const int k = model.k();
      std::vector<std::uint8_t> mixed(n);
      for (auto& d : mixed) d = static_cast<std::uint8_t>(pick(c.rng, 0, static_cast<std::size_t>(k - 1)));
      for (const auto& digits : {std::vector<std::uint8_t>(n, 1), mixed}) {
        const auto res = mc_ensemble(model, g, InitSpec::with_states(digits), 1, reps, c.rng(), {{1}, 0});
        const auto exact = marginals(propagate(point_mass(S.dim, encode_state(digits, k)), S, 1), k, n);
        auto compare = [&](double p, std::uint64_t count, std::size_t node, const char* which) {
          const double hat = static_cast<double>(count) / static_cast<double>(reps);
          const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(reps));
          const double dev = std::abs(hat - p);
          ++compared;
          if (sigma > 0.0) worst_z = std::max(worst_z, dev / sigma);
          if (dev > 4.0 * sigma + 1e-12 && !bad) {
            bad = instance_json(model, g);
            (*bad)["initial"] = digits;
            (*bad)["node"] = node;
            (*bad)["marginal"] = which;
            (*bad)["exact"] = p;
            (*bad)["sampled"] = hat;
          }
        };
        for (std::size_t i = 0; i < n; ++i) {
          compare(exact.p_i[i], res.marginals[0].infected[i], i, "infected");
          if (k == 3) compare(exact.p_r[i], res.marginals[0].recovered[i], i, "recovered");
        }
      }
    }
  }
  return finish("oracle", json{{"replicates", reps}, {"comparisons", compared}, {"max_abs_z", worst_z}}, bad);
}

SuiteResult suite_fixed_point_relations(Ctx& c) {
  std::optional<json> bad;
  std::map<std::string, json> per;
  double reduction = 0.0;
  std::size_t base_checks = 0;
  for (const Variant v : {Variant::sirs, Variant::siv_id, Variant::siv_vd}) {
    std::size_t endemic = 0, other = 0;
    double worst = 0.0;
    for (std::size_t t = 0; t < c.trials; ++t) {
      const std::size_t n = pick(c.rng, 2, std::max<std::size_t>(2, c.n_max));
      const auto g = random_connected_graph(n, c.rng, std::min(0.4, 4.0 / static_cast<double>(n)), t % 3 == 2);
      ModelSpec model = random_model(v, n, c.rng);
      try {
        model = with_ratio(model, g, unif(c.rng, 1.1, 3.0));
      } catch (const ModelError&) {
      }
      const auto fp = find_fixed_point(model, g);
      if (fp.classification != Classification::endemic) {
        ++other;
        continue;
      }
      ++endemic;
      const double defect = fp.relation_defect.value_or(kInfinity);
      worst = std::max(worst, defect);
      if (!(defect <= 1e-8) && !bad) {
        bad = instance_json(model, g);
        (*bad)["relation_defect"] = defect;
      }
    }
    per[std::string(to_string(v))] = {{"endemic", endemic}, {"not_endemic", other}, {"max_relation_defect", worst}};
  }
  for (std::size_t t = 0; t < c.trials; ++t) {
    const std::size_t n = pick(c.rng, 1, 12);
    const auto g = random_connected_graph(n, c.rng, 0.3, false);
    const Variant v = t % 2 ? Variant::siv_vd : Variant::siv_id;
    const auto model = random_model(v, n, c.rng);
    const double ratio = threshold_ratio(model, g);
    if (std::abs(ratio - 1.0) < 1e-6) continue;
    const auto lm = mf_linear_model(model, g);
    const bool stable = spectral_radius(lm.matrix) < 1.0;
    ++base_checks;
    if (stable != (ratio < 1.0) && !bad) {
      bad = instance_json(model, g);
      (*bad)["check"] = "base point stability";
      (*bad)["ratio"] = ratio;
    }
    const auto plain = sirs(*model.beta, *model.delta, *model.gamma);
    auto zero = model;
    zero.theta = 0.0;
    const auto x = random_interior(model, n, c.rng);
    const auto a = mf_step(zero, g, x), b = mf_step(plain, g, x);
    reduction = std::max({reduction, inf_norm(a.p_i - b.p_i), inf_norm(a.p_r - b.p_r)});
  }
  if (reduction > 1e-15 && !bad) bad = json{{"check", "theta = 0 reduction"}, {"difference", reduction}};
  json d{{"variants", per}, {"base_point_checks", base_checks}, {"theta_zero_difference", reduction}};
  return finish("fixed-point-relations", d, bad);
}

SuiteResult suite_monotone(Ctx& c) {
  Tracker tr;
  for (std::size_t t = 0; t < c.trials; ++t) {
    const std::size_t n = pick(c.rng, 1, c.n_max);
    const auto g = random_connected_graph(n, c.rng, std::min(0.3, 3.0 / static_cast<double>(n)), t % 2 == 1);
    const auto model = sis_nia(unif(c.rng), unif(c.rng));
    const Eigen::VectorXd x = random_vector(n, c.rng, 0.0, 1.0);
    Eigen::VectorXd y = x;
    for (auto& e : y) e += unif(c.rng) * (1.0 - e);
    const auto fx = mf_step(model, g, {x, {}}), fy = mf_step(model, g, {y, {}});
    tr.see((fy.p_i - fx.p_i).minCoeff(), -1e-15, [&] {
      auto j = instance_json(model, g);
      j["x"] = vec_json(x);
      j["y"] = vec_json(y);
      return j;
    });
  }
  // descent from the all-ones corner is asserted inside the solver at every step
  std::size_t descents = 0;
  std::optional<json> bad;
  for (std::size_t t = 0; t < std::max<std::size_t>(1, c.trials / 20); ++t) {
    const std::size_t n = pick(c.rng, 1, c.n_max);
    const auto g = random_connected_graph(n, c.rng, std::min(0.3, 3.0 / static_cast<double>(n)), false);
    const auto model = t % 2 ? sis_nia(unif(c.rng), unif(c.rng)) : sis_general(random_contact(n, c.rng, 1.0 / static_cast<double>(n)));
    try {
      FixedPointOptions o;
      o.spectrum = false;
      find_fixed_point(model, g, o);
      ++descents;
    } catch (const InvariantError& e) {
      if (!bad) {
        bad = instance_json(model, g);
        (*bad)["error"] = e.what();
      }
    }
  }
  return finish("monotone", json{{"pairs", c.trials}, {"min_slack", tr.worst}, {"upper_iterations", descents}},
                tr.offending ? tr.offending : bad);
}

struct SuiteDef {
  std::size_t n_max;
  std::size_t trials;
  std::function<SuiteResult(Ctx&)> run;
};

const std::vector<std::pair<std::string, SuiteDef>>& registry() {
  static const std::vector<std::pair<std::string, SuiteDef>> r{
      {"ordering", {5, 50, suite_ordering}},
      {"ubound", {6, 100, suite_ubound}},
      {"lp", {4, 40, suite_lp}},
      {"nonabsorption", {6, 100, suite_nonabsorption}},
      {"linear-bound", {50, 1000, suite_linear_bound}},
      {"jacobian", {8, 100, suite_jacobian}},
      {"threshold", {12, 20, suite_threshold}},
      {"mixing", {12, 10, suite_mixing}},
      {"extinction-scaling", {64, 200, suite_extinction_scaling}},
      {"stability", {800, 40, suite_stability}},
      {"real-eigen", {8, 30, suite_real_eigen}},
      {"siv-stationary", {4, 20, suite_siv_stationary}},
      {"oracle", {6, 100000, suite_oracle}},
      {"fixed-point-relations", {30, 30, suite_fixed_point_relations}},
      {"monotone", {30, 1000, suite_monotone}},
  };
  return r;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, def] : registry()) v.push_back(name);
    return v;
  }();
  return names;
}

SuiteResult run_suite(const std::string& name, const VerifyOptions& opts) {
  const auto& reg = registry();
  for (std::size_t i = 0; i < reg.size(); ++i) {
    if (reg[i].first != name) continue;
    const auto& def = reg[i].second;
    Ctx c{opts.n_max.value_or(def.n_max), opts.trials.value_or(def.trials), Rng(opts.seed * 0x9E3779B97F4A7C15ULL + i)};
    if (c.n_max == 0 || c.trials == 0) throw std::invalid_argument("n-max and trials must be positive");
    auto res = def.run(c);
    res.detail["seed"] = opts.seed;
    res.detail["n_max"] = c.n_max;
    res.detail["trials"] = c.trials;
    return res;
  }
  throw std::invalid_argument("unknown suite: " + name);
}

json model_json(const ModelSpec& model) {
  json j{{"variant", to_string(model.variant)}};
  if (model.beta) j["beta"] = *model.beta;
  if (model.delta) j["delta"] = *model.delta;
  if (model.gamma) j["gamma"] = *model.gamma;
  if (model.theta) j["theta"] = *model.theta;
  if (model.contact) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < model.contact->rows(); ++i) rows.push_back(vec_json(model.contact->row(i).transpose()));
    j["contact"] = rows;
  }
  return j;
}

json instance_json(const ModelSpec& model, const Graph& g) {
  return {{"model", model_json(model)}, {"graph", format_edge_list(g)}};
}

Graph random_connected_graph(std::size_t n, std::mt19937_64& rng, double extra, bool weighted) {
  std::vector<Edge> edges;
  auto w = [&] { return weighted ? 1.0 - unif(rng) : 1.0; };
  for (std::size_t i = 1; i < n; ++i)
    edges.push_back({static_cast<std::uint32_t>(pick(rng, 0, i - 1)), static_cast<std::uint32_t>(i), w()});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (unif(rng) < extra) edges.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), w()});
  return Graph(n, std::move(edges));
}

Graph connected_er(std::size_t n, double p, std::uint64_t seed, std::uint64_t* used_seed) {
  for (std::uint64_t s = seed;; ++s) {
    auto g = generate({GeneratorKind::er, n, p}, s);
    if (g.connected()) {
      if (used_seed) *used_seed = s;
      return g;
    }
  }
}

}  // namespace epinet
