#include <doctest.h>

#include <cmath>
#include <random>

#include "epinet/chain.hpp"
#include "epinet/error.hpp"
#include "epinet/spectral.hpp"

using namespace epinet;

namespace {

Graph k2() { return parse_edge_list("0 1"); }

std::vector<std::uint8_t> digits(std::initializer_list<int> d) {
  std::vector<std::uint8_t> v;
  for (int x : d) v.push_back(static_cast<std::uint8_t>(x));
  return v;
}

Graph random_connected(std::size_t n, std::mt19937_64& rng, bool weighted = false) {
  std::vector<Edge> e;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 1; i < n; ++i)
    e.push_back({static_cast<std::uint32_t>(rng() % i), static_cast<std::uint32_t>(i), weighted ? u(rng) : 1.0});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (u(rng) < 0.3) e.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), weighted ? u(rng) : 1.0});
  return Graph(n, e);
}

double max_row_defect(const TransitionMatrix& S) {
  double worst = 0.0;
  for (std::size_t r = 0; r < S.dim; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < S.dim; ++c) {
      const double v = S.at(r, c);
      if (v < 0.0 || v > 1.0) return 1.0;
      sum += v;
    }
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

}  // namespace

TEST_CASE("state encoding round-trips") {
  for (int k : {2, 3})
    for (std::size_t code = 0; code < 81; ++code)
      if (code < static_cast<std::size_t>(std::pow(k, 4))) CHECK(encode_state(decode_state(code, k, 4), k) == code);
  CHECK(decode_state(5, 3, 2) == digits({2, 1}));
  CHECK_THROWS_AS(state_count(2, 30), CapacityError);
  CHECK(state_count(3, 8) == 6561);
}

TEST_CASE("per-node transition probabilities") {
  // star with hub 0 and two infected leaves: m_0 = 2
  const auto star = parse_edge_list("0 1\n0 2");
  const auto x = digits({0, 1, 1});
  CHECK(node_transition_prob(sis_nia(0.5, 0.3), star, x, 0, 0) == doctest::Approx(0.25));
  CHECK(node_transition_prob(sis_nia(0.2, 0.5), parse_edge_list("n=1"), digits({1}), 0, 0) == 0.5);
  CHECK(node_transition_prob(sis_ia(0.9, 0.7), star, digits({1, 1, 1}), 0, 0) == doctest::Approx(0.7));
  CHECK(node_transition_prob(sis_ia(0.9, 0.7), star, digits({1, 0, 0}), 0, 0) == doctest::Approx(0.7));
  CHECK(node_transition_prob(sirs(0.3, 0.4, 0.5), star, digits({0, 1, 0}), 0, 2) == 0.0);
  // siv-id: S node with one infected neighbor, (1 - beta) theta
  CHECK(node_transition_prob(siv_id(0.5, 0.3, 0.2, 0.4), k2(), digits({0, 1}), 0, 2) == doctest::Approx(0.2));
  CHECK_THROWS_AS(node_transition_prob(sis_nia(0.5, 0.5), k2(), digits({0, 1}), 0, 2), ModelError);
}

TEST_CASE("transition matrix examples") {
  const auto S = build_transition_matrix(sis_nia(0.5, 0.5), k2());
  // (1,1) -> (0,0): (delta (1 - beta))^2
  CHECK(S.at(3, 0) == doctest::Approx(0.0625));
  CHECK(S.at(0, 0) == 1.0);
  for (std::size_t c = 1; c < 4; ++c) CHECK(S.at(0, c) == 0.0);

  const auto single = build_transition_matrix(sis_nia(0.3, 0.4), parse_edge_list("n=1"));
  CHECK(single.at(0, 0) == 1.0);
  CHECK(single.at(0, 1) == 0.0);
  CHECK(single.at(1, 0) == doctest::Approx(0.4));
  CHECK(single.at(1, 1) == doctest::Approx(0.6));
}

TEST_CASE("rows are stochastic for all six variants") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 6; ++trial) {
    for (std::size_t n = 1; n <= 6; ++n) {
      const auto g = random_connected(n, rng, trial % 2 == 1);
      const double b = u(rng), d = u(rng), gm = u(rng), th = 0.5 * u(rng);
      Eigen::MatrixXd m = Eigen::MatrixXd::NullaryExpr(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n),
                                                       [&] { return u(rng); });
      std::vector<ModelSpec> models = {sis_nia(b, d), sis_ia(b, d), sis_general(m)};
      if (n <= 4) {
        models.push_back(sirs(b, d, gm));
        models.push_back(siv_id(b, d, gm, th));
        models.push_back(siv_vd(b, d, gm, th));
      }
      for (const auto& model : models) {
        const auto S = build_transition_matrix(model, g);
        CHECK(max_row_defect(S) <= 1e-12);
        if (!is_siv(model.variant)) CHECK(S.at(0, 0) == 1.0);
      }
    }
  }
}

TEST_CASE("propagate and marginals") {
  const auto S = build_transition_matrix(sis_nia(0.3, 0.4), parse_edge_list("n=1"));
  const auto mu = point_mass(2, 1);
  CHECK(propagate(mu, S, 0) == mu);
  const auto one = propagate(mu, S, 1);
  CHECK(one[0] == doctest::Approx(0.4));
  CHECK(one[1] == doctest::Approx(0.6));

  const auto S2 = build_transition_matrix(sis_nia(0.3, 0.4), k2());
  CHECK(propagate(point_mass(4, 0), S2, 25) == point_mass(4, 0));

  auto m = marginals(point_mass(4, 3), 2, 2);
  CHECK(m.p_i == std::vector<double>{1.0, 1.0});
  m = marginals(point_mass(9, 0), 3, 2);
  CHECK(m.p_i == std::vector<double>{0.0, 0.0});
  CHECK(m.p_r == std::vector<double>{0.0, 0.0});
  m = marginals({0.25, 0.25, 0.25, 0.25}, 2, 2);
  CHECK(m.p_i == std::vector<double>{0.5, 0.5});
  m = marginals(point_mass(9, 5), 3, 2);  // digits (2, 1)
  CHECK(m.p_r == std::vector<double>{1.0, 0.0});
  CHECK(m.p_i == std::vector<double>{0.0, 1.0});
}

TEST_CASE("stationary distributions") {
  const auto g = parse_edge_list("0 1\n1 2");
  const auto model = sirs(0.3, 0.4, 0.5);
  const auto pi = stationary(model, g, build_transition_matrix(model, g));
  CHECK(pi == point_mass(27, 0));

  const auto one = siv_id(0.3, 0.4, 0.5, 0.5);
  const auto g1 = parse_edge_list("n=1");
  const auto p1 = stationary(one, g1, build_transition_matrix(one, g1));
  CHECK(p1[0] == doctest::Approx(0.5));
  CHECK(p1[1] == 0.0);
  CHECK(p1[2] == doctest::Approx(0.5));

  const auto vd = siv_vd(0.2, 0.5, 0.3, 0.6);
  const auto p2 = stationary(vd, k2(), build_transition_matrix(vd, k2()));
  CHECK(p2[0] == doctest::Approx(1.0 / 9.0));
}

TEST_CASE("total variation") {
  CHECK(tv_distance({0.2, 0.8}, {0.2, 0.8}) == 0.0);
  CHECK(tv_distance({1.0, 0.0}, {0.0, 1.0}) == 1.0);
  CHECK(tv_distance({0.5, 0.5}, {1.0, 0.0}) == 0.5);
}

TEST_CASE("exact mixing time") {
  const auto g1 = parse_edge_list("n=1");
  auto S = build_transition_matrix(sis_nia(0.3, 1.0), g1);
  auto rep = mixing_time_exact(S, point_mass(2, 0), 0.25);
  CHECK(rep.reached);
  CHECK(rep.t_mix == 1);

  TransitionMatrix trivial{2, 0, 1, {1.0}};
  rep = mixing_time_exact(trivial, {1.0}, 0.25);
  CHECK(rep.t_mix == 0);

  const auto path = parse_edge_list("0 1\n1 2");
  const auto model = sis_nia(0.1, 0.9);
  S = build_transition_matrix(model, path);
  rep = mixing_time_exact(S, stationary(model, path, S), 0.25);
  const double norm = 0.1 + 0.1 * std::sqrt(2.0);
  const double bound = std::log(3.0 / 0.25) / -std::log(norm);
  CHECK(rep.reached);
  CHECK(static_cast<double>(rep.t_mix) <= std::ceil(bound));
  CHECK(mixing_time_bound(model, path, 0.25) == doctest::Approx(bound));
  CHECK(rep.worst_always_all_infected);
  for (std::size_t t = 1; t < rep.distance.size(); ++t) CHECK(rep.distance[t] <= rep.distance[t - 1] + 1e-15);
}

TEST_CASE("exact mixing with a product-form target") {
  const auto model = siv_id(0.2, 0.6, 0.4, 0.3);
  const auto g = parse_edge_list("0 1");
  const auto S = build_transition_matrix(model, g);
  const auto pi = stationary(model, g, S);
  const auto rep = mixing_time_exact(S, pi, 0.25);
  CHECK(rep.reached);
  // brute force: d(t) from explicit powers
  double d = 0.0;
  for (std::size_t x = 0; x < S.dim; ++x)
    d = std::max(d, tv_distance(propagate(point_mass(S.dim, x), S, rep.t_mix), pi));
  CHECK(d == doctest::Approx(rep.final_distance).epsilon(1e-12));
  CHECK(d <= 0.25);
  if (rep.t_mix > 0) {
    double before = 0.0;
    for (std::size_t x = 0; x < S.dim; ++x)
      before = std::max(before, tv_distance(propagate(point_mass(S.dim, x), S, rep.t_mix - 1), pi));
    CHECK(before > 0.25);
  }
}

TEST_CASE("dense cap") {
  const auto g = generate({GeneratorKind::path, 30}, 0);
  CHECK_THROWS_AS(build_transition_matrix(sis_nia(0.1, 0.5), g), CapacityError);
  try {
    build_transition_matrix(sis_nia(0.1, 0.5), g);
  } catch (const CapacityError& e) {
    CHECK(e.cap() == kDefaultStateCap);
  }
}
