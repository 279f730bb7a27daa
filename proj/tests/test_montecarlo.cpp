#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "epinet/chain.hpp"
#include "epinet/meanfield.hpp"
#include "epinet/montecarlo.hpp"

using namespace epinet;

namespace {

std::vector<ModelSpec> variants(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  Eigen::MatrixXd m = Eigen::MatrixXd::NullaryExpr(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n),
                                                   [&] { return 0.3 * u(rng); });
  m.diagonal().setConstant(u(rng));
  return {sis_nia(u(rng), u(rng)), sis_ia(u(rng), u(rng)),       sis_general(m),
          sirs(u(rng), u(rng), u(rng)), siv_id(u(rng), u(rng), u(rng), u(rng)), siv_vd(u(rng), u(rng), u(rng), u(rng))};
}

}  // namespace

TEST_CASE("single steps") {
  const auto k2 = parse_edge_list("0 1");
  auto s = initial_state(sis_nia(1.0, 1.0), k2, InitSpec::all_infected(), 1, 0);
  for (int t = 0; t < 50; ++t) s = mc_step(sis_nia(1.0, 1.0), k2, s);
  CHECK(s.states == std::vector<std::uint8_t>{1, 1});
  CHECK(s.t == 50);

  const auto rec = mc_run(sis_ia(1.0, 1.0), k2, InitSpec::all_infected(), 5, 1, 0);
  REQUIRE(rec.extinction_step);
  CHECK(*rec.extinction_step == 1);
  CHECK(rec.rows[1].i == 0);

  const auto path = generate({GeneratorKind::path, 6}, 0);
  auto h = initial_state(sis_nia(0.0, 0.5), path, InitSpec::with_infected_set(6, {}), 3, 2);
  CHECK(mc_step(sis_nia(0.0, 0.5), path, h).states == h.states);
}

TEST_CASE("zero infection with full recovery") {
  const auto g = generate({GeneratorKind::complete, 7}, 0);
  const auto rec = mc_run(sis_nia(0.0, 1.0), g, InitSpec::all_infected(), 4, 9, 0);
  CHECK(rec.rows[0].i == 7);
  for (std::size_t t = 1; t < rec.rows.size(); ++t) CHECK(rec.rows[t].i == 0);
  CHECK(extinction_time(sis_nia(0.0, 1.0), g, InitSpec::all_infected(), 9, 0, 100) == std::optional<std::size_t>(1));
  CHECK_FALSE(extinction_time(sis_nia(0.9, 0.1), g, InitSpec::all_infected(), 9, 0, 200).has_value());
}

TEST_CASE("determinism and conservation") {
  std::mt19937_64 rng(7);
  const auto g = generate({GeneratorKind::er, 30, 0.2}, 3);
  for (const auto& model : variants(rng, 30)) {
    const auto init = InitSpec::with_fraction(0.5);
    const auto a = mc_run(model, g, init, 200, 42, 3);
    const auto b = mc_run(model, g, init, 200, 42, 3);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t t = 0; t < a.rows.size(); ++t) {
      CHECK(a.rows[t].s == b.rows[t].s);
      CHECK(a.rows[t].i == b.rows[t].i);
      CHECK(a.rows[t].s + a.rows[t].i + a.rows[t].r == 30);
      if (model.k() == 2) CHECK(a.rows[t].r == 0);
    }
  }
}

TEST_CASE("absorbing states") {
  const auto g = generate({GeneratorKind::complete, 5}, 0);
  const auto healthy = InitSpec::with_infected_set(5, {});
  for (const auto& model : {sis_nia(0.9, 0.1), sirs(0.9, 0.1, 0.5)}) {
    const auto rec = mc_run(model, g, healthy, 20, 1, 0);
    CHECK(rec.extinction_step == std::optional<std::size_t>(0));
    for (const auto& row : rec.rows) CHECK(row.s == 5);
  }
  const auto siv = siv_id(0.9, 0.1, 0.3, 0.4);
  auto s = initial_state(siv, g, healthy, 1, 0);
  for (int t = 0; t < 200; ++t) {
    s = mc_step(siv, g, s);
    CHECK(count_states(s.states).i == 0);
  }
}

TEST_CASE("ensemble plumbing") {
  std::mt19937_64 rng(8);
  const auto g = generate({GeneratorKind::geometric, 20, 0.0, 0.4}, 4);
  for (const auto& model : variants(rng, 20)) {
    const auto one = mc_ensemble(model, g, InitSpec::all_infected(), 30, 1, 77);
    const auto run = mc_run(model, g, InitSpec::all_infected(), 30, 77, 0);
    REQUIRE(one.rows.size() == 31);
    for (std::size_t t = 0; t < one.rows.size(); ++t) {
      const auto& c = t < run.rows.size() ? run.rows[t] : run.rows.back();
      CHECK(one.rows[t].mean_i == static_cast<double>(c.i));
      CHECK(one.rows[t].q50_i == static_cast<double>(c.i));
    }
    CHECK(one.extinction[0] == run.extinction_step);

    EnsembleOptions serial{{0, 5}, 1}, parallel{{0, 5}, 4};
    const auto a = mc_ensemble(model, g, InitSpec::with_fraction(0.3), 30, 17, 5, serial);
    const auto b = mc_ensemble(model, g, InitSpec::with_fraction(0.3), 30, 17, 5, parallel);
    for (std::size_t t = 0; t < a.rows.size(); ++t) {
      CHECK(a.rows[t].mean_s == b.rows[t].mean_s);
      CHECK(a.rows[t].mean_i == b.rows[t].mean_i);
      CHECK(a.rows[t].q95_i == b.rows[t].q95_i);
    }
    CHECK(a.extinction == b.extinction);
    CHECK(a.marginals[1].infected == b.marginals[1].infected);
  }
}

TEST_CASE("sampled one-step marginals match the exact chain") {
  std::mt19937_64 rng(9);
  const std::size_t reps = 100000;
  int checked = 0;
  for (std::size_t n = 3; n <= 6; n += 3) {
    const auto g = generate({GeneratorKind::er, n, 0.6}, n);
    for (const auto& model : variants(rng, n)) {
      const auto res = mc_ensemble(model, g, InitSpec::all_infected(), 1, reps, 1000 + n, {{1}, 0});
      const auto S = build_transition_matrix(model, g);
      const auto exact = marginals(propagate(point_mass(S.dim, S.dim == 0 ? 0 : encode_state(std::vector<std::uint8_t>(n, 1), model.k())), S, 1), model.k(), n);
      for (std::size_t i = 0; i < n; ++i) {
        const double p = exact.p_i[i];
        const double hat = static_cast<double>(res.marginals[0].infected[i]) / static_cast<double>(reps);
        const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(reps));
        CHECK(std::abs(hat - p) <= 4.0 * sigma + 1e-12);
        if (model.k() == 3) {
          const double pr = exact.p_r[i];
          const double hr = static_cast<double>(res.marginals[0].recovered[i]) / static_cast<double>(reps);
          CHECK(std::abs(hr - pr) <= 4.0 * std::sqrt(pr * (1.0 - pr) / static_cast<double>(reps)) + 1e-12);
        }
        ++checked;
      }
    }
  }
  CHECK(checked == 6 * 9);
}

TEST_CASE("one-step mean domination") {
  const auto g = generate({GeneratorKind::er, 40, 0.15}, 11);
  const auto model = sis_nia(0.08, 0.4);
  const std::size_t reps = 20000;
  const auto res = mc_ensemble(model, g, InitSpec::with_fraction(0.5), 6, reps, 5, {{4, 5}, 0});
  Eigen::VectorXd p4(40), p5(40);
  for (std::size_t i = 0; i < 40; ++i) {
    p4[static_cast<Eigen::Index>(i)] = static_cast<double>(res.marginals[0].infected[i]) / reps;
    p5[static_cast<Eigen::Index>(i)] = static_cast<double>(res.marginals[1].infected[i]) / reps;
  }
  MeanFieldPoint x{p4, {}};
  const auto bound = linear_bound_map(model, g, x);
  for (Eigen::Index i = 0; i < 40; ++i) {
    const double sigma = std::sqrt(std::max(p5[i] * (1.0 - p5[i]), 1.0 / reps) / reps);
    CHECK(p5[i] <= std::min(1.0, bound[i]) + 4.0 * sigma);
  }
}

TEST_CASE("SIV long-run susceptible fraction") {
  const auto g = generate({GeneratorKind::er, 200, 0.02}, 12);
  const double gamma = 0.3, theta = 0.2;
  const auto model = siv_id(0.01, 0.9, gamma, theta);
  const std::size_t reps = 20;
  const auto res = mc_ensemble(model, g, InitSpec::with_fraction(0.1), 400, reps, 13);
  REQUIRE(res.extinct_count() == reps);
  const double mean_s = res.rows.back().mean_s / 200.0;
  const double target = gamma / (gamma + theta);
  const double sigma = std::sqrt(target * (1.0 - target) / (200.0 * reps));
  CHECK(std::abs(mean_s - target) <= 3.0 * sigma);
}

TEST_CASE("worker count honours the environment") {
  setenv("EPINET_THREADS", "2", 1);
  CHECK(worker_count(8) == 2);
  CHECK(worker_count(1) == 1);
  unsetenv("EPINET_THREADS");
  CHECK(worker_count(3) == 3);
}
