#include "epinet/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>

#include "epinet/chain.hpp"
#include "epinet/error.hpp"
#include "epinet/kernels.hpp"

namespace epinet {

InitSpec InitSpec::with_infected_set(std::size_t n, const std::vector<std::size_t>& infected) {
  std::vector<std::uint8_t> d(n, 0);
  for (auto i : infected) d.at(i) = 1;
  return with_states(std::move(d));
}

Counts count_states(const std::vector<std::uint8_t>& states) {
  Counts c;
  for (auto s : states) {
    if (s == 0) ++c.s;
    else if (s == 1) ++c.i;
    else ++c.r;
  }
  return c;
}

namespace {

class Simulator {
 public:
  Simulator(const ModelSpec& model, const Graph& g)
      : model_(model), g_(g), kt_(kernels::active()), u_(g.n()), q_(g.n()), m_(g.n()) {
    model_.validate(g.n());
    if (g.n() > 0xFFFFFFF0ULL) throw std::invalid_argument("graph too large for the counter layout");
    general_ = model.variant == Variant::sis_general;
    if (!general_) {
      beta_ = model.b();
      if (!g.weighted()) {
        std::size_t dmax = 0;
        for (std::size_t i = 0; i < g.n(); ++i) dmax = std::max(dmax, g.degree(i));
        pow_.resize(dmax + 1);
        pow_[0] = 1.0;
        for (std::size_t m = 1; m <= dmax; ++m) pow_[m] = pow_[m - 1] * (1.0 - beta_);
      }
    }
  }

  // next = one step from cur; `infected` is the count of 1-digits in cur
  void step(const std::vector<std::uint8_t>& cur, std::vector<std::uint8_t>& next, std::uint32_t t,
            std::uint64_t seed, std::uint32_t rep, std::uint32_t infected) {
    const std::size_t n = g_.n();
    kt_.philox_uniforms({seed, t, rep, kDynamicsStream}, 0, u_.data(), n);
    fill_pressure(cur, infected);
    next.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = node_row(model_, cur, i, q_[i]);
      const double u = u_[i];
      next[i] = u < row[0] ? 0 : (u < row[0] + row[1] ? 1 : 2);
      // row sums can round just below 1
      if (next[i] == 2 && row[2] == 0.0) next[i] = row[1] > 0.0 ? 1 : 0;
    }
  }

 private:
  void fill_pressure(const std::vector<std::uint8_t>& cur, std::uint32_t infected) {
    const std::size_t n = g_.n();
    std::fill(q_.begin(), q_.end(), 1.0);
    if (infected == 0) return;
    if (general_) {
      const auto& m = model_.m();
      for (std::size_t j = 0; j < n; ++j) {
        if (cur[j] != 1) continue;
        for (std::size_t i = 0; i < n; ++i)
          q_[i] *= 1.0 - m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
      return;
    }
    if (!pow_.empty()) {
      std::fill(m_.begin(), m_.end(), 0U);
      for (std::size_t j = 0; j < n; ++j)
        if (cur[j] == 1)
          for (auto v : g_.neighbors(j)) ++m_[v];
      for (std::size_t i = 0; i < n; ++i) q_[i] = pow_[m_[i]];
      return;
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (cur[j] != 1) continue;
      const auto nb = g_.neighbors(j);
      const auto w = g_.neighbor_weights(j);
      for (std::size_t k = 0; k < nb.size(); ++k) q_[nb[k]] *= 1.0 - beta_ * w[k];
    }
  }

  const ModelSpec& model_;
  const Graph& g_;
  const kernels::Table& kt_;
  bool general_ = false;
  double beta_ = 0.0;
  std::vector<double> pow_;
  std::vector<double> u_;
  std::vector<double> q_;
  std::vector<std::uint32_t> m_;
};

bool absorbed(Variant v, const Counts& c) {
  if (states_per_node(v) == 2) return c.i == 0;
  if (v == Variant::sirs) return c.i == 0 && c.r == 0;
  return false;
}

using StateHook = std::function<void(std::size_t t, const std::vector<std::uint8_t>&, const Counts&)>;

std::optional<std::size_t> run_replicate(Simulator& sim, const ModelSpec& model, const Graph& g,
                                         const InitSpec& init, std::size_t t_max, std::uint64_t seed,
                                         std::uint32_t rep, bool stop_at_extinction,
                                         const StateHook& hook) {
  if (t_max >= 0xFFFFFFFFULL) throw std::invalid_argument("t_max exceeds the counter range");
  auto st = initial_state(model, g, init, seed, rep);
  std::vector<std::uint8_t> cur = std::move(st.states), next;
  Counts c = count_states(cur);
  std::optional<std::size_t> ext;
  if (c.i == 0) ext = 0;
  if (hook) hook(0, cur, c);
  if (ext && stop_at_extinction) return ext;
  for (std::size_t t = 0; t < t_max; ++t) {
    if (absorbed(model.variant, c)) {
      if (hook)
        for (std::size_t s = t + 1; s <= t_max; ++s) hook(s, cur, c);
      break;
    }
    sim.step(cur, next, static_cast<std::uint32_t>(t), seed, rep, c.i);
    cur.swap(next);
    c = count_states(cur);
    if (!ext && c.i == 0) {
      ext = t + 1;
      if (stop_at_extinction) return ext;
    }
    if (hook) hook(t + 1, cur, c);
  }
  return ext;
}

}  // namespace

SimState initial_state(const ModelSpec& model, const Graph& g, const InitSpec& init,
                       std::uint64_t seed, std::uint32_t replicate) {
  SimState s;
  s.seed = seed;
  s.replicate = replicate;
  const std::size_t n = g.n();
  switch (init.kind) {
    case InitSpec::Kind::all_infected:
      s.states.assign(n, 1);
      break;
    case InitSpec::Kind::fraction: {
      if (!(init.fraction >= 0.0 && init.fraction <= 1.0))
        throw std::invalid_argument("initial fraction must lie in [0,1]");
      std::vector<double> u(n);
      kernels::active().philox_uniforms({seed, 0, replicate, kInitStream}, 0, u.data(), n);
      s.states.resize(n);
      for (std::size_t i = 0; i < n; ++i) s.states[i] = u[i] < init.fraction ? 1 : 0;
      break;
    }
    case InitSpec::Kind::explicit_states:
      if (init.digits.size() != n) throw std::invalid_argument("initial state has the wrong length");
      for (auto d : init.digits)
        if (d >= model.k()) throw std::invalid_argument("initial state digit out of range");
      s.states = init.digits;
      break;
  }
  return s;
}

SimState mc_step(const ModelSpec& model, const Graph& g, const SimState& state) {
  Simulator sim(model, g);
  SimState out = state;
  sim.step(state.states, out.states, state.t, state.seed, state.replicate, count_states(state.states).i);
  out.t = state.t + 1;
  return out;
}

TrajectoryRecord mc_run(const ModelSpec& model, const Graph& g, const InitSpec& init,
                        std::size_t t_max, std::uint64_t seed, std::uint32_t replicate) {
  if (t_max < 1) throw std::invalid_argument("t_max must be at least 1");
  Simulator sim(model, g);
  TrajectoryRecord rec;
  rec.rows.reserve(t_max + 1);
  rec.extinction_step = run_replicate(sim, model, g, init, t_max, seed, replicate, false,
                                      [&](std::size_t, const std::vector<std::uint8_t>&, const Counts& c) {
                                        rec.rows.push_back(c);
                                      });
  return rec;
}

std::optional<std::size_t> extinction_time(const ModelSpec& model, const Graph& g,
                                           const InitSpec& init, std::uint64_t seed,
                                           std::uint32_t replicate, std::size_t cap) {
  Simulator sim(model, g);
  return run_replicate(sim, model, g, init, cap, seed, replicate, true, nullptr);
}

unsigned worker_count(unsigned requested) {
  unsigned w = requested ? requested : std::max(1U, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("EPINET_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) w = std::min<unsigned>(w, static_cast<unsigned>(cap));
  }
  return std::max(1U, w);
}

std::size_t EnsembleResult::extinct_count() const {
  return static_cast<std::size_t>(std::count_if(extinction.begin(), extinction.end(),
                                                [](const auto& e) { return e.has_value(); }));
}

namespace {

double quantile(std::vector<std::uint32_t>& v, double q) {
  std::sort(v.begin(), v.end());
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (static_cast<double>(v[hi]) - v[lo]);
}

struct Accum {
  std::vector<std::uint64_t> s, i, r;
  std::vector<NodeMarginals> marg;
};

}  // namespace

EnsembleResult mc_ensemble(const ModelSpec& model, const Graph& g, const InitSpec& init,
                           std::size_t t_max, std::size_t n_reps, std::uint64_t master_seed,
                           const EnsembleOptions& opts) {
  if (n_reps < 1) throw std::invalid_argument("n_reps must be at least 1");
  if (t_max < 1) throw std::invalid_argument("t_max must be at least 1");
  if (n_reps > 0xFFFFFFFFULL) throw std::invalid_argument("too many replicates");
  const std::size_t cells = (t_max + 1) * n_reps;
  if (cells > (std::size_t{1} << 28)) throw CapacityError(cells, std::size_t{1} << 28);
  for (auto t : opts.marginal_times)
    if (t > t_max) throw std::invalid_argument("marginal time beyond t_max");

  const std::size_t n = g.n();
  std::vector<std::uint32_t> icount(cells);
  EnsembleResult res;
  res.n_reps = n_reps;
  res.extinction.resize(n_reps);

  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(opts.threads), n_reps));
  std::vector<Accum> acc(workers);
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](unsigned w) {
    try {
      Simulator sim(model, g);
      auto& a = acc[w];
      a.s.assign(t_max + 1, 0);
      a.i.assign(t_max + 1, 0);
      a.r.assign(t_max + 1, 0);
      for (auto t : opts.marginal_times)
        a.marg.push_back({t, std::vector<std::uint64_t>(n, 0), std::vector<std::uint64_t>(n, 0)});
      const std::size_t lo = n_reps * w / workers, hi = n_reps * (w + 1) / workers;
      for (std::size_t rep = lo; rep < hi; ++rep) {
        res.extinction[rep] = run_replicate(
            sim, model, g, init, t_max, master_seed, static_cast<std::uint32_t>(rep), false,
            [&](std::size_t t, const std::vector<std::uint8_t>& st, const Counts& c) {
              a.s[t] += c.s;
              a.i[t] += c.i;
              a.r[t] += c.r;
              icount[t * n_reps + rep] = c.i;
              for (auto& m : a.marg) {
                if (m.t != t) continue;
                for (std::size_t v = 0; v < n; ++v) {
                  if (st[v] == 1) ++m.infected[v];
                  else if (st[v] == 2) ++m.recovered[v];
                }
              }
            });
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  res.rows.resize(t_max + 1);
  res.marginals = acc[0].marg;
  for (unsigned w = 1; w < workers; ++w)
    for (std::size_t k = 0; k < res.marginals.size(); ++k)
      for (std::size_t v = 0; v < n; ++v) {
        res.marginals[k].infected[v] += acc[w].marg[k].infected[v];
        res.marginals[k].recovered[v] += acc[w].marg[k].recovered[v];
      }
  std::vector<std::uint32_t> col(n_reps);
  const double inv = 1.0 / static_cast<double>(n_reps);
  for (std::size_t t = 0; t <= t_max; ++t) {
    std::uint64_t s = 0, i = 0, r = 0;
    for (const auto& a : acc) {
      s += a.s[t];
      i += a.i[t];
      r += a.r[t];
    }
    auto& row = res.rows[t];
    row.mean_s = static_cast<double>(s) * inv;
    row.mean_i = static_cast<double>(i) * inv;
    row.mean_r = static_cast<double>(r) * inv;
    std::copy(icount.begin() + static_cast<std::ptrdiff_t>(t * n_reps),
              icount.begin() + static_cast<std::ptrdiff_t>((t + 1) * n_reps), col.begin());
    row.q05_i = quantile(col, 0.05);
    row.q50_i = quantile(col, 0.50);
    row.q95_i = quantile(col, 0.95);
  }
  return res;
}

}  // namespace epinet
