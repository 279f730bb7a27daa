#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "epinet/chain.hpp"
#include "epinet/error.hpp"
#include "epinet/io.hpp"
#include "epinet/meanfield.hpp"
#include "epinet/montecarlo.hpp"
#include "epinet/spectral.hpp"
#include "epinet/verify.hpp"

using namespace epinet;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kIo = 1, kUsage = 2, kNonConverged = 3, kVerifyFailed = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GraphArgs {
  std::string file;
  std::string kind;
  std::size_t n = 0;
  double p = 0.0;
  double r = 0.0;
  std::uint64_t seed = 1;
};

struct ModelArgs {
  std::string variant = "sis-nia";
  std::optional<double> beta, delta, gamma, theta;
  std::string contact;
};

void add_graph_options(CLI::App* cmd, GraphArgs& a) {
  auto* file = cmd->add_option("--graph", a.file, "edge-list file");
  auto* kind = cmd->add_option("--kind", a.kind, "generator: er, geometric, complete, star, path");
  file->excludes(kind);
  cmd->add_option("--n", a.n, "node count for --kind");
  cmd->add_option("--p", a.p, "edge probability (er)");
  cmd->add_option("--r", a.r, "radius (geometric)");
  cmd->add_option("--graph-seed", a.seed, "generator seed");
}

void add_model_options(CLI::App* cmd, ModelArgs& a, bool need_beta = true) {
  cmd->add_option("--variant", a.variant, "sis-nia, sis-ia, sis-general, sirs, siv-id, siv-vd");
  if (need_beta) cmd->add_option("--beta", a.beta);
  cmd->add_option("--delta", a.delta);
  cmd->add_option("--gamma", a.gamma);
  cmd->add_option("--theta", a.theta);
  cmd->add_option("--contact", a.contact, "contact matrix file (sis-general)");
}

Graph load_graph(const GraphArgs& a) {
  if (!a.file.empty()) {
    const auto text = read_file(a.file);
    return parse_edge_list(text);
  }
  if (a.kind.empty()) throw UsageError("a graph source is required: --graph FILE or --kind K --n N");
  if (a.n == 0) throw UsageError("--n must be positive");
  return generate({parse_generator_kind(a.kind), a.n, a.p, a.r}, a.seed);
}

ModelSpec build_model(const ModelArgs& a, const Graph& g) {
  ModelSpec m;
  m.variant = parse_variant(a.variant);
  if (m.variant == Variant::sis_general) {
    if (!a.contact.empty()) m.contact = parse_matrix(read_file(a.contact));
    else if (a.beta && a.delta) m.contact = contact_from_graph(g, *a.beta, *a.delta);
    else throw UsageError("sis-general needs --contact FILE or --beta and --delta");
  } else {
    m.beta = a.beta;
    m.delta = a.delta;
    if (m.k() == 3) m.gamma = a.gamma;
    if (is_siv(m.variant)) m.theta = a.theta;
  }
  m.validate(g.n());
  return m;
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty()) std::cout << content;
  else write_file_atomic(path, content);
}

json complex_list(const std::vector<std::complex<double>>& v) {
  json out = json::array();
  for (const auto& z : v) out.push_back({z.real(), z.imag()});
  return out;
}

json point_json(const MeanFieldPoint& x) {
  json j{{"p_i", std::vector<double>(x.p_i.data(), x.p_i.data() + x.p_i.size())}};
  if (x.p_r.size()) j["p_r"] = std::vector<double>(x.p_r.data(), x.p_r.data() + x.p_r.size());
  return j;
}

std::string ratio_text(double r) { return std::isfinite(r) ? format_double(r) : "inf"; }

InitSpec parse_init(const std::string& s, std::size_t n) {
  if (s == "all") return InitSpec::all_infected();
  if (s.rfind("fraction:", 0) == 0) {
    const double f = std::stod(s.substr(9));
    if (!(f >= 0.0 && f <= 1.0)) throw UsageError("fraction must lie in [0,1]");
    return InitSpec::with_fraction(f);
  }
  if (s.rfind("nodes:", 0) == 0) {
    std::vector<std::size_t> nodes;
    std::string rest = s.substr(6);
    std::size_t pos = 0;
    while (pos < rest.size()) {
      auto comma = rest.find(',', pos);
      if (comma == std::string::npos) comma = rest.size();
      const auto v = std::stoul(rest.substr(pos, comma - pos));
      if (v >= n) throw UsageError("initial node out of range");
      nodes.push_back(v);
      pos = comma + 1;
    }
    return InitSpec::with_infected_set(n, nodes);
  }
  throw UsageError("--init must be all, fraction:F or nodes:i,j,...");
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const auto m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

struct Extinction {
  std::size_t extinct = 0;
  double median = std::nan("");
};

Extinction extinction_summary(const EnsembleResult& res) {
  std::vector<double> times;
  for (const auto& e : res.extinction)
    if (e) times.push_back(static_cast<double>(*e));
  return {times.size(), median_of(times)};
}

std::string median_text(double m) { return std::isnan(m) ? "censored" : format_double(m); }

int run(int argc, char** argv) {
  CLI::App app{"Discrete-time network epidemics: simulation, mean-field and exact-chain analysis"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a graph");
  std::string gen_kind, gen_out;
  std::size_t gen_n = 0;
  double gen_p = 0.0, gen_r = 0.0;
  std::uint64_t gen_seed = 1;
  gen->add_option("--kind", gen_kind)->required();
  gen->add_option("--n", gen_n)->required();
  gen->add_option("--p", gen_p);
  gen->add_option("--r", gen_r);
  gen->add_option("--seed", gen_seed);
  gen->add_option("-o,--output", gen_out);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Monte Carlo ensemble");
  GraphArgs sim_g;
  ModelArgs sim_m;
  std::size_t sim_t = 1000, sim_reps = 1;
  std::uint64_t sim_seed = 1;
  std::string sim_init = "all", sim_out, sim_traj;
  add_graph_options(sim, sim_g);
  add_model_options(sim, sim_m);
  sim->add_option("--t", sim_t, "steps");
  sim->add_option("--reps", sim_reps, "replicates");
  sim->add_option("--seed", sim_seed);
  sim->add_option("--init", sim_init, "all, fraction:F or nodes:i,j,...");
  sim->add_option("-o,--output", sim_out, "ensemble CSV");
  sim->add_option("--trajectory", sim_traj, "CSV of replicate 0 (t,s,i,r)");

  // meanfield
  auto* mf = app.add_subcommand("meanfield", "fixed point of the mean-field map");
  GraphArgs mf_g;
  ModelArgs mf_m;
  bool mf_raw = false, mf_spectrum = false;
  double mf_tol = 1e-12;
  std::size_t mf_cap = 1'000'000, mf_steps = 0;
  std::string mf_out, mf_csv;
  add_graph_options(mf, mf_g);
  add_model_options(mf, mf_m);
  mf->add_flag("--raw-iteration", mf_raw, "undamped iteration from the upper corner");
  mf->add_flag("--spectrum", mf_spectrum, "compute the Jacobian spectrum even when the map has more than 400 coordinates");
  mf->add_option("--tol", mf_tol);
  mf->add_option("--cap", mf_cap, "iteration cap");
  mf->add_option("-o,--output", mf_out, "JSON report");
  mf->add_option("--trajectory", mf_csv, "CSV of the first iterates from the upper corner");
  mf->add_option("--steps", mf_steps, "iterates written with --trajectory");

  // exact
  auto* ex = app.add_subcommand("exact", "exact-chain mixing time against the analytic bound");
  GraphArgs ex_g;
  ModelArgs ex_m;
  double ex_eps = 0.25;
  std::size_t ex_cap = kDefaultStateCap, ex_tcap = 1'000'000;
  std::string ex_out, ex_matrix;
  add_graph_options(ex, ex_g);
  add_model_options(ex, ex_m);
  ex->add_option("--eps", ex_eps);
  ex->add_option("--state-cap", ex_cap);
  ex->add_option("--t-cap", ex_tcap);
  ex->add_option("-o,--output", ex_out, "JSON report");
  ex->add_option("--matrix", ex_matrix, "CSV of the transition matrix");

  // verify
  auto* ver = app.add_subcommand("verify", "property suites");
  std::string ver_suite = "all", ver_out;
  std::optional<std::size_t> ver_n, ver_trials;
  std::uint64_t ver_seed = 1;
  ver->add_option("--suite", ver_suite, "suite name or all");
  ver->add_option("--n-max", ver_n);
  ver->add_option("--trials", ver_trials);
  ver->add_option("--seed", ver_seed);
  ver->add_option("-o,--output", ver_out, "JSON report");

  // sweep
  auto* sw = app.add_subcommand("sweep", "simulate over a grid of beta values");
  GraphArgs sw_g;
  ModelArgs sw_m;
  std::vector<double> sw_betas;
  std::optional<double> sw_lo, sw_hi, sw_step;
  std::size_t sw_t = 10000, sw_reps = 25;
  std::uint64_t sw_seed = 1;
  std::string sw_out, sw_init = "all";
  add_graph_options(sw, sw_g);
  add_model_options(sw, sw_m, false);
  sw->add_option("--betas", sw_betas, "explicit grid")->delimiter(',');
  sw->add_option("--beta-min", sw_lo);
  sw->add_option("--beta-max", sw_hi);
  sw->add_option("--beta-step", sw_step);
  sw->add_option("--t", sw_t);
  sw->add_option("--reps", sw_reps);
  sw->add_option("--seed", sw_seed);
  sw->add_option("--init", sw_init);
  sw->add_option("-o,--output", sw_out, "CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (*gen) {
    const auto g = generate({parse_generator_kind(gen_kind), gen_n, gen_p, gen_r}, gen_seed);
    emit(gen_out, format_edge_list(g));
    const double lambda = g.edge_count() ? spectral_radius(g).lambda_max : 0.0;
    (gen_out.empty() ? std::cerr : std::cout) << "n=" << g.n() << " edges=" << g.edge_count()
                                              << " lambda_max=" << format_double(lambda) << '\n';
    return kOk;
  }

  if (*sim) {
    if (sim_t == 0) throw UsageError("--t must be at least 1");
    if (sim_reps == 0) throw UsageError("--reps must be at least 1");
    const auto g = load_graph(sim_g);
    const auto model = build_model(sim_m, g);
    const auto init = parse_init(sim_init, g.n());
    const auto res = mc_ensemble(model, g, init, sim_t, sim_reps, sim_seed);
    emit(sim_out, ensemble_csv(res));
    if (!sim_traj.empty()) write_file_atomic(sim_traj, trajectory_csv(mc_run(model, g, init, sim_t, sim_seed, 0).rows));
    const auto ex = extinction_summary(res);
    (sim_out.empty() ? std::cerr : std::cout)
        << "variant=" << to_string(model.variant) << " n=" << g.n() << " ratio=" << ratio_text(threshold_ratio(model, g))
        << " extinct=" << ex.extinct << '/' << sim_reps << " median_extinction=" << median_text(ex.median)
        << " final_mean_i=" << format_double(res.rows.back().mean_i) << '\n';
    return kOk;
  }

  if (*mf) {
    const auto g = load_graph(mf_g);
    const auto model = build_model(mf_m, g);
    FixedPointOptions o;
    o.tol = mf_tol;
    o.cap = mf_cap;
    const std::size_t coords = g.n() * static_cast<std::size_t>(model.k() - 1);
    const bool spectrum = mf_spectrum || coords <= 400;
    o.spectrum = spectrum;
    if (mf_raw) {
      o.eta = 1.0;
      o.start = upper_corner(model, g.n());
    }
    const auto rep = find_fixed_point(model, g, o);
    json j{{"variant", to_string(model.variant)},
           {"n", g.n()},
           {"threshold_ratio", std::isfinite(threshold_ratio(model, g)) ? json(threshold_ratio(model, g)) : json("inf")},
           {"classification", to_string(rep.classification, rep.period)},
           {"residual", rep.residual},
           {"iterations", rep.iterations},
           {"point", point_json(rep.point)},
           {"jacobian_spectrum", complex_list(rep.jacobian_spectrum)}};
    if (rep.relation_defect) j["relation_defect"] = *rep.relation_defect;
    if (spectrum && (rep.classification == Classification::endemic || rep.classification == Classification::disease_free)) {
      const auto st = classify_stability(model, g, rep.point);
      j["spectral_radius"] = st.spectral_radius;
      j["locally_stable"] = st.stable;
    }
    emit(mf_out, j.dump(2) + '\n');
    if (!mf_csv.empty()) {
      const auto it = mf_iterate(model, g, upper_corner(model, g.n()), mf_steps);
      std::string csv = "t,mean_p_i,mean_p_r\n";
      for (std::size_t t = 0; t < it.size(); ++t)
        csv += std::to_string(t) + ',' + format_double(it[t].p_i.mean()) + ',' +
               format_double(it[t].p_r.size() ? it[t].p_r.mean() : 0.0) + '\n';
      write_file_atomic(mf_csv, csv);
    }
    if (!mf_out.empty()) std::cout << "classification=" << to_string(rep.classification, rep.period) << '\n';
    return rep.classification == Classification::non_converged ? kNonConverged : kOk;
  }

  if (*ex) {
    const auto g = load_graph(ex_g);
    const auto model = build_model(ex_m, g);
    if (!(ex_eps > 0.0 && ex_eps < 1.0)) throw UsageError("--eps must lie in (0,1)");
    const auto S = build_transition_matrix(model, g, ex_cap);
    const auto pi = stationary(model, g, S);
    const auto rep = mixing_time_exact(S, pi, ex_eps, ex_tcap);
    const double bound = mixing_time_bound(model, g, ex_eps);
    const auto worst = decode_state(rep.worst_initial, S.k, S.n);
    json j{{"variant", to_string(model.variant)},
           {"n", g.n()},
           {"states", S.dim},
           {"epsilon", ex_eps},
           {"t_mix", rep.t_mix},
           {"reached", rep.reached},
           {"final_distance", rep.final_distance},
           {"bound", std::isfinite(bound) ? json(bound) : json("inf")},
           {"within_bound", rep.reached && static_cast<double>(rep.t_mix) <= std::ceil(bound)},
           {"contraction_norm", contraction_norm(model, g)},
           {"threshold_ratio", std::isfinite(threshold_ratio(model, g)) ? json(threshold_ratio(model, g)) : json("inf")},
           {"worst_initial", std::vector<int>(worst.begin(), worst.end())},
           {"worst_initial_always_all_infected", rep.worst_always_all_infected},
           {"stationary_defect", stationary_defect(pi, S)}};
    emit(ex_out, j.dump(2) + '\n');
    if (!ex_matrix.empty()) write_file_atomic(ex_matrix, transition_matrix_csv(S));
    return kOk;
  }

  if (*ver) {
    std::vector<std::string> names;
    if (ver_suite == "all") names = suite_names();
    else if (std::find(suite_names().begin(), suite_names().end(), ver_suite) != suite_names().end()) names = {ver_suite};
    else throw UsageError("unknown suite: " + ver_suite);
    VerifyOptions o{ver_n, ver_trials, ver_seed};
    json report = json::array();
    bool all_pass = true;
    for (const auto& name : names) {
      const auto r = run_suite(name, o);
      all_pass = all_pass && r.pass;
      json j{{"suite", r.name}, {"pass", r.pass}, {"detail", r.detail}};
      if (r.offending) j["offending"] = *r.offending;
      report.push_back(j);
      (ver_out.empty() ? std::cerr : std::cout) << (r.pass ? "PASS " : "FAIL ") << r.name << '\n';
    }
    emit(ver_out, report.dump(2) + '\n');
    return all_pass ? kOk : kVerifyFailed;
  }

  if (*sw) {
    std::vector<double> betas = sw_betas;
    if (sw_lo || sw_hi || sw_step) {
      if (!(sw_lo && sw_hi && sw_step) || !(*sw_step > 0.0)) throw UsageError("--beta-min, --beta-max and a positive --beta-step go together");
      const auto count = static_cast<long>(std::floor((*sw_hi - *sw_lo) / *sw_step + 1e-9)) + 1;
      for (long i = 0; i < count; ++i) betas.push_back(*sw_lo + static_cast<double>(i) * *sw_step);
    }
    if (betas.empty()) throw UsageError("empty beta grid");
    if (sw_t == 0 || sw_reps == 0) throw UsageError("--t and --reps must be at least 1");
    const auto g = load_graph(sw_g);
    const double lambda = spectral_radius(g).lambda_max;
    const auto init = parse_init(sw_init, g.n());
    std::string csv = "beta,ratio,outcome,extinct,reps,median_extinction,fixed_point_norm\n";
    for (std::size_t row = 0; row < betas.size(); ++row) {
      ModelArgs a = sw_m;
      a.beta = betas[row];
      const auto model = build_model(a, g);
      const double ratio = model.variant == Variant::sis_general ? threshold_ratio(model, g) : threshold_ratio(model, lambda);
      const auto res = mc_ensemble(model, g, init, sw_t, sw_reps, sw_seed + 0x9E3779B97F4A7C15ULL * (row + 1));
      const auto ex = extinction_summary(res);
      FixedPointOptions o;
      o.spectrum = false;
      const auto fp = find_fixed_point(model, g, o);
      const double norm = fp.classification == Classification::endemic || fp.classification == Classification::disease_free
                              ? fp.point.p_i.cwiseAbs().maxCoeff()
                              : std::nan("");
      csv += format_double(betas[row]) + ',' + ratio_text(ratio) + ',' +
             (2 * ex.extinct > sw_reps ? "extinction" : "persistence") + ',' + std::to_string(ex.extinct) + ',' +
             std::to_string(sw_reps) + ',' + (std::isnan(ex.median) ? std::string("") : format_double(ex.median)) + ',' +
             (std::isnan(norm) ? std::string("") : format_double(norm)) + '\n';
    }
    emit(sw_out, csv);
    return kOk;
  }
  return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNonConverged;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
}
