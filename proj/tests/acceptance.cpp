// Acceptance runner: `acceptance` runs every criterion, `acceptance AC3` runs one.
// Prints one PASS/FAIL line per criterion; the exit code is nonzero if any fails.

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "epinet/chain.hpp"
#include "epinet/meanfield.hpp"
#include "epinet/montecarlo.hpp"
#include "epinet/spectral.hpp"
#include "epinet/verify.hpp"

using namespace epinet;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string summary;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

Outcome from_suites(std::initializer_list<std::pair<const char*, VerifyOptions>> suites,
                    const std::function<std::string(const SuiteResult&)>& describe) {
  Outcome out{true, ""};
  for (const auto& [name, opts] : suites) {
    const auto r = run_suite(name, opts);
    out.pass = out.pass && r.pass;
    if (!out.summary.empty()) out.summary += "; ";
    out.summary += std::string(name) + (r.pass ? " ok" : " FAILED") + " (" + describe(r) + ")";
    if (r.offending) out.summary += " offending=" + r.offending->dump();
  }
  return out;
}

VerifyOptions opts(std::size_t n_max, std::size_t trials, std::uint64_t seed = 2026) {
  return {n_max, trials, seed};
}

Outcome ac1() {
  const auto g = parse_edge_list("0 1\n0 2\n");
  const auto model = sis_ia(0.9, 0.9);
  const auto fp = find_fixed_point(model, g);
  const Eigen::Vector3d expect(0.286, 0.222, 0.222);
  const double point_err = (fp.point.p_i - expect).cwiseAbs().maxCoeff();

  Eigen::Matrix3d printed;
  printed << -0.260, 0.514, 0.514, 0.700, -0.157, 0.0, 0.700, 0.0, -0.157;
  const double jac_err = (mf_jacobian(model, g, fp.point) - printed).cwiseAbs().maxCoeff();

  const auto st = classify_stability(model, g, fp.point);
  const double dom = st.dominant.real();

  FixedPointOptions raw;
  raw.eta = 1.0;
  raw.start = upper_corner(model, 3);
  const auto cyc = find_fixed_point(model, g, raw);
  const auto cls = to_string(cyc.classification, cyc.period);

  const bool pass = fp.classification == Classification::endemic && point_err <= 1e-3 && jac_err <= 1e-3 &&
                    std::abs(dom + 1.059) <= 0.01 && std::abs(st.dominant.imag()) < 1e-12 && cls == "cycle(2)";
  return {pass, "x*=(" + fmt(fp.point.p_i[0], 6) + ", " + fmt(fp.point.p_i[1], 6) + ", " + fmt(fp.point.p_i[2], 6) +
                    ") err=" + fmt(point_err, 2) + " jacobian_err=" + fmt(jac_err, 2) + " dominant=" + fmt(dom, 6) +
                    " raw=" + cls};
}

Outcome ac2() {
  return from_suites({{"threshold", opts(12, 20)}}, [](const SuiteResult& r) {
    const auto& d = r.detail;
    return "below=" + d["below"].dump() + " above=" + d["above"].dump() +
           " max_multistart_spread=" + fmt(d["max_multistart_spread"].get<double>(), 3) +
           " min_endemic_entry=" + fmt(d["min_endemic_entry"].get<double>(), 3);
  });
}

Outcome ac3() {
  return from_suites({{"mixing", opts(12, 30)}, {"extinction-scaling", opts(64, 200)}}, [](const SuiteResult& r) {
    const auto& d = r.detail;
    if (r.name == "mixing") {
      std::string s;
      for (const auto& [v, row] : d["variants"].items()) {
        if (!s.empty()) s += ", ";
        s += v + ": " + row["violations"].dump() + "/" + row["tested"].dump() + " over bound, " +
             row["finite_bounds"].dump() + " finite";
      }
      return s;
    }
    std::string s = "medians";
    for (const auto& row : d["rows"]) s += " n" + row["n"].dump() + "=" + row["median"].dump();
    return s + " slope=" + fmt(d["slope_vs_log_n"].get<double>(), 3) + " growth=" + fmt(d["median_growth"].get<double>(), 3);
  });
}

Outcome ac4() {
  return from_suites({{"ordering", opts(5, 50)}, {"ubound", opts(6, 100)}}, [](const SuiteResult& r) {
    const auto& d = r.detail;
    if (r.name == "ordering")
      return "R R^-1 exact=" + d["r_inverse_exact"].dump() + " min_entry=" + fmt(d["min_entry"].get<double>(), 3) +
             " pairs=" + d["ordered_pairs"].dump() + " min_pair_slack=" + fmt(d["min_pair_slack"].get<double>(), 3);
    return "trials=" + d["trials"].dump() + " min_slack=" + fmt(d["min_slack"].get<double>(), 3);
  });
}

Outcome ac5() {
  return from_suites({{"lp", opts(4, 40)}}, [](const SuiteResult& r) {
    const auto& d = r.detail;
    return "min_bound_slack=" + fmt(d["min_bound_slack"].get<double>(), 3) + " attained=" + d["family_attained"].dump() +
           "/" + d["family_nodes"].dump() + " max_family_gap=" + fmt(d["max_family_gap"].get<double>(), 3);
  });
}

Outcome ac6() {
  return from_suites({{"nonabsorption", opts(6, 100)}}, [](const SuiteResult& r) {
    return "min_slack=" + fmt(r.detail["min_slack"].get<double>(), 3);
  });
}

Outcome ac7() {
  const auto g = generate({GeneratorKind::er, 2000, 0.0076}, 7);
  const double lambda = spectral_radius(g).lambda_max;
  struct Case {
    const char* name;
    ModelSpec model;
    double ref_beta, ref_lambda;
    bool above;
  };
  const double sis_l = 16.159, siv_l = 16.232;
  auto scaled = [&](double b, double l) { return b * l / lambda; };
  const std::vector<Case> cases{
      {"sis below", sis_nia(scaled(0.055, sis_l), 0.9), 0.055, sis_l, false},
      {"sis above", sis_nia(scaled(0.056, sis_l), 0.9), 0.056, sis_l, true},
      {"sirs below", sirs(scaled(0.055, sis_l), 0.9, 0.5), 0.055, sis_l, false},
      {"sirs above", sirs(scaled(0.07, sis_l), 0.9, 0.5), 0.07, sis_l, true},
      {"siv-id below", siv_id(scaled(0.11, siv_l), 0.9, 0.5, 0.5), 0.11, siv_l, false},
      {"siv-id above", siv_id(scaled(0.13, siv_l), 0.9, 0.5, 0.5), 0.13, siv_l, true},
      {"siv-vd below", siv_vd(scaled(0.22, siv_l), 0.9, 0.5, 0.5), 0.22, siv_l, false},
      {"siv-vd above", siv_vd(scaled(0.29, siv_l), 0.9, 0.5, 0.5), 0.29, siv_l, true},
  };
  const std::size_t reps = 25, steps = 10000, need = 20;
  Outcome out{true, "lambda_max=" + fmt(lambda, 6)};
  std::uint64_t seed = 500;
  for (const auto& c : cases) {
    const auto res = mc_ensemble(c.model, g, InitSpec::with_fraction(0.1), steps, reps, ++seed);
    const auto all = mc_ensemble(c.model, g, InitSpec::all_infected(), steps, reps, seed + 1000);
    const std::size_t extinct = res.extinct_count();
    const std::size_t agree = c.above ? reps - extinct : extinct;
    const bool ok = agree >= need;
    out.pass = out.pass && ok;
    out.summary += "; " + std::string(c.name) + " ratio=" + fmt(threshold_ratio(c.model, lambda), 5) + " " +
                   (c.above ? "persisted " : "extinct ") + std::to_string(agree) + "/25" + (ok ? "" : " FAIL") +
                   " [all-infected start: " + std::to_string(c.above ? reps - all.extinct_count() : all.extinct_count()) + "/25]";
  }
  return out;
}

Outcome ac8() {
  return from_suites({{"siv-stationary", opts(4, 20)}}, [](const SuiteResult& r) {
    std::string s = "max_defect=" + fmt(r.detail["max_defect"].get<double>(), 3);
    for (const auto& m : r.detail["monte_carlo"])
      s += " " + m["variant"].get<std::string>() + " s_fraction=" + fmt(m["s_fraction"].get<double>()) +
           " target=" + fmt(m["target"].get<double>()) + " sigma=" + fmt(m["sigma"].get<double>(), 2);
    return s;
  });
}

Outcome ac9() {
  return from_suites({{"oracle", opts(6, 100000)}}, [](const SuiteResult& r) {
    return "comparisons=" + r.detail["comparisons"].dump() + " max|z|=" + fmt(r.detail["max_abs_z"].get<double>(), 3);
  });
}

Outcome ac10() {
  return from_suites({{"jacobian", opts(8, 100)}}, [](const SuiteResult& r) {
    std::string s;
    for (const auto& [v, e] : r.detail["max_error_by_variant"].items()) s += (s.empty() ? "" : " ") + v + "=" + fmt(e.get<double>(), 2);
    return s;
  });
}

Outcome ac11() {
  return from_suites({{"fixed-point-relations", opts(30, 30)}}, [](const SuiteResult& r) {
    std::string s;
    for (const auto& [v, row] : r.detail["variants"].items())
      s += (s.empty() ? "" : " ") + v + ": endemic=" + row["endemic"].dump() + " max_defect=" + fmt(row["max_relation_defect"].get<double>(), 2);
    return s;
  });
}

Outcome random_graph_stability() {
  return from_suites({{"stability", opts(800, 40)}}, [](const SuiteResult& r) {
    std::string s;
    for (const auto& row : r.detail["rows"])
      s += (s.empty() ? "" : " ") + std::string("n=") + row["n"].dump() + " stable=" + row["stable"].dump() + "/" +
           row["instances"].dump();
    return s + " non_decreasing=" + r.detail["rate_non_decreasing"].dump();
  });
}

struct Criterion {
  const char* id;
  const char* title;
  Outcome (*run)();
};

const Criterion kCriteria[] = {
    {"AC1", "3-node star fixed point, Jacobian and period-2 cycle", ac1},
    {"AC2", "threshold dichotomy on random graphs", ac2},
    {"AC3", "exact mixing time within the analytic bound; extinction-time scaling", ac3},
    {"AC4", "ordering machinery", ac4},
    {"AC5", "LP marginal bound", ac5},
    {"AC6", "non-absorption bound", ac6},
    {"AC7", "n=2000 below/above threshold simulations", ac7},
    {"AC8", "SIV stationarity", ac8},
    {"AC9", "Monte Carlo against exact one-step marginals", ac9},
    {"AC10", "analytic against finite-difference Jacobians", ac10},
    {"AC11", "fixed-point relations", ac11},
    {"RG", "endemic point stability on random graphs", random_graph_stability},
};

}  // namespace

int main(int argc, char** argv) {
  const std::string only = argc > 1 ? argv[1] : "";
  bool all_pass = true, found = false;
  for (const auto& c : kCriteria) {
    if (!only.empty() && only != c.id) continue;
    found = true;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s %s (%.1fs): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title, secs, o.summary.c_str());
    std::fflush(stdout);
    all_pass = all_pass && o.pass;
  }
  if (!found) {
    std::fprintf(stderr, "unknown criterion: %s\n", only.c_str());
    return 2;
  }
  return all_pass ? 0 : 1;
}
