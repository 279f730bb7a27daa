#include <doctest.h>

#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "epinet/graph.hpp"
#include "epinet/io.hpp"

using namespace epinet;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(EPINET_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), p)) r.out += buf.data();
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("epinet_cli_" + std::to_string(::getpid()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("gen") {
  TempDir d;
  auto r = cli("gen --kind star --n 3 -o " + d / "s.edges");
  CHECK(r.code == 0);
  CHECK(r.out.find("edges=2") != std::string::npos);
  CHECK(r.out.find("lambda_max=1.414") != std::string::npos);
  const auto g = read_edge_list_file(d / "s.edges");
  CHECK(g.n() == 3);
  CHECK(g.edge_count() == 2);

  r = cli("gen --kind er --n 200 --p 0.05 --seed 7 -o " + d / "a.edges");
  CHECK(r.code == 0);
  r = cli("gen --kind er --n 200 --p 0.05 --seed 7 -o " + d / "b.edges");
  CHECK(read_file(d / "a.edges") == read_file(d / "b.edges"));

  CHECK(cli("gen --kind star").code == 2);
  CHECK(cli("gen --kind banana --n 3").code == 2);
  CHECK(cli("gen --kind star --n 3 -o " + d / "missing/dir/s.edges").code == 1);
  CHECK(cli("").code == 2);
}

TEST_CASE("simulate") {
  TempDir d;
  auto r = cli("simulate --kind complete --n 10 --variant sis-nia --beta 0.01 --delta 0.9 --t 200 --reps 8 --seed 3 -o " +
               d / "e.csv" + " --trajectory " + d / "t.csv");
  CHECK(r.code == 0);
  CHECK(r.out.find("ratio=0.") != std::string::npos);
  CHECK(r.out.find("extinct=8/8") != std::string::npos);
  CHECK(read_file(d / "e.csv").rfind("t,mean_s,mean_i,mean_r,q05_i,q50_i,q95_i\n", 0) == 0);
  const auto rows = parse_trajectory_csv(read_file(d / "t.csv"));
  REQUIRE(rows.size() == 201);
  for (const auto& row : rows) CHECK(row.s + row.i + row.r == 10);

  cli("simulate --kind complete --n 10 --variant sirs --beta 0.3 --delta 0.2 --gamma 0.5 --t 50 --reps 3 --seed 3 -o " + d / "x.csv");
  cli("simulate --kind complete --n 10 --variant sirs --beta 0.3 --delta 0.2 --gamma 0.5 --t 50 --reps 3 --seed 3 -o " + d / "y.csv");
  CHECK(read_file(d / "x.csv") == read_file(d / "y.csv"));

  CHECK(cli("simulate --kind complete --n 10 --beta 0.1 --delta 0.9 --t 0").code == 2);
  CHECK(cli("simulate --kind complete --n 10 --variant sirs --beta 0.1 --delta 0.9 --t 5").code == 2);
  CHECK(cli("simulate --kind complete --n 10 --beta 1.5 --delta 0.9 --t 5").code == 2);
  CHECK(cli("simulate --beta 0.1 --delta 0.9 --t 5").code == 2);
  CHECK(cli("simulate --graph " + d / "none.edges" + " --beta 0.1 --delta 0.9 --t 5").code == 1);
}

TEST_CASE("meanfield") {
  TempDir d;
  write_file_atomic(d / "star.edges", "0 1\n0 2\n");
  auto r = cli("meanfield --graph " + d / "star.edges" + " --variant sis-ia --beta 0.9 --delta 0.9 --raw-iteration -o " + d / "r.json");
  CHECK(r.code == 0);
  auto j = nlohmann::json::parse(read_file(d / "r.json"));
  CHECK(j["classification"] == "cycle(2)");

  write_file_atomic(d / "k2.edges", "0 1\n");
  r = cli("meanfield --graph " + d / "k2.edges" + " --variant sis-nia --beta 0.8 --delta 0.4 -o " + d / "k2.json");
  CHECK(r.code == 0);
  j = nlohmann::json::parse(read_file(d / "k2.json"));
  CHECK(j["classification"] == "endemic");
  CHECK(j["point"]["p_i"][0].get<double>() == doctest::Approx(5.0 / 6.0).epsilon(1e-10));
  CHECK(j["locally_stable"] == true);

  r = cli("meanfield --graph " + d / "k2.edges" + " --variant sis-nia --beta 0.1 --delta 0.4");
  CHECK(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["classification"] == "disease-free");

  r = cli("meanfield --graph " + d / "k2.edges" + " --variant sirs --beta 0.8 --delta 0.4 --gamma 0.3");
  j = nlohmann::json::parse(r.out);
  CHECK(j["relation_defect"].get<double>() <= 1e-8);

  write_file_atomic(d / "m.txt", "0.5 0.6\n0.6 0.5\n");
  r = cli("meanfield --graph " + d / "k2.edges" + " --variant sis-general --contact " + d / "m.txt");
  CHECK(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["classification"] == "endemic");

  CHECK(cli("meanfield --kind path --n 30 --variant sis-nia --beta 0.3 --delta 0.2 --cap 3").code == 3);
}

TEST_CASE("exact") {
  TempDir d;
  auto r = cli("exact --kind path --n 3 --variant sis-nia --beta 0.1 --delta 0.9 --eps 0.25 -o " + d / "x.json");
  CHECK(r.code == 0);
  auto j = nlohmann::json::parse(read_file(d / "x.json"));
  CHECK(j["within_bound"] == true);
  CHECK(j["t_mix"].get<double>() <= std::ceil(j["bound"].get<double>()));

  r = cli("exact --kind path --n 2 --variant siv-id --beta 0.3 --delta 0.6 --gamma 0.5 --theta 0.5");
  CHECK(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["stationary_defect"].get<double>() <= 1e-10);

  r = cli("exact --kind path --n 30 --variant sis-nia --beta 0.1 --delta 0.9");
  CHECK(r.code == 2);
  CHECK(r.out.find("cap of 8192") != std::string::npos);
}

TEST_CASE("verify") {
  TempDir d;
  auto r = cli("verify --suite ordering --n-max 5 --trials 50 -o " + d / "v.json");
  CHECK(r.code == 0);
  auto j = nlohmann::json::parse(read_file(d / "v.json"));
  CHECK(j[0]["pass"] == true);
  r = cli("verify --suite lp --n-max 4 -o " + d / "lp.json");
  CHECK(r.code == 0);
  CHECK(nlohmann::json::parse(read_file(d / "lp.json"))[0]["detail"]["family_attained"].get<int>() > 0);
  CHECK(cli("verify --suite none").code == 2);
}

TEST_CASE("sweep") {
  TempDir d;
  auto r = cli("sweep --kind complete --n 20 --variant sis-nia --delta 0.9 --betas 0.03 --t 300 --reps 5 --seed 2");
  CHECK(r.code == 0);
  std::size_t lines = 0;
  for (char c : r.out) lines += c == '\n';
  CHECK(lines == 2);
  CHECK(r.out.rfind("beta,ratio,outcome,extinct,reps,median_extinction,fixed_point_norm\n", 0) == 0);

  const std::string grid = "sweep --kind complete --n 20 --variant sis-nia --delta 0.9 --beta-min 0.01 --beta-max 0.2 --beta-step 0.095 --t 300 --reps 5 --seed 2 -o ";
  CHECK(cli(grid + d / "a.csv").code == 0);
  CHECK(cli(grid + d / "b.csv").code == 0);
  const auto a = read_file(d / "a.csv");
  CHECK(a == read_file(d / "b.csv"));
  CHECK(a.find("extinction") != std::string::npos);
  CHECK(a.find("persistence") != std::string::npos);

  CHECK(cli("sweep --kind complete --n 20 --variant sis-nia --delta 0.9 --t 10").code == 2);
}
