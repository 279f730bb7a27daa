#include <doctest.h>

#include <filesystem>

#include "epinet/error.hpp"
#include "epinet/io.hpp"

using namespace epinet;

TEST_CASE("atomic writes") {
  const auto dir = std::filesystem::temp_directory_path() / "epinet_io_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "out.txt").string();
  write_file_atomic(path, "first");
  write_file_atomic(path, "second\n");
  CHECK(read_file(path) == "second\n");
  std::size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) files += e.is_regular_file();
  CHECK(files == 1);
  CHECK_THROWS_AS(write_file_atomic((dir / "missing" / "x").string(), "x"), std::ios_base::failure);
  CHECK_THROWS_AS(read_file((dir / "nope").string()), std::ios_base::failure);
  std::filesystem::remove_all(dir);
}

TEST_CASE("trajectory csv round trip") {
  const std::vector<Counts> rows{{3, 2, 0}, {4, 1, 0}, {5, 0, 0}};
  const auto text = trajectory_csv(rows);
  CHECK(text.rfind("t,s,i,r\n0,3,2,0\n", 0) == 0);
  const auto back = parse_trajectory_csv(text);
  REQUIRE(back.size() == 3);
  CHECK(back[1].s == 4);
  CHECK(back[1].i == 1);
  CHECK_THROWS_AS(parse_trajectory_csv("t,s,i\n"), ParseError);
  CHECK_THROWS_AS(parse_trajectory_csv("t,s,i,r\n1,1,1,1\n"), ParseError);
  CHECK_THROWS_AS(parse_trajectory_csv("t,s,i,r\n0,1,x,1\n"), ParseError);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678, 0.0})
    CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("matrix parsing") {
  const auto m = parse_matrix("# contact\n0.1, 0.2\n0.3 0.4\n");
  CHECK(m.rows() == 2);
  CHECK(m(1, 0) == 0.3);
  CHECK_THROWS_AS(parse_matrix("0.1 0.2\n0.3\n"), ParseError);
  CHECK_THROWS_AS(parse_matrix("0.1 z\n0.3 0.1\n"), ParseError);
}

TEST_CASE("transition matrix and ensemble csv") {
  const auto S = build_transition_matrix(sis_nia(0.5, 0.5), parse_edge_list("n=1"));
  CHECK(transition_matrix_csv(S) == "k,n\n2,1\n1,0\n0.5,0.5\n");
  EnsembleResult res;
  res.rows.push_back({1.0, 2.0, 0.0, 1.0, 2.0, 3.0});
  CHECK(ensemble_csv(res) == "t,mean_s,mean_i,mean_r,q05_i,q50_i,q95_i\n0,1,2,0,1,2,3\n");
}
