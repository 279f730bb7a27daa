#include "epinet/io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "epinet/error.hpp"

namespace epinet {

void write_file_atomic(const std::string& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  std::random_device rd;
  tmp += ".tmp" + std::to_string(rd());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::ios_base::failure("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::ios_base::failure("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::ios_base::failure("cannot rename onto " + path);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string trajectory_csv(const std::vector<Counts>& rows) {
  std::string out = "t,s,i,r\n";
  for (std::size_t t = 0; t < rows.size(); ++t) {
    out += std::to_string(t) + ',' + std::to_string(rows[t].s) + ',' + std::to_string(rows[t].i) +
           ',' + std::to_string(rows[t].r) + '\n';
  }
  return out;
}

std::vector<Counts> parse_trajectory_csv(std::string_view text) {
  std::vector<Counts> rows;
  std::size_t pos = 0, line = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto row = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line;
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    if (line == 1) {
      if (row != "t,s,i,r") throw ParseError(line, "expected header t,s,i,r");
      continue;
    }
    if (row.empty()) continue;
    std::uint64_t v[4];
    const char* p = row.data();
    const char* end = row.data() + row.size();
    for (int k = 0; k < 4; ++k) {
      auto [q, ec] = std::from_chars(p, end, v[k]);
      if (ec != std::errc{}) throw ParseError(line, "malformed trajectory row");
      p = q;
      if (k < 3) {
        if (p == end || *p != ',') throw ParseError(line, "malformed trajectory row");
        ++p;
      }
    }
    if (p != end) throw ParseError(line, "trailing characters");
    if (v[0] != rows.size()) throw ParseError(line, "rows must be consecutive from t = 0");
    rows.push_back({static_cast<std::uint32_t>(v[1]), static_cast<std::uint32_t>(v[2]),
                    static_cast<std::uint32_t>(v[3])});
  }
  return rows;
}

std::string ensemble_csv(const EnsembleResult& res) {
  std::string out = "t,mean_s,mean_i,mean_r,q05_i,q50_i,q95_i\n";
  for (std::size_t t = 0; t < res.rows.size(); ++t) {
    const auto& r = res.rows[t];
    out += std::to_string(t) + ',' + format_double(r.mean_s) + ',' + format_double(r.mean_i) + ',' +
           format_double(r.mean_r) + ',' + format_double(r.q05_i) + ',' + format_double(r.q50_i) +
           ',' + format_double(r.q95_i) + '\n';
  }
  return out;
}

std::string transition_matrix_csv(const TransitionMatrix& S) {
  std::string out = "k,n\n" + std::to_string(S.k) + ',' + std::to_string(S.n) + '\n';
  for (std::size_t r = 0; r < S.dim; ++r) {
    for (std::size_t c = 0; c < S.dim; ++c) {
      if (c) out += ',';
      out += format_double(S.at(r, c));
    }
    out += '\n';
  }
  return out;
}

Eigen::MatrixXd parse_matrix(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::size_t pos = 0, line = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string row(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line;
    if (auto h = row.find('#'); h != std::string::npos) row.resize(h);
    for (auto& ch : row)
      if (ch == ',' || ch == '\t' || ch == '\r') ch = ' ';
    std::vector<double> vals;
    std::size_t i = 0;
    while (i < row.size()) {
      while (i < row.size() && row[i] == ' ') ++i;
      if (i >= row.size()) break;
      auto j = row.find(' ', i);
      if (j == std::string::npos) j = row.size();
      double v = 0.0;
      auto [p, ec] = std::from_chars(row.data() + i, row.data() + j, v);
      if (ec != std::errc{} || p != row.data() + j) throw ParseError(line, "malformed matrix entry");
      vals.push_back(v);
      i = j;
    }
    if (!vals.empty()) rows.push_back(std::move(vals));
    if (nl == text.size()) break;
  }
  const auto n = rows.size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    if (rows[r].size() != n) throw ParseError(r + 1, "matrix must be square");
    for (std::size_t c = 0; c < n; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  return m;
}

}  // namespace epinet
