#include "epinet/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "epinet/error.hpp"

namespace epinet {

Graph::Graph(std::size_t n, std::vector<Edge> edges) : n_(n) {
  for (auto& e : edges) {
    if (e.u == e.v) throw std::invalid_argument("self-loop at node " + std::to_string(e.u));
    if (e.u >= n || e.v >= n) throw std::invalid_argument("edge index out of range");
    if (!(e.weight >= 0.0 && e.weight <= 1.0))
      throw std::invalid_argument("edge weight outside [0,1]");
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  // stable so that the first occurrence of a duplicate wins
  std::stable_sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](const Edge& a, const Edge& b) { return a.u == b.u && a.v == b.v; }),
              edges.end());
  edges_ = std::move(edges);

  std::vector<std::size_t> deg(n_, 0);
  for (const auto& e : edges_) {
    ++deg[e.u];
    ++deg[e.v];
    if (e.weight != 1.0) weighted_ = true;
  }
  offsets_.assign(n_ + 1, 0);
  for (std::size_t i = 0; i < n_; ++i) offsets_[i + 1] = offsets_[i] + deg[i];
  adj_.resize(offsets_[n_]);
  wts_.resize(offsets_[n_]);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const auto& e : edges_) {
    adj_[fill[e.u]] = e.v;
    wts_[fill[e.u]++] = e.weight;
    adj_[fill[e.v]] = e.u;
    wts_[fill[e.v]++] = e.weight;
  }
  for (std::size_t i = 0; i < n_; ++i) {
    const auto b = offsets_[i], e = offsets_[i + 1];
    std::vector<std::pair<std::uint32_t, double>> row;
    row.reserve(e - b);
    for (auto k = b; k < e; ++k) row.emplace_back(adj_[k], wts_[k]);
    std::sort(row.begin(), row.end());
    for (auto k = b; k < e; ++k) {
      adj_[k] = row[k - b].first;
      wts_[k] = row[k - b].second;
    }
  }
}

double Graph::weight(std::size_t i, std::size_t j) const noexcept {
  const auto nb = neighbors(i);
  const auto it = std::lower_bound(nb.begin(), nb.end(), static_cast<std::uint32_t>(j));
  if (it == nb.end() || *it != j) return 0.0;
  return wts_[offsets_[i] + static_cast<std::size_t>(it - nb.begin())];
}

bool Graph::connected() const {
  if (n_ <= 1) return true;
  std::vector<char> seen(n_, 0);
  std::vector<std::uint32_t> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const auto u = stack.back();
    stack.pop_back();
    for (auto v : neighbors(u)) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == n_;
}

void Graph::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (auto k = offsets_[i]; k < offsets_[i + 1]; ++k) acc += wts_[k] * x[adj_[k]];
    y[i] = acc;
  }
}

Graph Graph::relabeled(std::span<const std::uint32_t> perm) const {
  std::vector<Edge> out;
  out.reserve(edges_.size());
  for (const auto& e : edges_) out.push_back({perm[e.u], perm[e.v], e.weight});
  return Graph(n_, std::move(out));
}

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    if (i >= s.size()) break;
    auto j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_index(std::string_view tok, std::uint64_t& out) {
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

bool parse_real(std::string_view tok, double& out) {
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

}  // namespace

Graph parse_edge_list(std::string_view text) {
  std::vector<Edge> edges;
  std::uint64_t max_index = 0;
  bool any_edge = false;
  bool have_header = false;
  std::uint64_t header_n = 0;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (nl == text.size()) break;
      continue;
    }
    if (line.starts_with("n=")) {
      if (have_header) throw ParseError(line_no, "duplicate n= header");
      if (!parse_index(trim(line.substr(2)), header_n))
        throw ParseError(line_no, "malformed n= header");
      have_header = true;
      continue;
    }
    const auto tok = split_ws(line);
    if (tok.size() != 2 && tok.size() != 3)
      throw ParseError(line_no, "expected \"u v\" or \"u v w\"");
    std::uint64_t u = 0, v = 0;
    if (!parse_index(tok[0], u) || !parse_index(tok[1], v))
      throw ParseError(line_no, "node indices must be non-negative integers");
    if (u > 0xFFFFFFF0ULL || v > 0xFFFFFFF0ULL) throw ParseError(line_no, "node index too large");
    if (u == v) throw ParseError(line_no, "self-loop at node " + std::to_string(u));
    double w = 1.0;
    if (tok.size() == 3) {
      if (!parse_real(tok[2], w)) throw ParseError(line_no, "malformed weight");
      if (w < 0.0 || w > 1.0) throw ParseError(line_no, "weight outside [0,1]");
    }
    max_index = std::max({max_index, u, v});
    any_edge = true;
    edges.push_back({static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v), w});
    if (nl == text.size()) break;
  }

  std::size_t n = any_edge ? static_cast<std::size_t>(max_index) + 1 : 0;
  if (have_header) {
    if (any_edge && header_n < n)
      throw ParseError(line_no, "n=" + std::to_string(header_n) + " is smaller than max index + 1");
    n = static_cast<std::size_t>(header_n);
  }
  return Graph(n, std::move(edges));
}

std::string format_edge_list(const Graph& g) {
  std::ostringstream os;
  os << "n=" << g.n() << '\n';
  char buf[64];
  for (const auto& e : g.edges()) {
    os << e.u << ' ' << e.v;
    if (g.weighted()) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, e.weight);
      os << ' ' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    os << '\n';
  }
  return os.str();
}

Graph read_edge_list_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_edge_list(ss.str());
}

GeneratorKind parse_generator_kind(std::string_view name) {
  if (name == "er") return GeneratorKind::er;
  if (name == "geometric") return GeneratorKind::geometric;
  if (name == "complete") return GeneratorKind::complete;
  if (name == "star") return GeneratorKind::star;
  if (name == "path") return GeneratorKind::path;
  throw std::invalid_argument("unknown generator kind: " + std::string(name));
}

std::string_view to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::er: return "er";
    case GeneratorKind::geometric: return "geometric";
    case GeneratorKind::complete: return "complete";
    case GeneratorKind::star: return "star";
    case GeneratorKind::path: return "path";
  }
  return "?";
}

namespace {

// mt19937_64 output is fully specified by the standard; the distribution
// classes are not, so uniforms are built by hand.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

Graph generate(const GeneratorSpec& spec, std::uint64_t seed) {
  const auto n = spec.n;
  if (n == 0) throw std::invalid_argument("generator requires n >= 1");
  if (n > 0xFFFFFFF0ULL) throw std::invalid_argument("n too large");
  std::vector<Edge> edges;
  std::mt19937_64 rng(seed);
  const auto idx = [](std::size_t i) { return static_cast<std::uint32_t>(i); };

  switch (spec.kind) {
    case GeneratorKind::er: {
      if (!(spec.p >= 0.0 && spec.p <= 1.0)) throw std::invalid_argument("er: p must lie in [0,1]");
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (unit_uniform(rng) < spec.p) edges.push_back({idx(i), idx(j), 1.0});
      break;
    }
    case GeneratorKind::geometric: {
      if (!(spec.r > 0.0) || !std::isfinite(spec.r))
        throw std::invalid_argument("geometric: r must be positive");
      std::vector<double> xs(n), ys(n);
      for (std::size_t i = 0; i < n; ++i) {
        xs[i] = unit_uniform(rng);
        ys[i] = unit_uniform(rng);
      }
      const double r2 = spec.r * spec.r;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
          const double dx = xs[i] - xs[j], dy = ys[i] - ys[j];
          if (dx * dx + dy * dy < r2) edges.push_back({idx(i), idx(j), 1.0});
        }
      break;
    }
    case GeneratorKind::complete:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) edges.push_back({idx(i), idx(j), 1.0});
      break;
    case GeneratorKind::star:
      for (std::size_t j = 1; j < n; ++j) edges.push_back({0, idx(j), 1.0});
      break;
    case GeneratorKind::path:
      for (std::size_t j = 1; j < n; ++j) edges.push_back({idx(j - 1), idx(j), 1.0});
      break;
  }
  return Graph(n, std::move(edges));
}

DegreeStats degree_stats(const Graph& g) {
  DegreeStats s;
  if (g.n() == 0) return s;
  s.min = g.degree(0);
  std::size_t total = 0;
  for (std::size_t i = 0; i < g.n(); ++i) {
    s.min = std::min(s.min, g.degree(i));
    s.max = std::max(s.max, g.degree(i));
    total += g.degree(i);
  }
  s.mean = static_cast<double>(total) / static_cast<double>(g.n());
  return s;
}

}  // namespace epinet
