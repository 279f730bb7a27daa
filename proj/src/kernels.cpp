#include "epinet/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace epinet::kernels {

namespace detail {
const Table* avx2_table() noexcept;
}

namespace {
constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;
}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                        std::array<std::uint32_t, 2> k) noexcept {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
    c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
         static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
    k[0] += kW0;
    k[1] += kW1;
  }
  return c;
}

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double l1_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::abs(a[i] - b[i]);
  return acc;
}

void philox_scalar(const PhiloxStream& s, std::uint32_t first, double* out, std::size_t n) {
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(s.seed),
                                         static_cast<std::uint32_t>(s.seed >> 32)};
  for (std::size_t j = 0; j < n; ++j) {
    const auto r = philox4x32({first + static_cast<std::uint32_t>(j), s.step, s.w2, s.w3}, key);
    out[j] = uniform_from_words(r[0], r[1]);
  }
}

constexpr Table kScalar{Isa::scalar, dot_scalar, axpy_scalar, sum_scalar, l1_scalar, philox_scalar};

}  // namespace

const Table& scalar_table() noexcept { return kScalar; }

bool avx2_available() noexcept {
  if (detail::avx2_table() == nullptr) return false;
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table& table(Isa isa) {
  if (isa == Isa::scalar) return kScalar;
  if (!avx2_available()) throw std::runtime_error("avx2 kernels are not available on this machine");
  return *detail::avx2_table();
}

const Table& active() {
  static const Table& chosen = [] () -> const Table& {
    const char* env = std::getenv("EPINET_SIMD");
    const std::string want = env ? env : "auto";
    if (want == "scalar") return kScalar;
    if (want == "avx2") return table(Isa::avx2);
    return avx2_available() ? *detail::avx2_table() : kScalar;
  }();
  return chosen;
}

std::string_view to_string(Isa isa) noexcept { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void vec_mat(const Table& k, const double* x, const double* S, double* y, std::size_t dim) {
  for (std::size_t c = 0; c < dim; ++c) y[c] = 0.0;
  for (std::size_t r = 0; r < dim; ++r)
    if (x[r] != 0.0) k.axpy(x[r], S + r * dim, y, dim);
}

void mat_vec(const Table& k, const double* S, const double* x, double* y, std::size_t dim) {
  for (std::size_t r = 0; r < dim; ++r) y[r] = k.dot(S + r * dim, x, dim);
}

}  // namespace epinet::kernels
