#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace epinet::kernels {

enum class Isa { scalar, avx2 };

/// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Counter layout shared by every uniform draw: (first + j, step, w2, w3).
struct PhiloxStream {
  std::uint64_t seed;
  std::uint32_t step;
  std::uint32_t w2;
  std::uint32_t w3;
};

struct Table {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  double (*l1_distance)(const double* a, const double* b, std::size_t n);
  // out[j] = uniform in [0,1) from the block at counter first + j
  void (*philox_uniforms)(const PhiloxStream& s, std::uint32_t first, double* out, std::size_t n);
};

const Table& scalar_table() noexcept;
bool avx2_available() noexcept;
/// Throws std::runtime_error when the CPU or build lacks the requested ISA.
const Table& table(Isa isa);

/// Chosen once from EPINET_SIMD (scalar | avx2 | auto, default auto).
const Table& active();

std::string_view to_string(Isa isa) noexcept;

/// y = x * S for a dense row-major dim x dim matrix. Zero entries of x are skipped.
void vec_mat(const Table& k, const double* x, const double* S, double* y, std::size_t dim);
/// y = S * x.
void mat_vec(const Table& k, const double* S, const double* x, double* y, std::size_t dim);

inline double uniform_from_words(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t w = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return static_cast<double>(w >> 11) * 0x1.0p-53;
}

}  // namespace epinet::kernels
