#include "epinet/kernels.hpp"

#if defined(EPINET_HAVE_AVX2)
#include <immintrin.h>

namespace epinet::kernels {

namespace {

double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(a, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double l1_avx2(const double* a, const double* b, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign, _mm256_sub_pd(_mm256_loadu_pd(a + i),
                                                                  _mm256_loadu_pd(b + i))));
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] > b[i] ? a[i] - b[i] : b[i] - a[i];
  return s;
}

// 4 Philox blocks at a time; each 64-bit lane carries one 32-bit word in its low half.
inline __m256i mulhi_lo(__m256i a, __m256i m, __m256i& lo) {
  const __m256i p = _mm256_mul_epu32(a, m);
  lo = _mm256_and_si256(p, _mm256_set1_epi64x(0xFFFFFFFFLL));
  return _mm256_srli_epi64(p, 32);
}

// exact conversion of integers below 2^32
inline __m256d u32_to_pd(__m256i v) {
  const __m256i magic = _mm256_set1_epi64x(0x4330000000000000LL);
  return _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(v, magic)), _mm256_set1_pd(0x1.0p52));
}

void philox_avx2(const PhiloxStream& s, std::uint32_t first, double* out, std::size_t n) {
  const std::uint32_t k0 = static_cast<std::uint32_t>(s.seed);
  const std::uint32_t k1 = static_cast<std::uint32_t>(s.seed >> 32);
  const __m256i m0 = _mm256_set1_epi64x(0xD2511F53LL);
  const __m256i m1 = _mm256_set1_epi64x(0xCD9E8D57LL);
  const __m256i mask = _mm256_set1_epi64x(0xFFFFFFFFLL);
  const __m256i lane = _mm256_set_epi64x(3, 2, 1, 0);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256i c0 = _mm256_and_si256(
        _mm256_add_epi64(_mm256_set1_epi64x(static_cast<std::uint32_t>(first + j)), lane), mask);
    __m256i c1 = _mm256_set1_epi64x(s.step);
    __m256i c2 = _mm256_set1_epi64x(s.w2);
    __m256i c3 = _mm256_set1_epi64x(s.w3);
    std::uint32_t key0 = k0, key1 = k1;
    for (int round = 0; round < 10; ++round) {
      __m256i lo0, lo1;
      const __m256i hi0 = mulhi_lo(c0, m0, lo0);
      const __m256i hi1 = mulhi_lo(c2, m1, lo1);
      const __m256i kk0 = _mm256_set1_epi64x(key0);
      const __m256i kk1 = _mm256_set1_epi64x(key1);
      c0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1), kk0);
      c1 = lo1;
      c2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3), kk1);
      c3 = lo0;
      key0 += 0x9E3779B9u;
      key1 += 0xBB67AE85u;
    }
    // (c0 << 32 | c1) >> 11 = (c0 << 21) | (c1 >> 11), split into an exact high/low pair
    const __m256i hi = _mm256_srli_epi64(c0, 11);
    const __m256i lo = _mm256_or_si256(_mm256_and_si256(_mm256_slli_epi64(c0, 21), mask),
                                       _mm256_srli_epi64(c1, 11));
    const __m256d v = _mm256_fmadd_pd(u32_to_pd(hi), _mm256_set1_pd(0x1.0p32), u32_to_pd(lo));
    _mm256_storeu_pd(out + j, _mm256_mul_pd(v, _mm256_set1_pd(0x1.0p-53)));
  }
  if (j < n) scalar_table().philox_uniforms(s, first + static_cast<std::uint32_t>(j), out + j, n - j);
}

constexpr Table kAvx2{Isa::avx2, dot_avx2, axpy_avx2, sum_avx2, l1_avx2, philox_avx2};

}  // namespace

namespace detail {
const Table* avx2_table() noexcept { return &kAvx2; }
}  // namespace detail

}  // namespace epinet::kernels

#else

namespace epinet::kernels::detail {
const Table* avx2_table() noexcept { return nullptr; }
}  // namespace epinet::kernels::detail

#endif
