#include <immintrin.h>

#include <algorithm>
#include <array>
#include <stdexcept>

#include "mrafd/simd.hpp"

namespace mrafd::simd::avx2 {

namespace {

constexpr std::size_t kBlock = 256;

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

void pattern_energies(const BinMajorView& bank, std::span<const WeightedBin> paths,
                      std::span<double> energies) {
  if (energies.size() != bank.patterns)
    throw std::invalid_argument("pattern_energies: output size mismatch");
  std::fill(energies.begin(), energies.end(), 0.0);

  alignas(32) std::array<double, kBlock> acc_re{};
  alignas(32) std::array<double, kBlock> acc_im{};
  for (std::size_t p0 = 0; p0 < bank.patterns; p0 += kBlock) {
    const std::size_t len = std::min(kBlock, bank.patterns - p0);
    const std::size_t vlen = len & ~std::size_t{3};
    std::size_t i = 0;
    while (i < paths.size()) {
      const std::uint32_t delay = paths[i].delay;
      std::fill_n(acc_re.begin(), len, 0.0);
      std::fill_n(acc_im.begin(), len, 0.0);
      for (; i < paths.size() && paths[i].delay == delay; ++i) {
        const WeightedBin& w = paths[i];
        const double* gr = bank.re + static_cast<std::size_t>(w.bin) * bank.patterns + p0;
        const double* gi = bank.im + static_cast<std::size_t>(w.bin) * bank.patterns + p0;
        const __m256d wr = _mm256_set1_pd(w.re);
        const __m256d wi = _mm256_set1_pd(w.im);
        std::size_t k = 0;
        for (; k < vlen; k += 4) {
          const __m256d r = _mm256_loadu_pd(gr + k);
          const __m256d m = _mm256_loadu_pd(gi + k);
          __m256d ar = _mm256_load_pd(acc_re.data() + k);
          __m256d ai = _mm256_load_pd(acc_im.data() + k);
          ar = _mm256_fmadd_pd(wr, r, ar);
          ar = _mm256_fnmadd_pd(wi, m, ar);
          ai = _mm256_fmadd_pd(wr, m, ai);
          ai = _mm256_fmadd_pd(wi, r, ai);
          _mm256_store_pd(acc_re.data() + k, ar);
          _mm256_store_pd(acc_im.data() + k, ai);
        }
        for (; k < len; ++k) {
          acc_re[k] += w.re * gr[k] - w.im * gi[k];
          acc_im[k] += w.re * gi[k] + w.im * gr[k];
        }
      }
      double* e = energies.data() + p0;
      std::size_t k = 0;
      for (; k < vlen; k += 4) {
        const __m256d ar = _mm256_load_pd(acc_re.data() + k);
        const __m256d ai = _mm256_load_pd(acc_im.data() + k);
        __m256d acc = _mm256_loadu_pd(e + k);
        acc = _mm256_add_pd(acc, _mm256_fmadd_pd(ar, ar, _mm256_mul_pd(ai, ai)));
        _mm256_storeu_pd(e + k, acc);
      }
      for (; k < len; ++k) e[k] += acc_re[k] * acc_re[k] + acc_im[k] * acc_im[k];
    }
  }
}

void complex_axpy(std::complex<double> w, const double* x_re, const double* x_im,
                  double* y_re, double* y_im, std::size_t n) {
  const __m256d wr = _mm256_set1_pd(w.real());
  const __m256d wi = _mm256_set1_pd(w.imag());
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d xr = _mm256_loadu_pd(x_re + k);
    const __m256d xi = _mm256_loadu_pd(x_im + k);
    __m256d yr = _mm256_loadu_pd(y_re + k);
    __m256d yi = _mm256_loadu_pd(y_im + k);
    yr = _mm256_fnmadd_pd(wi, xi, _mm256_fmadd_pd(wr, xr, yr));
    yi = _mm256_fmadd_pd(wi, xr, _mm256_fmadd_pd(wr, xi, yi));
    _mm256_storeu_pd(y_re + k, yr);
    _mm256_storeu_pd(y_im + k, yi);
  }
  for (; k < n; ++k) {
    y_re[k] += w.real() * x_re[k] - w.imag() * x_im[k];
    y_im[k] += w.real() * x_im[k] + w.imag() * x_re[k];
  }
}

double mean_power(std::span<const std::complex<double>> x) {
  if (x.empty()) return 0.0;
  // std::complex<double> is layout-compatible with double[2].
  const double* p = reinterpret_cast<const double*>(x.data());
  const std::size_t n = x.size() * 2;
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    const __m256d a = _mm256_loadu_pd(p + k);
    const __m256d b = _mm256_loadu_pd(p + k + 4);
    acc0 = _mm256_fmadd_pd(a, a, acc0);
    acc1 = _mm256_fmadd_pd(b, b, acc1);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) s += p[k] * p[k];
  return s / static_cast<double>(x.size());
}

}  // namespace mrafd::simd::avx2
