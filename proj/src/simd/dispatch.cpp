#include "mrafd/simd.hpp"

#include <atomic>
#include <stdexcept>

namespace mrafd::simd {

namespace {

bool cpu_has_avx2() {
#if defined(MRAFD_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

// -1: autodetect, otherwise static_cast<int>(Isa).
std::atomic<int> g_forced{-1};

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

Isa detected_isa() {
  static const Isa isa = cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
  return isa;
}

Isa active_isa() {
  const int f = g_forced.load(std::memory_order_relaxed);
  return f < 0 ? detected_isa() : static_cast<Isa>(f);
}

void force_isa(std::optional<Isa> isa) {
  if (!isa) {
    g_forced.store(-1);
    return;
  }
  if (*isa == Isa::Avx2 && detected_isa() != Isa::Avx2)
    throw std::runtime_error("AVX2 kernels are not available on this host");
  g_forced.store(static_cast<int>(*isa));
}

void pattern_energies(const BinMajorView& bank, std::span<const WeightedBin> paths,
                      std::span<double> energies) {
#if defined(MRAFD_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::pattern_energies(bank, paths, energies);
#endif
  scalar::pattern_energies(bank, paths, energies);
}

void complex_axpy(std::complex<double> w, const double* x_re, const double* x_im,
                  double* y_re, double* y_im, std::size_t n) {
#if defined(MRAFD_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::complex_axpy(w, x_re, x_im, y_re, y_im, n);
#endif
  scalar::complex_axpy(w, x_re, x_im, y_re, y_im, n);
}

double mean_power(std::span<const std::complex<double>> x) {
#if defined(MRAFD_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::mean_power(x);
#endif
  return scalar::mean_power(x);
}

}  // namespace mrafd::simd
