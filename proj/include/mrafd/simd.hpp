#pragma once

// Data-parallel kernels with a scalar reference and an AVX2+FMA variant.
// The variant is chosen once at startup from CPUID; tests may force either
// path to check equivalence.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace mrafd::simd {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);

/// Best variant supported by both the build and the host CPU.
Isa detected_isa();

/// Variant currently used by the dispatching entry points.
Isa active_isa();

/// Pin the dispatcher to a variant (nullopt restores autodetection).
/// Forcing Avx2 on a host without it throws std::runtime_error.
void force_isa(std::optional<Isa> isa);

/// Bank gains stored bin-major with split real/imaginary planes:
/// element (bin, pattern) lives at [bin * patterns + pattern].
struct BinMajorView {
  const double* re = nullptr;
  const double* im = nullptr;
  std::size_t patterns = 0;
  std::size_t bins = 0;
};

/// One propagation path as seen by the energy kernel.
struct WeightedBin {
  std::uint32_t bin = 0;
  std::uint32_t delay = 0;
  double re = 0.0;
  double im = 0.0;
};

/// energies[p] = sum_d | sum_{paths i with delay d} a_i * g_p(bin_i) |^2
/// for every pattern p. `paths` must be sorted by delay.
void pattern_energies(const BinMajorView& bank, std::span<const WeightedBin> paths,
                      std::span<double> energies);

/// y += w * x over split complex arrays of length n.
void complex_axpy(std::complex<double> w, const double* x_re, const double* x_im,
                  double* y_re, double* y_im, std::size_t n);

/// mean |x_i|^2; returns 0 for an empty span.
double mean_power(std::span<const std::complex<double>> x);

namespace scalar {
void pattern_energies(const BinMajorView& bank, std::span<const WeightedBin> paths,
                      std::span<double> energies);
void complex_axpy(std::complex<double> w, const double* x_re, const double* x_im,
                  double* y_re, double* y_im, std::size_t n);
double mean_power(std::span<const std::complex<double>> x);
}  // namespace scalar

#if defined(MRAFD_HAVE_AVX2)
namespace avx2 {
void pattern_energies(const BinMajorView& bank, std::span<const WeightedBin> paths,
                      std::span<double> energies);
void complex_axpy(std::complex<double> w, const double* x_re, const double* x_im,
                  double* y_re, double* y_im, std::size_t n);
double mean_power(std::span<const std::complex<double>> x);
}  // namespace avx2
#endif

}  // namespace mrafd::simd
