#include <algorithm>
#include <array>
#include <stdexcept>

#include "mrafd/simd.hpp"

namespace mrafd::simd::scalar {

namespace {
constexpr std::size_t kBlock = 256;
}

void pattern_energies(const BinMajorView& bank, std::span<const WeightedBin> paths,
                      std::span<double> energies) {
  if (energies.size() != bank.patterns)
    throw std::invalid_argument("pattern_energies: output size mismatch");
  std::fill(energies.begin(), energies.end(), 0.0);

  std::array<double, kBlock> acc_re{};
  std::array<double, kBlock> acc_im{};
  for (std::size_t p0 = 0; p0 < bank.patterns; p0 += kBlock) {
    const std::size_t len = std::min(kBlock, bank.patterns - p0);
    std::size_t i = 0;
    while (i < paths.size()) {
      const std::uint32_t delay = paths[i].delay;
      std::fill_n(acc_re.begin(), len, 0.0);
      std::fill_n(acc_im.begin(), len, 0.0);
      for (; i < paths.size() && paths[i].delay == delay; ++i) {
        const WeightedBin& w = paths[i];
        const double* gr = bank.re + static_cast<std::size_t>(w.bin) * bank.patterns + p0;
        const double* gi = bank.im + static_cast<std::size_t>(w.bin) * bank.patterns + p0;
        for (std::size_t k = 0; k < len; ++k) {
          acc_re[k] += w.re * gr[k] - w.im * gi[k];
          acc_im[k] += w.re * gi[k] + w.im * gr[k];
        }
      }
      for (std::size_t k = 0; k < len; ++k)
        energies[p0 + k] += acc_re[k] * acc_re[k] + acc_im[k] * acc_im[k];
    }
  }
}

void complex_axpy(std::complex<double> w, const double* x_re, const double* x_im,
                  double* y_re, double* y_im, std::size_t n) {
  const double wr = w.real();
  const double wi = w.imag();
  for (std::size_t k = 0; k < n; ++k) {
    y_re[k] += wr * x_re[k] - wi * x_im[k];
    y_im[k] += wr * x_im[k] + wi * x_re[k];
  }
}

double mean_power(std::span<const std::complex<double>> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (const auto& v : x) s += v.real() * v.real() + v.imag() * v.imag();
  return s / static_cast<double>(x.size());
}

}  // namespace mrafd::simd::scalar
