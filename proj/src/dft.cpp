#include "mrafd/dft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mrafd {

UnitaryDft::UnitaryDft(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("UnitaryDft: length must be positive");
  buf_in_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * n));
  buf_out_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * n));
  auto* in = reinterpret_cast<fftw_complex*>(buf_in_);
  auto* out = reinterpret_cast<fftw_complex*>(buf_out_);
  const int len = static_cast<int>(n);
  fwd_ = fftw_plan_dft_1d(len, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
  inv_ = fftw_plan_dft_1d(len, in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
}

UnitaryDft::~UnitaryDft() {
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(inv_));
  fftw_free(buf_in_);
  fftw_free(buf_out_);
}

void UnitaryDft::run(void* plan, std::span<const std::complex<double>> in,
                     std::span<std::complex<double>> out) {
  if (in.size() != n_ || out.size() != n_) throw std::invalid_argument("UnitaryDft: length mismatch");
  std::copy(in.begin(), in.end(), buf_in_);
  fftw_execute(static_cast<fftw_plan>(plan));
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_));
  for (std::size_t i = 0; i < n_; ++i) out[i] = buf_out_[i] * scale;
}

void UnitaryDft::forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
  run(fwd_, in, out);
}

void UnitaryDft::inverse(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
  run(inv_, in, out);
}

}  // namespace mrafd
