#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace mrafd {

/// Unitary DFT of a fixed length (FFTW underneath): forward and inverse both
/// scale by 1/sqrt(n), so Parseval holds without extra factors.
class UnitaryDft {
 public:
  explicit UnitaryDft(std::size_t n);
  ~UnitaryDft();
  UnitaryDft(const UnitaryDft&) = delete;
  UnitaryDft& operator=(const UnitaryDft&) = delete;

  std::size_t size() const { return n_; }

  void forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);
  void inverse(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);

 private:
  void run(void* plan, std::span<const std::complex<double>> in, std::span<std::complex<double>> out);

  std::size_t n_;
  std::complex<double>* buf_in_;
  std::complex<double>* buf_out_;
  void* fwd_;
  void* inv_;
};

}  // namespace mrafd
