#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "mrafd/simd.hpp"

using namespace mrafd;

namespace {

struct RandomBank {
  std::vector<double> re, im;
  simd::BinMajorView view;
  RandomBank(std::size_t patterns, std::size_t bins, std::mt19937_64& rng) : re(patterns * bins), im(patterns * bins) {
    std::normal_distribution<double> n;
    for (auto& v : re) v = n(rng);
    for (auto& v : im) v = n(rng);
    view = {re.data(), im.data(), patterns, bins};
  }
};

std::vector<simd::WeightedBin> random_paths(std::size_t count, std::size_t bins, int max_delay,
                                            std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  std::vector<simd::WeightedBin> p(count);
  for (auto& w : p) {
    w.bin = static_cast<std::uint32_t>(rng() % bins);
    w.delay = static_cast<std::uint32_t>(rng() % static_cast<unsigned>(max_delay + 1));
    w.re = n(rng);
    w.im = n(rng);
  }
  std::stable_sort(p.begin(), p.end(), [](auto& a, auto& b) { return a.delay < b.delay; });
  return p;
}

// Direct evaluation of the energy definition.
double energy_oracle(const simd::BinMajorView& b, const std::vector<simd::WeightedBin>& paths, std::size_t p) {
  std::vector<std::complex<double>> taps(64);
  for (const auto& w : paths) {
    const std::complex<double> g(b.re[w.bin * b.patterns + p], b.im[w.bin * b.patterns + p]);
    taps[w.delay] += std::complex<double>(w.re, w.im) * g;
  }
  double e = 0.0;
  for (auto t : taps) e += std::norm(t);
  return e;
}

bool close(double a, double b, double rel = 1e-12) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_CASE("scalar energy kernel matches the direct definition") {
  std::mt19937_64 rng(7);
  RandomBank bank(37, 24, rng);
  for (int trial = 0; trial < 20; ++trial) {
    const auto paths = random_paths(1 + trial % 9, 24, 5, rng);
    std::vector<double> e(37);
    simd::scalar::pattern_energies(bank.view, paths, e);
    for (std::size_t p = 0; p < 37; ++p) CHECK(close(e[p], energy_oracle(bank.view, paths, p)));
  }
}

TEST_CASE("dispatcher reports a usable variant") {
  CHECK_FALSE(simd::isa_name(simd::detected_isa()).empty());
  simd::force_isa(simd::Isa::Scalar);
  CHECK(simd::active_isa() == simd::Isa::Scalar);
  simd::force_isa(std::nullopt);
  CHECK(simd::active_isa() == simd::detected_isa());
}

#if defined(MRAFD_HAVE_AVX2)
TEST_CASE("avx2 kernels agree with scalar kernels") {
  if (simd::detected_isa() != simd::Isa::Avx2) {
    MESSAGE("host lacks AVX2; equivalence not exercised");
    return;
  }
  std::mt19937_64 rng(11);

  SUBCASE("pattern energies, ragged pattern counts") {
    for (std::size_t patterns : {1u, 3u, 4u, 5u, 7u, 64u, 257u, 4096u}) {
      RandomBank bank(patterns, 36, rng);
      for (int trial = 0; trial < 5; ++trial) {
        const auto paths = random_paths(1 + static_cast<std::size_t>(trial) * 3, 36, 8, rng);
        std::vector<double> a(patterns), b(patterns);
        simd::scalar::pattern_energies(bank.view, paths, a);
        simd::avx2::pattern_energies(bank.view, paths, b);
        for (std::size_t p = 0; p < patterns; ++p) REQUIRE(close(a[p], b[p], 1e-11));
      }
    }
  }

  SUBCASE("complex axpy, odd lengths") {
    std::normal_distribution<double> n;
    for (std::size_t len : {0u, 1u, 2u, 3u, 5u, 8u, 13u, 360u, 361u}) {
      std::vector<double> xr(len), xi(len), ar(len), ai(len);
      for (std::size_t i = 0; i < len; ++i) {
        xr[i] = n(rng);
        xi[i] = n(rng);
        ar[i] = n(rng);
        ai[i] = n(rng);
      }
      auto br = ar, bi = ai;
      const std::complex<double> w(n(rng), n(rng));
      simd::scalar::complex_axpy(w, xr.data(), xi.data(), ar.data(), ai.data(), len);
      simd::avx2::complex_axpy(w, xr.data(), xi.data(), br.data(), bi.data(), len);
      for (std::size_t i = 0; i < len; ++i) {
        REQUIRE(close(ar[i], br[i], 1e-13));
        REQUIRE(close(ai[i], bi[i], 1e-13));
      }
    }
  }

  SUBCASE("mean power") {
    std::normal_distribution<double> n;
    for (std::size_t len : {0u, 1u, 2u, 3u, 22u, 64u, 1001u}) {
      std::vector<std::complex<double>> x(len);
      for (auto& v : x) v = {n(rng), n(rng)};
      CHECK(close(simd::scalar::mean_power(x), simd::avx2::mean_power(x), 1e-13));
    }
  }

  SUBCASE("forcing a variant routes the dispatching entry point") {
    RandomBank bank(101, 12, rng);
    const auto paths = random_paths(6, 12, 3, rng);
    std::vector<double> a(101), b(101);
    simd::force_isa(simd::Isa::Scalar);
    simd::pattern_energies(bank.view, paths, a);
    simd::force_isa(simd::Isa::Avx2);
    simd::pattern_energies(bank.view, paths, b);
    simd::force_isa(std::nullopt);
    for (std::size_t p = 0; p < 101; ++p) CHECK(close(a[p], b[p], 1e-11));
  }
}
#endif

TEST_CASE("mean power of an empty span is zero") {
  CHECK(simd::mean_power({}) == 0.0);
}
