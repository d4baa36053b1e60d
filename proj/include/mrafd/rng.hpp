#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>
#include <cmath>

namespace mrafd {

using Rng = std::mt19937_64;
using cdouble = std::complex<double>;

/// splitmix64 finalizer; used to derive independent per-run seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stable seed fan-out: the result depends only on the master seed and the
/// ordered tags, so adding new runs never perturbs existing ones.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = mix64(master);
  for (auto t : tags) h = mix64(h ^ mix64(t + 0x632be59bd9b4e019ULL));
  return h;
}

/// Tag from a short ASCII label (FNV-1a).
constexpr std::uint64_t tag(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Circularly-symmetric complex Gaussian with E|w|^2 = 1.
/// Marsaglia polar method; one accepted pair gives both components.
inline cdouble complex_normal(Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double x, y, s;
  do {
    x = u(rng);
    y = u(rng);
    s = x * x + y * y;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-std::log(s) / s);
  return {x * f, y * f};
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

}  // namespace mrafd
