#include "mrafd/antenna.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "mrafd/disjoint_set.hpp"

namespace mrafd::antenna {

static_assert(std::endian::native == std::endian::little,
              "bank files are written in host byte order");

SwitchConfig::SwitchConfig(int index) : index_(index) {
  if (index < 0 || index >= kConfigs)
    throw std::out_of_range("switch config index " + std::to_string(index) +
                            " outside 0..4095");
}

SwitchConfig SwitchConfig::from_states(const std::array<bool, kSwitches>& states) {
  int idx = 0;
  for (int e = 0; e < kSwitches; ++e)
    if (states[e]) idx |= 1 << e;
  return SwitchConfig(idx);
}

SwitchConfig SwitchConfig::parse(const std::string& bits) {
  if (bits.size() != kSwitches)
    throw std::invalid_argument("switch string must have 12 characters");
  std::array<bool, kSwitches> s{};
  for (int e = 0; e < kSwitches; ++e) {
    if (bits[e] != '0' && bits[e] != '1')
      throw std::invalid_argument("switch string must contain only 0/1");
    s[e] = bits[e] == '1';
  }
  return from_states(s);
}

std::array<bool, kSwitches> SwitchConfig::states() const {
  std::array<bool, kSwitches> s{};
  for (int e = 0; e < kSwitches; ++e) s[e] = on(e);
  return s;
}

std::string SwitchConfig::to_string() const {
  std::string s(kSwitches, '0');
  for (int e = 0; e < kSwitches; ++e)
    if (on(e)) s[e] = '1';
  return s;
}

SwitchConfig config_from_index(int index) { return SwitchConfig(index); }

int rotate_pixel(int pixel) {
  // (x, y) -> (-y, x): col' = 2 - row, row' = col.
  const int row = pixel / 3;
  const int col = pixel % 3;
  return 3 * col + (2 - row);
}

namespace {

const std::array<int, kSwitches>& edge_rotation() {
  static const std::array<int, kSwitches> table = [] {
    std::array<int, kSwitches> t{};
    for (int e = 0; e < kSwitches; ++e) {
      const int a = rotate_pixel(kEdges[e].a);
      const int b = rotate_pixel(kEdges[e].b);
      for (int f = 0; f < kSwitches; ++f) {
        if ((kEdges[f].a == a && kEdges[f].b == b) || (kEdges[f].a == b && kEdges[f].b == a))
          t[e] = f;
      }
    }
    return t;
  }();
  return table;
}

enum class PixelClass { Center, Edge, Corner };

PixelClass pixel_class(int p) {
  if (p == 4) return PixelClass::Center;
  return (p % 2 == 1) ? PixelClass::Edge : PixelClass::Corner;
}

}  // namespace

SwitchConfig rotate90(SwitchConfig config) {
  const auto& rot = edge_rotation();
  int idx = 0;
  for (int e = 0; e < kSwitches; ++e)
    if (config.on(e)) idx |= 1 << rot[e];
  return SwitchConfig(idx);
}

Partition connected_components(SwitchConfig config) {
  DisjointSet ds(kPixels);
  for (int e = 0; e < kSwitches; ++e)
    if (config.on(e)) ds.unite(kEdges[e].a, kEdges[e].b);
  Partition label{};
  std::array<int, kPixels> min_of_root;
  min_of_root.fill(kPixels);
  for (int p = 0; p < kPixels; ++p) {
    auto& m = min_of_root[ds.find(p)];
    if (p < m) m = p;
  }
  for (int p = 0; p < kPixels; ++p) label[p] = min_of_root[ds.find(p)];
  return label;
}

ArrayGeometry ArrayGeometry::defaults() {
  return symmetric({-4.327, -2.885}, {0.035, 0.784}, {0.720, -0.142}, {-0.198, 0.124});
}

ArrayGeometry ArrayGeometry::symmetric(cdouble center, cdouble edge, cdouble corner,
                                       cdouble switch_load, double pitch, int bins) {
  ArrayGeometry g;
  g.pitch_wavelengths = pitch;
  g.azimuth_bins = bins;
  g.switch_load = switch_load;
  for (int p = 0; p < kPixels; ++p) {
    switch (pixel_class(p)) {
      case PixelClass::Center: g.coupling[p] = center; break;
      case PixelClass::Edge: g.coupling[p] = edge; break;
      case PixelClass::Corner: g.coupling[p] = corner; break;
    }
  }
  return g;
}

std::array<std::array<double, 2>, kPixels> ArrayGeometry::pixel_positions() const {
  std::array<std::array<double, 2>, kPixels> pos{};
  for (int p = 0; p < kPixels; ++p) {
    pos[p][0] = (p % 3 - 1) * pitch_wavelengths;
    pos[p][1] = (p / 3 - 1) * pitch_wavelengths;
  }
  return pos;
}

std::array<std::array<double, 2>, kSwitches> ArrayGeometry::switch_positions() const {
  const auto px = pixel_positions();
  std::array<std::array<double, 2>, kSwitches> pos{};
  for (int e = 0; e < kSwitches; ++e) {
    pos[e][0] = 0.5 * (px[kEdges[e].a][0] + px[kEdges[e].b][0]);
    pos[e][1] = 0.5 * (px[kEdges[e].a][1] + px[kEdges[e].b][1]);
  }
  return pos;
}

void ArrayGeometry::validate() const {
  if (!(pitch_wavelengths > 0.0) || !std::isfinite(pitch_wavelengths))
    throw std::invalid_argument("geometry: pitch_wavelengths must be positive");
  if (azimuth_bins <= 0 || azimuth_bins % 4 != 0)
    throw std::invalid_argument("geometry: azimuth_bins must be a positive multiple of 4");
  for (int p = 0; p < kPixels; ++p) {
    if (coupling[p] != coupling[rotate_pixel(p)])
      throw std::invalid_argument("geometry: coupling must be invariant under 90 degree rotation");
  }
}

RadiationPattern omni_pattern(int bins) {
  return RadiationPattern{std::vector<cdouble>(static_cast<std::size_t>(bins), cdouble{1.0, 0.0}),
                          kOmni};
}

std::size_t azimuth_bin(double azimuth, std::size_t bins) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(azimuth, two_pi);
  if (a < 0.0) a += two_pi;
  const auto k = static_cast<std::size_t>(std::llround(a / two_pi * static_cast<double>(bins)));
  return k % bins;
}

cdouble gain_at(const RadiationPattern& pattern, double azimuth) {
  if (pattern.gains.empty()) throw std::invalid_argument("gain_at: empty pattern");
  return pattern.gains[azimuth_bin(azimuth, pattern.gains.size())];
}

PatternSynthesizer::PatternSynthesizer(const ArrayGeometry& geometry)
    : geometry_(geometry), bins_(static_cast<std::size_t>(geometry.azimuth_bins)) {
  geometry_.validate();
  constexpr int kElements = kPixels + kSwitches;
  steer_re_.resize(kElements * bins_);
  steer_im_.resize(kElements * bins_);
  const auto px = geometry_.pixel_positions();
  const auto sw = geometry_.switch_positions();
  for (int el = 0; el < kElements; ++el) {
    const auto& r = el < kPixels ? px[el] : sw[el - kPixels];
    for (std::size_t k = 0; k < bins_; ++k) {
      const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(bins_);
      const double phase = 2.0 * std::numbers::pi * (r[0] * std::cos(theta) + r[1] * std::sin(theta));
      steer_re_[el * bins_ + k] = std::cos(phase);
      steer_im_[el * bins_ + k] = std::sin(phase);
    }
  }
}

void PatternSynthesizer::raw_gains(SwitchConfig config, std::span<double> re,
                                   std::span<double> im) const {
  if (re.size() != bins_ || im.size() != bins_)
    throw std::invalid_argument("raw_gains: output size mismatch");
  const Partition comp = connected_components(config);
  std::array<cdouble, kPixels> block_sum{};
  std::array<int, kPixels> block_size{};
  for (int p = 0; p < kPixels; ++p) {
    block_sum[comp[p]] += geometry_.coupling[p];
    ++block_size[comp[p]];
  }
  std::fill(re.begin(), re.end(), 1.0);  // driven patch
  std::fill(im.begin(), im.end(), 0.0);
  for (int p = 0; p < kPixels; ++p) {
    const cdouble w = block_sum[comp[p]] / static_cast<double>(block_size[comp[p]]);
    simd::complex_axpy(w, &steer_re_[p * bins_], &steer_im_[p * bins_], re.data(), im.data(), bins_);
  }
  if (geometry_.switch_load != cdouble{}) {
    for (int e = 0; e < kSwitches; ++e) {
      if (!config.on(e)) continue;
      const std::size_t el = kPixels + e;
      simd::complex_axpy(geometry_.switch_load, &steer_re_[el * bins_], &steer_im_[el * bins_],
                         re.data(), im.data(), bins_);
    }
  }
}

RadiationPattern PatternSynthesizer::synthesize(SwitchConfig config) const {
  std::vector<double> re(bins_), im(bins_);
  raw_gains(config, re, im);
  double power = 0.0;
  for (std::size_t k = 0; k < bins_; ++k) power += re[k] * re[k] + im[k] * im[k];
  power /= static_cast<double>(bins_);
  RadiationPattern out;
  out.config_index = config.index();
  out.gains.resize(bins_);
  if (power == 0.0) throw std::domain_error("synthesize_pattern: pattern has zero power");
  const double scale = 1.0 / std::sqrt(power);
  for (std::size_t k = 0; k < bins_; ++k) out.gains[k] = {re[k] * scale, im[k] * scale};
  return out;
}

RadiationPattern synthesize_pattern(SwitchConfig config, const ArrayGeometry& geometry) {
  return PatternSynthesizer(geometry).synthesize(config);
}

PatternBank::PatternBank(ArrayGeometry geometry, std::vector<RadiationPattern> patterns)
    : geometry_(std::move(geometry)), patterns_(std::move(patterns)),
      bins_(static_cast<std::size_t>(geometry_.azimuth_bins)) {
  if (patterns_.size() != static_cast<std::size_t>(kConfigs))
    throw std::invalid_argument("pattern bank must hold exactly 4096 patterns");
  const std::size_t n = patterns_.size();
  plane_re_.resize(n * bins_);
  plane_im_.resize(n * bins_);
  for (std::size_t p = 0; p < n; ++p) {
    if (patterns_[p].config_index != static_cast<int>(p))
      throw std::invalid_argument("pattern bank entry " + std::to_string(p) + " has wrong index");
    if (patterns_[p].gains.size() != bins_)
      throw std::invalid_argument("pattern bank entry has wrong bin count");
    for (std::size_t k = 0; k < bins_; ++k) {
      plane_re_[k * n + p] = patterns_[p].gains[k].real();
      plane_im_[k * n + p] = patterns_[p].gains[k].imag();
    }
  }
}

const RadiationPattern& PatternBank::at(int index) const {
  if (index < 0 || static_cast<std::size_t>(index) >= patterns_.size())
    throw std::out_of_range("pattern index " + std::to_string(index) + " outside bank");
  return patterns_[static_cast<std::size_t>(index)];
}

simd::BinMajorView PatternBank::bin_major() const {
  return {plane_re_.data(), plane_im_.data(), patterns_.size(), bins_};
}

PatternBank build_pattern_bank(const ArrayGeometry& geometry) {
  const PatternSynthesizer synth(geometry);
  std::vector<RadiationPattern> patterns;
  patterns.reserve(kConfigs);
  for (int i = 0; i < kConfigs; ++i) patterns.push_back(synth.synthesize(SwitchConfig(i)));
  return PatternBank(geometry, std::move(patterns));
}

namespace {

constexpr char kMagic[8] = {'M', 'R', 'A', 'B', 'A', 'N', 'K', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("bank file truncated");
  return v;
}

void put_complex(std::ofstream& out, cdouble z) {
  put(out, z.real());
  put(out, z.imag());
}

cdouble get_complex(std::ifstream& in) {
  const double re = get<double>(in);
  const double im = get<double>(in);
  return {re, im};
}

}  // namespace

void save_bank(const PatternBank& bank, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(kMagic, sizeof(kMagic));
  put(out, kVersion);
  put(out, static_cast<std::uint32_t>(bank.bins()));
  put(out, static_cast<std::uint32_t>(bank.size()));
  const auto& g = bank.geometry();
  put(out, g.pitch_wavelengths);
  for (const auto& c : g.coupling) put_complex(out, c);
  put_complex(out, g.switch_load);
  for (const auto& p : bank.patterns())
    out.write(reinterpret_cast<const char*>(p.gains.data()),
              static_cast<std::streamsize>(p.gains.size() * sizeof(cdouble)));
  if (!out) throw std::runtime_error("error writing " + path.string());
}

PatternBank load_bank(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open bank file " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error(path.string() + " is not a pattern bank file");
  if (get<std::uint32_t>(in) != kVersion)
    throw std::runtime_error("unsupported bank file version");
  const auto bins = get<std::uint32_t>(in);
  const auto count = get<std::uint32_t>(in);
  if (count != static_cast<std::uint32_t>(kConfigs))
    throw std::runtime_error("bank file must hold 4096 patterns");
  ArrayGeometry g;
  g.azimuth_bins = static_cast<int>(bins);
  g.pitch_wavelengths = get<double>(in);
  for (auto& c : g.coupling) c = get_complex(in);
  g.switch_load = get_complex(in);
  g.validate();
  std::vector<RadiationPattern> patterns(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    patterns[i].config_index = static_cast<int>(i);
    patterns[i].gains.resize(bins);
    in.read(reinterpret_cast<char*>(patterns[i].gains.data()),
            static_cast<std::streamsize>(bins * sizeof(cdouble)));
    if (!in) throw std::runtime_error("bank file truncated");
  }
  return PatternBank(std::move(g), std::move(patterns));
}

}  // namespace mrafd::antenna
