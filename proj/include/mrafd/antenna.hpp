#pragma once

// Multi-reconfigurable receive antenna: a driven patch under a 3x3 grid of
// parasitic pixels joined by 12 switches. Each of the 4096 switch settings
// yields one azimuthal radiation pattern.
//
// Pixel p = 3 * row + col sits at x = (col - 1) * pitch, y = (row - 1) * pitch
// (wavelengths). Switch order: edges 0..5 are horizontal links
// (row, col)-(row, col + 1) in row-major order, edges 6..11 are vertical links
// (row, col)-(row + 1, col) in row-major order. Bit e of a config index is the
// state of edge e.

#include <array>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mrafd/simd.hpp"

namespace mrafd::antenna {

using cdouble = std::complex<double>;

inline constexpr int kPixels = 9;
inline constexpr int kSwitches = 12;
inline constexpr int kConfigs = 1 << kSwitches;
inline constexpr int kOmni = -1;

struct Edge {
  int a;
  int b;
};

inline constexpr std::array<Edge, kSwitches> kEdges = {{
    {0, 1}, {1, 2}, {3, 4}, {4, 5}, {6, 7}, {7, 8},  // horizontal
    {0, 3}, {1, 4}, {2, 5}, {3, 6}, {4, 7}, {5, 8},  // vertical
}};

class SwitchConfig {
 public:
  SwitchConfig() = default;

  /// Throws std::out_of_range outside 0..4095.
  explicit SwitchConfig(int index);

  static SwitchConfig from_states(const std::array<bool, kSwitches>& states);

  /// "0101..." with character e holding edge e.
  static SwitchConfig parse(const std::string& bits);

  int index() const { return index_; }
  bool on(int edge) const { return (index_ >> edge) & 1; }
  std::array<bool, kSwitches> states() const;
  std::string to_string() const;

  friend bool operator==(SwitchConfig, SwitchConfig) = default;

 private:
  int index_ = 0;
};

SwitchConfig config_from_index(int index);

/// The configuration obtained by rotating the pixel grid 90 degrees
/// counter-clockwise about the driven patch.
SwitchConfig rotate90(SwitchConfig config);

/// Pixel index after a 90 degree counter-clockwise rotation.
int rotate_pixel(int pixel);

/// Component label per pixel: the smallest pixel index in its block.
using Partition = std::array<int, kPixels>;

Partition connected_components(SwitchConfig config);

struct ArrayGeometry {
  double pitch_wavelengths = 0.1225;
  /// Coupling of each pixel to the driven patch, indexed like pixels.
  std::array<cdouble, kPixels> coupling{};
  /// Extra radiating current contributed by each closed switch at the
  /// midpoint of its edge.
  cdouble switch_load{};
  int azimuth_bins = 360;

  /// Calibrated defaults (see README).
  static ArrayGeometry defaults();

  /// Coupling assigned by pixel class: centre, the four edge pixels, the
  /// four corner pixels.
  static ArrayGeometry symmetric(cdouble center, cdouble edge, cdouble corner,
                                 cdouble switch_load = {}, double pitch = 0.1225,
                                 int bins = 360);

  std::array<std::array<double, 2>, kPixels> pixel_positions() const;
  std::array<std::array<double, 2>, kSwitches> switch_positions() const;

  /// Throws std::invalid_argument on a non-positive pitch, bins not a
  /// positive multiple of 4, or coupling without the grid's 90 degree symmetry.
  void validate() const;

  friend bool operator==(const ArrayGeometry&, const ArrayGeometry&) = default;
};

struct RadiationPattern {
  std::vector<cdouble> gains;
  int config_index = kOmni;

  bool is_omni() const { return config_index == kOmni; }
  std::size_t bins() const { return gains.size(); }
};

RadiationPattern omni_pattern(int bins = 360);

/// Nearest bin for an azimuth (radians, wrapped to [0, 2pi)).
std::size_t azimuth_bin(double azimuth, std::size_t bins);

cdouble gain_at(const RadiationPattern& pattern, double azimuth);

/// Precomputed steering vectors for one geometry; synthesizes any config.
class PatternSynthesizer {
 public:
  explicit PatternSynthesizer(const ArrayGeometry& geometry);

  RadiationPattern synthesize(SwitchConfig config) const;

  /// Unnormalized gains into split output planes of length azimuth_bins.
  void raw_gains(SwitchConfig config, std::span<double> re, std::span<double> im) const;

  const ArrayGeometry& geometry() const { return geometry_; }

 private:
  ArrayGeometry geometry_;
  std::size_t bins_;
  // [element * bins + bin]; elements 0..8 pixels, 9..20 switches.
  std::vector<double> steer_re_;
  std::vector<double> steer_im_;
};

/// Component model: each connected block C gets excitation sum(coupling[C])
/// spread evenly over its pixels; the pattern is the driven patch plus the
/// pixel and switch currents, normalized to unit mean power over azimuth.
RadiationPattern synthesize_pattern(SwitchConfig config, const ArrayGeometry& geometry);

class PatternBank {
 public:
  PatternBank(ArrayGeometry geometry, std::vector<RadiationPattern> patterns);

  std::size_t size() const { return patterns_.size(); }
  std::size_t bins() const { return bins_; }
  const RadiationPattern& operator[](std::size_t i) const { return patterns_[i]; }
  const RadiationPattern& at(int index) const;
  const ArrayGeometry& geometry() const { return geometry_; }
  const std::vector<RadiationPattern>& patterns() const { return patterns_; }

  /// Bin-major split planes for the SIMD energy kernel.
  simd::BinMajorView bin_major() const;

 private:
  ArrayGeometry geometry_;
  std::vector<RadiationPattern> patterns_;
  std::size_t bins_;
  std::vector<double> plane_re_;
  std::vector<double> plane_im_;
};

PatternBank build_pattern_bank(const ArrayGeometry& geometry);

/// Binary bank file: "MRABANK1", u32 version, u32 bins, u32 count, f64 pitch,
/// 9 x (f64 re, f64 im) coupling, (f64 re, f64 im) switch load, then
/// count x bins x (f64 re, f64 im) gains. Little-endian; round-trips bit-exactly.
void save_bank(const PatternBank& bank, const std::filesystem::path& path);
PatternBank load_bank(const std::filesystem::path& path);

}  // namespace mrafd::antenna
