#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <queue>
#include <random>
#include <set>

#include "mrafd/antenna.hpp"
#include "support.hpp"

using namespace mrafd;
using namespace mrafd::antenna;

namespace {

// Breadth-first search over closed switches, independent of the union-find.
Partition bfs_components(SwitchConfig c) {
  Partition label;
  label.fill(-1);
  for (int start = 0; start < kPixels; ++start) {
    if (label[start] >= 0) continue;
    std::queue<int> q;
    q.push(start);
    label[start] = start;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int e = 0; e < kSwitches; ++e) {
        if (!c.on(e)) continue;
        int v = -1;
        if (kEdges[e].a == u) v = kEdges[e].b;
        if (kEdges[e].b == u) v = kEdges[e].a;
        if (v >= 0 && label[v] < 0) {
          label[v] = start;
          q.push(v);
        }
      }
    }
  }
  return label;
}

double mean_power(const RadiationPattern& p) {
  double s = 0.0;
  for (auto g : p.gains) s += std::norm(g);
  return s / static_cast<double>(p.gains.size());
}

std::vector<char> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("switch config encoding") {
  CHECK_THROWS_AS(SwitchConfig(-1), std::out_of_range);
  CHECK_THROWS_AS(SwitchConfig(4096), std::out_of_range);
  for (int i : {0, 1, 5, 2048, 4095}) {
    const SwitchConfig c(i);
    CHECK(SwitchConfig::parse(c.to_string()) == c);
    CHECK(SwitchConfig::from_states(c.states()) == c);
  }
  CHECK(SwitchConfig::parse("100000000001").index() == (1 | (1 << 11)));
  CHECK_THROWS(SwitchConfig::parse("10"));
  CHECK_THROWS(SwitchConfig::parse("10000000000x"));
}

TEST_CASE("connected components equal a BFS oracle for all 4096 configs") {
  for (int i = 0; i < kConfigs; ++i) REQUIRE(connected_components(SwitchConfig(i)) == bfs_components(SwitchConfig(i)));
  const auto all_off = connected_components(SwitchConfig(0));
  for (int p = 0; p < kPixels; ++p) CHECK(all_off[p] == p);
  const auto all_on = connected_components(SwitchConfig(kConfigs - 1));
  for (int p = 0; p < kPixels; ++p) CHECK(all_on[p] == 0);
}

TEST_CASE("rotation maps the grid onto itself") {
  std::set<int> image;
  for (int p = 0; p < kPixels; ++p) image.insert(rotate_pixel(p));
  CHECK(image.size() == kPixels);
  CHECK(rotate_pixel(4) == 4);
  for (int i = 0; i < kConfigs; ++i) {
    SwitchConfig c(i);
    const SwitchConfig r = rotate90(rotate90(rotate90(rotate90(c))));
    REQUIRE(r == c);
    // Rotating the config relabels its blocks by the pixel rotation.
    const auto a = connected_components(c);
    const auto b = connected_components(rotate90(c));
    for (int p = 0; p < kPixels; ++p)
      for (int q = 0; q < kPixels; ++q)
        REQUIRE((a[p] == a[q]) == (b[rotate_pixel(p)] == b[rotate_pixel(q)]));
  }
}

TEST_CASE("bank holds 4096 unit-power patterns") {
  const auto& bank = test::default_bank();
  REQUIRE(bank.size() == 4096);
  for (std::size_t i = 0; i < bank.size(); ++i) {
    REQUIRE(bank[i].config_index == static_cast<int>(i));
    REQUIRE(std::abs(mean_power(bank[i]) - 1.0) < 1e-9);
  }
  CHECK_THROWS_AS(bank.at(4096), std::out_of_range);
  CHECK_THROWS_AS(bank.at(-1), std::out_of_range);
}

TEST_CASE("90 degree rotation equivariance on random configs") {
  const auto& bank = test::default_bank();
  const std::size_t bins = bank.bins();
  std::mt19937_64 rng(90);
  for (int trial = 0; trial < 100; ++trial) {
    const int i = static_cast<int>(rng() % kConfigs);
    const auto& g = bank[static_cast<std::size_t>(i)].gains;
    const auto& gr = bank[static_cast<std::size_t>(rotate90(SwitchConfig(i)).index())].gains;
    for (std::size_t k = 0; k < bins; ++k) {
      const auto expect = g[(k + bins - bins / 4) % bins];
      REQUIRE(std::abs(gr[k] - expect) < 1e-9);
    }
  }
}

TEST_CASE("all switches closed matches a direct array-factor sum") {
  auto geo = ArrayGeometry::defaults();
  geo.switch_load = {};
  const auto pat = synthesize_pattern(SwitchConfig(kConfigs - 1), geo);
  cdouble total{};
  for (auto c : geo.coupling) total += c;
  const auto pos = geo.pixel_positions();
  std::vector<cdouble> raw(static_cast<std::size_t>(geo.azimuth_bins));
  double power = 0.0;
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(raw.size());
    cdouble v = 1.0;
    for (int p = 0; p < kPixels; ++p)
      v += total / 9.0 *
           std::polar(1.0, 2.0 * std::numbers::pi * (pos[p][0] * std::cos(th) + pos[p][1] * std::sin(th)));
    raw[k] = v;
    power += std::norm(v);
  }
  power /= static_cast<double>(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) REQUIRE(std::abs(pat.gains[k] - raw[k] / std::sqrt(power)) < 1e-9);
}

TEST_CASE("zero coupling gives an isotropic pattern") {
  const auto geo = ArrayGeometry::symmetric({}, {}, {}, {});
  for (int i : {0, 1, 777, 4095}) {
    const auto pat = synthesize_pattern(SwitchConfig(i), geo);
    for (auto g : pat.gains) REQUIRE(std::abs(g - cdouble(1.0, 0.0)) < 1e-12);
  }
}

TEST_CASE("geometry validation") {
  auto g = ArrayGeometry::defaults();
  CHECK_NOTHROW(g.validate());
  g.azimuth_bins = 90;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = ArrayGeometry::defaults();
  g.pitch_wavelengths = 0.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = ArrayGeometry::defaults();
  g.coupling[0] = {9.0, 0.0};
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("azimuth bins wrap") {
  CHECK(azimuth_bin(0.0, 360) == 0);
  CHECK(azimuth_bin(2.0 * std::numbers::pi, 360) == 0);
  CHECK(azimuth_bin(-std::numbers::pi / 2.0, 360) == 270);
  CHECK(azimuth_bin(std::numbers::pi, 360) == 180);
  CHECK(azimuth_bin(2.0 * std::numbers::pi - 1e-6, 360) == 0);
  const auto omni = omni_pattern(360);
  CHECK(omni.is_omni());
  CHECK(gain_at(omni, 1.234) == cdouble(1.0, 0.0));
}

TEST_CASE("bank files round-trip bit-exactly and deterministically") {
  const auto dir = std::filesystem::temp_directory_path() / "mrafd_test_antenna";
  std::filesystem::create_directories(dir);
  const auto& bank = test::default_bank();
  save_bank(bank, dir / "a.bin");
  const auto loaded = load_bank(dir / "a.bin");
  CHECK(loaded.geometry() == bank.geometry());
  REQUIRE(loaded.size() == bank.size());
  for (std::size_t i = 0; i < bank.size(); ++i) REQUIRE(loaded[i].gains == bank[i].gains);
  save_bank(build_pattern_bank(ArrayGeometry::defaults()), dir / "b.bin");
  CHECK(slurp(dir / "a.bin") == slurp(dir / "b.bin"));

  std::ofstream(dir / "bad.bin") << "not a bank";
  CHECK_THROWS(load_bank(dir / "bad.bin"));
  CHECK_THROWS(load_bank(dir / "missing.bin"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("default geometry makes nearly every pattern distinct") {
  const auto& bank = test::default_bank();
  std::set<std::vector<long long>> seen;
  for (std::size_t i = 0; i < bank.size(); ++i) {
    std::vector<long long> key;
    for (auto g : bank[i].gains) {
      key.push_back(std::llround(g.real() * 1e6));
      key.push_back(std::llround(g.imag() * 1e6));
    }
    seen.insert(std::move(key));
  }
  CHECK(seen.size() >= 0.95 * 4096);
}
