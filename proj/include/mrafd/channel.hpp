#pragma once

// Angle/delay/amplitude multipath for the self-interference (SI) and
// signal-of-interest (SOI) links, weighted by the receive pattern.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mrafd/antenna.hpp"
#include "mrafd/rng.hpp"

namespace mrafd::channel {

enum class Orientation { Opposite, FaceToFace, SideToSideLeft, SideToSideRight };

/// Peer azimuth seen from the MRA: 180, 0, 90 and 270 degrees.
double orientation_azimuth(Orientation o);
std::string to_string(Orientation o);
Orientation parse_orientation(const std::string& s);

inline constexpr double kSemiStaticRho = 0.99999;
inline constexpr double kDynamicRho = 0.999;

struct Environment {
  std::string name = "env";
  Orientation orientation = Orientation::FaceToFace;
  /// Overrides the orientation azimuth (radians) when set.
  std::optional<double> peer_azimuth_rad;
  bool los_blocked = false;
  int n_reflectors = 8;
  double si_los_power_db = -20.0;
  double si_nlos_rel_db = -35.0;
  double si_los_azimuth_rad = 3.141592653589793;
  double soi_pathloss_db = 55.0;
  double soi_nlos_rel_db = -10.0;
  /// AR(1) coefficient per evolution step.
  double dynamics_rho = kSemiStaticRho;
  double step_s = 1e-3;
  int max_delay_bins = 8;
  std::uint64_t seed = 1;

  double peer_azimuth() const;
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

enum class PathKind { Los, Nlos };
enum class Link { Si, Soi };

struct PathComponent {
  double aoa = 0.0;
  int delay_bins = 0;
  cdouble amplitude{};
  PathKind kind = PathKind::Los;
  /// Stationary mean power of an NLOS amplitude (used by evolve).
  double power = 0.0;
};

struct PathSet {
  std::vector<PathComponent> paths;
  Link link = Link::Si;

  double total_power() const;
  int max_delay() const;
};

struct ChannelRealization {
  std::vector<cdouble> taps;
  Link link = Link::Si;
  int pattern_index = antenna::kOmni;

  double energy() const;
};

PathSet generate_si_paths(const Environment& env, Rng& rng);
PathSet generate_soi_paths(const Environment& env, Rng& rng);

/// taps[d] = sum over paths with delay d of amplitude * gain_at(pattern, aoa).
ChannelRealization realize_channel(const PathSet& paths, const antenna::RadiationPattern& pattern);

/// AR(1) update of every NLOS amplitude, `steps` times; LOS paths untouched.
PathSet evolve(const PathSet& paths, int steps, const Environment& env, Rng& rng);

/// -10 log10(sum |taps|^2); +infinity for zero-energy taps.
/// Throws std::invalid_argument for a SOI realization.
double passive_suppression_db(const ChannelRealization& realization);

/// Paths in the layout consumed by simd::pattern_energies (sorted by delay).
std::vector<simd::WeightedBin> weighted_bins(const PathSet& paths, std::size_t bins);

/// CSV: aoa,delay,re,im,kind
void write_paths_csv(std::ostream& out, const PathSet& paths);

/// Both links of one node plus the evolution clock and its private RNG.
/// Keeping channel randomness in its own stream means measurement noise never
/// perturbs the channel trajectory.
class LinkState {
 public:
  LinkState(Environment env, std::uint64_t seed);

  const Environment& env() const { return env_; }
  const PathSet& si() const { return si_; }
  const PathSet& soi() const { return soi_; }
  std::int64_t time_ns() const { return time_ns_; }
  double time_s() const { return static_cast<double>(time_ns_) * 1e-9; }

  /// Advance the clock, applying one evolve step per crossed step boundary.
  void advance_ns(std::int64_t dt_ns);
  void advance_to_ns(std::int64_t t_ns);

 private:
  Environment env_;
  Rng rng_;
  PathSet si_;
  PathSet soi_;
  std::int64_t time_ns_ = 0;
  std::int64_t step_ns_;
};

}  // namespace mrafd::channel
