#pragma once

// Reduced pattern sets: profile every pattern's passive suppression across a
// suite of environments and keep those that beat a threshold at least once.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mrafd/antenna.hpp"
#include "mrafd/channel.hpp"

namespace mrafd::heuristic {

struct RunMeta {
  std::string environment;
  std::string orientation;
  std::uint64_t seed = 0;
};

struct SuppressionProfile {
  /// Per pattern, the best (largest) suppression seen; +inf for a zero-energy hit.
  std::vector<double> max_suppression_db;
  std::vector<RunMeta> runs_meta;

  /// All entries -inf (nothing observed yet).
  static SuppressionProfile empty();

  /// Elementwise max; associative and order-independent in the values.
  void merge(const SuppressionProfile& other);
};

struct ThresholdSet {
  double threshold_db = 0.0;
  std::vector<int> members;
};

struct ProfilingOptions {
  double duration_s = 2.0;
  double sample_step_s = 1e-3;
};

/// One (environment, seed) run: suppression of every pattern at every time
/// sample, reduced to the per-pattern maximum.
SuppressionProfile profile_run(const channel::Environment& env, const antenna::PatternBank& bank,
                               const ProfilingOptions& options, std::uint64_t seed);

/// Every environment under every orientation; per-run seeds are derived from
/// the master seed, the environment index and the orientation.
SuppressionProfile collect_profiles(std::span<const channel::Environment> environments,
                                    std::span<const channel::Orientation> orientations,
                                    const antenna::PatternBank& bank,
                                    const ProfilingOptions& options, std::uint64_t master_seed);

/// { p : max_suppression_db[p] > threshold }, ascending.
ThresholdSet select_set(const SuppressionProfile& profile, double threshold_db);

/// (threshold, |select_set(threshold)|) for ascending thresholds.
std::vector<std::pair<double, int>> set_size_curve(const SuppressionProfile& profile,
                                                   std::span<const double> thresholds_db);

/// Largest set whose size does not exceed `budget`, searched over the
/// observed profile values.
ThresholdSet select_budget(const SuppressionProfile& profile, std::size_t budget);

/// CSV: pattern_index,max_suppression_db (4096 rows).
void write_profile_csv(std::ostream& out, const SuppressionProfile& profile);
SuppressionProfile read_profile_csv(std::istream& in);

/// Newline-delimited pattern indices.
void write_pattern_set(std::ostream& out, std::span<const int> members);
std::vector<int> read_pattern_set(std::istream& in);

}  // namespace mrafd::heuristic
