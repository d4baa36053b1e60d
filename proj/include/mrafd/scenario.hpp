#pragma once

// Scenario configuration: one JSON document describing geometry,
// impairments, environments and every experiment knob. Missing keys take the
// calibrated defaults; unknown keys and wrong types are rejected with the
// offending field named.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrafd/antenna.hpp"
#include "mrafd/channel.hpp"
#include "mrafd/heuristic.hpp"
#include "mrafd/impairments.hpp"
#include "mrafd/phy.hpp"
#include "mrafd/protocol.hpp"

namespace mrafd::scenario {

using nlohmann::json;

struct ProfilingConfig {
  /// Empty means the default suite generated from the master seed.
  std::vector<channel::Environment> environments;
  int default_count = 16;
  std::vector<channel::Orientation> orientations = {
      channel::Orientation::Opposite, channel::Orientation::FaceToFace,
      channel::Orientation::SideToSideLeft, channel::Orientation::SideToSideRight};
  heuristic::ProfilingOptions options;
};

struct EvaluationConfig {
  int held_out_count = 20;
  double duration_s = 0.5;
  double retrain_period_s = 0.1;
  double sample_step_s = 0.01;
  std::vector<double> tx_powers_dbm = {-10.0, -5.0, 0.0, 5.0, 10.0};
};

struct SweepConfig {
  std::vector<double> periods_s = {0.02, 0.05, 0.1, 0.2, 0.5, 1.0};
  int environments = 3;
  double sim_duration_s = 3.0;
  double sample_step_s = 1e-3;
  double tx_power_dbm = 5.0;
  double semi_static_rho = channel::kSemiStaticRho;
  double dynamic_rho = channel::kDynamicRho;
};

struct SessionConfig {
  std::vector<double> tx_powers_dbm = {-10.0, -5.0, 0.0, 5.0, 10.0};
  double retrain_period_s = 1.0;
  int runs = 3;
  phy::SessionOptions options;
};

struct ScenarioConfig {
  std::uint64_t master_seed = 20170;
  std::string output_dir = "out";
  /// Empty means <output_dir>/bank.bin.
  std::string bank_path;
  antenna::ArrayGeometry geometry = antenna::ArrayGeometry::defaults();
  ImpairmentConfig impairments;
  protocol::TrainingFrameSpec training;
  /// Template every generated environment starts from; also the session environment.
  channel::Environment environment;
  ProfilingConfig profiling;
  std::vector<double> thresholds_db;
  std::vector<int> set_budgets = {1000, 300};
  EvaluationConfig evaluation;
  SweepConfig sweep;
  SessionConfig session;

  ScenarioConfig();

  std::filesystem::path bank_file() const;
  /// Profiling environments with the default suite expanded.
  std::vector<channel::Environment> profiling_environments() const;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

json to_json(const ScenarioConfig& config);
/// Throws std::invalid_argument naming the offending field.
ScenarioConfig from_json(const json& j);
ScenarioConfig load_config(const std::filesystem::path& path);

/// FNV-1a over the canonical (sorted-key) JSON dump, as 16 hex digits.
std::string config_hash(const ScenarioConfig& config);

json environment_to_json(const channel::Environment& env);
channel::Environment environment_from_json(const json& j, const channel::Environment& base,
                                           const std::string& where);

/// Default profiling suite: rooms differing in reflector count, leakage and
/// reflection levels, every fourth with the inter-node LOS blocked.
std::vector<channel::Environment> default_profiling_environments(const channel::Environment& base,
                                                                 std::uint64_t master_seed, int count);

/// Held-out rooms drawn like the profiling suite but from a separate seed
/// stream, with the peer at a uniformly random azimuth.
std::vector<channel::Environment> held_out_environments(const channel::Environment& base,
                                                        std::uint64_t master_seed, int count);

}  // namespace mrafd::scenario
