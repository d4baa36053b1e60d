#pragma once

// The calibrated experiment pipeline. Each stage writes its artifacts into
// the output directory; every artifact carries the scenario's config hash.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrafd/antenna.hpp"
#include "mrafd/heuristic.hpp"
#include "mrafd/metrics.hpp"
#include "mrafd/scenario.hpp"

namespace mrafd::pipeline {

namespace fs = std::filesystem;
using scenario::ScenarioConfig;

/// Loads the configured bank file. A missing file throws std::runtime_error
/// telling the user to run build-bank; a bank built from a different
/// geometry is rejected as well.
antenna::PatternBank load_bank(const ScenarioConfig& config);

struct NamedSet {
  std::string name;
  std::vector<int> members;
};

/// "full" plus one "budget-<n>" set per configured budget.
std::vector<NamedSet> derive_sets(const ScenarioConfig& config, const heuristic::SuppressionProfile& profile);

heuristic::SuppressionProfile run_profile(const ScenarioConfig& config, const antenna::PatternBank& bank);

struct Selection {
  /// Passive suppression of the pattern in use at each sample (dB).
  std::vector<double> suppression_db;
  /// SOI power through that pattern at each sample (linear).
  std::vector<double> soi_power;
};

/// Samples the SIR-selected pattern's suppression over time with training at
/// every retrain period (noise from noise_seed, channel from channel_seed).
/// An empty pattern set tracks the omni antenna instead.
Selection track_selection(const channel::Environment& env, const antenna::PatternBank& bank,
                          const protocol::TrainingFrameSpec& spec, const ImpairmentConfig& imp,
                          double duration_s, double sample_step_s, double retrain_period_s,
                          std::uint64_t channel_seed, std::uint64_t noise_seed);

struct EvaluationResult {
  std::vector<double> omni_db;
  std::map<std::string, std::vector<double>> set_db;
  std::vector<metrics::SoiLossRecord> soi_loss;
  std::vector<std::string> soi_loss_orientation;
};

EvaluationResult run_evaluation(const ScenarioConfig& config, const antenna::PatternBank& bank,
                                const std::vector<NamedSet>& sets);

std::vector<metrics::SweepRow> run_sweep(const ScenarioConfig& config, const antenna::PatternBank& bank,
                                         const std::vector<NamedSet>& sets);

struct SessionRows {
  std::vector<metrics::ResidualRow> residual;
  std::vector<metrics::RateRow> rates;
  /// JSON report of the full set at the configured transmit power.
  nlohmann::json report;
  std::vector<phy::FrameTrace> trace;
};

SessionRows run_sessions(const ScenarioConfig& config, const antenna::PatternBank& bank,
                         const std::vector<NamedSet>& sets);

/// Runs every stage and writes all artifacts plus summary.json and
/// manifest.json into the output directory. Returns the summary.
nlohmann::json run_all(const ScenarioConfig& config, const antenna::PatternBank& bank,
                       const fs::path& out_dir);

/// Checks that every artifact in out_dir carries the config's hash and writes
/// manifest.json. Throws std::runtime_error naming the first mismatching file.
nlohmann::json write_manifest(const ScenarioConfig& config, const fs::path& out_dir);

/// Artifact names written by run_all (excluding manifest.json).
std::vector<std::string> artifact_names(const ScenarioConfig& config);

/// Reads the embedded hash of a CSV, pattern-set or JSON artifact.
std::string artifact_hash(const fs::path& file);

void write_pattern_set_file(const fs::path& file, const std::string& config_hash, const std::vector<int>& members);
void write_json_file(const fs::path& file, const nlohmann::json& j);

}  // namespace mrafd::pipeline
