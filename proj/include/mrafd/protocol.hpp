#pragma once

// Pattern training (Gap / Data / Null segments), RSS estimation, SIR-based
// selection, re-training schedules and overhead accounting.

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mrafd/antenna.hpp"
#include "mrafd/channel.hpp"
#include "mrafd/impairments.hpp"
#include "mrafd/rng.hpp"

namespace mrafd::protocol {

/// Per-pattern segment: Gap (switch settling), Data (this node transmits,
/// peer silent), Null (this node silent, peer transmits). Each burst is a
/// cyclically extended constant-amplitude sequence; RSS is taken over the
/// last data_samples - guard_samples samples of each interval so the
/// multipath tail of the previous interval never leaks into the window.
struct TrainingFrameSpec {
  double sample_rate_hz = 40e6;
  int gap_samples = 20;
  int data_samples = 30;
  int null_samples = 30;
  int guard_samples = 8;
  std::vector<int> pattern_set;

  int segment_samples() const { return gap_samples + data_samples + null_samples; }
  int window_samples() const { return data_samples - guard_samples; }
  std::int64_t segment_ns() const;
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct SegmentMeasurement {
  int pattern_index = 0;
  double si_power = 0.0;
  double soi_power = 0.0;
  double sir_db = 0.0;
};

struct SelectionResult {
  int chosen_pattern = 0;
  std::vector<SegmentMeasurement> measurements;
  double training_duration_s = 0.0;
};

struct RetrainingPolicy {
  double retrain_period_s = 1.0;
  TrainingFrameSpec spec;

  void validate() const;
};

inline constexpr double kRssFloor = 1e-15;

std::vector<int> full_pattern_set();

/// L * segment_samples / sample_rate.
double training_duration(const TrainingFrameSpec& spec);

/// Mean |x|^2. Throws std::invalid_argument on empty input.
double estimate_rss(std::span<const std::complex<double>> samples);

/// Constant-amplitude sequence of length n with ideal periodic autocorrelation.
std::vector<std::complex<double>> training_sequence(int n);

enum class Role { Self, Peer };

/// Unit-power transmit waveform of one node over the whole training frame
/// (pattern_set.size() * segment_samples samples).
std::vector<std::complex<double>> training_waveform(const TrainingFrameSpec& spec, Role role);

/// Runs one training frame over the spec's pattern set. The link state keeps
/// evolving at segment boundaries. Measurement noise draws come from `rng`.
/// Throws std::out_of_range for a pattern index outside the bank.
SelectionResult run_training(channel::LinkState& state, const antenna::PatternBank& bank,
                             const TrainingFrameSpec& spec, const ImpairmentConfig& imp, Rng& rng);

/// argmax sir_db, ties to the lowest pattern index. Throws on empty input.
int select_pattern(std::span<const SegmentMeasurement> measurements);

/// T_train / (period - T_train).
double compute_overhead(const RetrainingPolicy& policy);

/// Re-training period that yields the given overhead for a spec.
double period_for_overhead(const TrainingFrameSpec& spec, double overhead);

struct SweepPoint {
  double period_s = 0.0;
  double mean_suppression_db = 0.0;
  int trainings = 0;
};

struct SweepOptions {
  double sim_duration_s = 5.0;
  /// Suppression sampling interval.
  double sample_step_s = 1e-3;
};

/// For every period, replays the same channel trajectory (seeded by
/// channel_seed) with training at each period boundary, and reports the
/// time-averaged passive suppression (dB) of the pattern in use.
std::vector<SweepPoint> retraining_sweep(const channel::Environment& env,
                                         const antenna::PatternBank& bank,
                                         const TrainingFrameSpec& spec,
                                         std::span<const double> periods_s,
                                         const SweepOptions& options, const ImpairmentConfig& imp,
                                         std::uint64_t channel_seed, std::uint64_t noise_seed);

/// CSV: pattern_index,si_db,soi_db,sir_db
void write_selection_csv(std::ostream& out, const SelectionResult& result);

}  // namespace mrafd::protocol
