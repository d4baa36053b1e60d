#pragma once

// OFDM data frames over the two-link channel: y = h^I * (x^I + z^T) +
// h^S * (x^S + z^T) + z^R, least-squares channel estimates from the frame
// preamble, digital SI cancellation, EVM-based SNR and rates.

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mrafd/antenna.hpp"
#include "mrafd/channel.hpp"
#include "mrafd/impairments.hpp"
#include "mrafd/protocol.hpp"
#include "mrafd/rng.hpp"

namespace mrafd::phy {

inline constexpr int kSubcarriers = 64;

enum class Constellation { Qpsk, Qam16, Qam64 };

std::string to_string(Constellation c);
Constellation parse_constellation(const std::string& s);
int bits_per_symbol(Constellation c);
/// Square QAM alphabet scaled to unit average energy.
std::vector<cdouble> constellation_points(Constellation c);
std::vector<cdouble> random_symbols(Constellation c, std::size_t n, Rng& rng);

struct OfdmConfig {
  int n_subcarriers = kSubcarriers;
  int cp_len = 16;
  Constellation constellation = Constellation::Qpsk;
  /// Data symbols per frame (M).
  int n_symbols = 20;
  /// Frames per session (N).
  int n_frames = 50;
  /// Preamble symbols per frame; must be even so the two nodes' covers are orthogonal.
  int n_training = 2;

  int symbol_samples() const { return n_subcarriers + cp_len; }
  int frame_symbols() const { return n_training + n_symbols; }
  std::size_t frame_samples() const {
    return static_cast<std::size_t>(frame_symbols()) * static_cast<std::size_t>(symbol_samples());
  }
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// The two ends of the link. Both send the same preamble symbol; node B
/// flips the sign on every other repetition so a receiver hearing both can
/// separate the two channels.
enum class Node { A, B };

/// Constant-amplitude preamble symbol (unit modulus on every subcarrier).
std::vector<cdouble> preamble_symbol(int n_subcarriers);

/// n_training x K grid (symbol-major) of a node's preamble including its cover.
std::vector<cdouble> preamble_grid(const OfdmConfig& config, Node node);

struct OfdmFrame {
  int n_subcarriers = kSubcarriers;
  int n_training = 0;
  int n_data = 0;
  /// (n_training + n_data) x K, symbol-major.
  std::vector<cdouble> freq_symbols;
  std::vector<cdouble> time_samples;

  std::span<const cdouble> training() const;
  std::span<const cdouble> data() const;
};

/// Preamble then payload, per-symbol unitary IDFT plus cyclic prefix.
/// A short payload is zero-padded; more than K x M symbols throws.
OfdmFrame modulate_frame(std::span<const cdouble> payload, const OfdmConfig& config, Node node);

/// Strips the cyclic prefixes and returns n_symbols x K frequency symbols.
std::vector<cdouble> demodulate(std::span<const cdouble> time_samples, const OfdmConfig& config,
                                int n_symbols);

/// Received samples for the frames sent by this node (x_si) and the peer
/// (x_soi), both unit-power waveforms scaled to imp.tx_power. An empty span
/// means that node is silent. Linear convolution; samples before the frame
/// are zero. Throws std::invalid_argument if a channel has more than
/// cp_len + 1 taps.
std::vector<cdouble> apply_link(std::span<const cdouble> x_si, std::span<const cdouble> x_soi,
                                const channel::ChannelRealization& h_si,
                                const channel::ChannelRealization& h_soi,
                                const ImpairmentConfig& imp, const OfdmConfig& config, Rng& rng);

struct ChannelEstimate {
  std::vector<cdouble> h_hat;
  int source_frames = 0;
};

/// Per-subcarrier LS: mean over preamble symbols of Y / X.
ChannelEstimate estimate_channel(std::span<const cdouble> rx_preamble,
                                 std::span<const cdouble> known_preamble, const OfdmConfig& config);

/// Frequency response sum_d h_d exp(-j 2 pi k d / K) of a tap vector.
std::vector<cdouble> frequency_response(std::span<const cdouble> taps, int n_subcarriers);

struct CancellationResult {
  std::vector<cdouble> residual_freq;
  double pre_cancel_si_power = 0.0;
  double post_cancel_si_power = 0.0;
  double dc_gain_db = 0.0;
};

/// residual = Y - H_hat X on every subcarrier whose |H_hat|^2 exceeds
/// detect_power; others pass through untouched.
CancellationResult digital_cancel(std::span<const cdouble> y, const ChannelEstimate& est,
                                  std::span<const cdouble> x_si, double detect_power = 0.0);

/// Zero-forcing: symbol-major grid divided by the estimate per subcarrier.
std::vector<cdouble> equalize(std::span<const cdouble> y, const ChannelEstimate& est);

/// SNR = 1 / EVM^2, with EVM = rms(received - reference) / rms(reference).
/// +infinity when received equals reference. Throws on empty or mismatched input.
double compute_evm_snr(std::span<const cdouble> received, std::span<const cdouble> reference);

struct RateReport {
  double r_fd = 0.0;
  double r_hd = 0.0;
  double gain_percent = 0.0;
  std::vector<double> per_subcarrier_sinr;
};

/// r_fd = mean log2(1 + SINR), r_hd = mean 0.5 log2(1 + SNR).
RateReport compute_rates(std::span<const double> sinr, std::span<const double> snr);

enum class HdAntenna { Reselected, Omni };
std::string to_string(HdAntenna a);
HdAntenna parse_hd_antenna(const std::string& s);

struct SessionOptions {
  OfdmConfig ofdm;
  double frame_spacing_s = 10e-3;
  HdAntenna hd_antenna = HdAntenna::Reselected;
  /// Cancel a subcarrier only when |H_hat|^2 exceeds this many times the LS
  /// error variance of the estimate.
  double dc_detect_factor = 10.0;
};

struct FrameTrace {
  double time_s = 0.0;
  int pattern = 0;
  int hd_pattern = 0;
  double passive_db = 0.0;
  double pre_dbm = 0.0;
  double post_dbm = 0.0;
  double sinr_db = 0.0;
  double snr_db = 0.0;
};

struct SessionResult {
  double tx_power_dbm = 0.0;
  double passive_db = 0.0;
  double dc_gain_db = 0.0;
  double total_db = 0.0;
  int trainings = 0;
  RateReport rates;
  /// Aggregate over the SI-only frames; residual grid of the last one.
  CancellationResult cancellation;
  std::vector<FrameTrace> trace;
};

/// Data frames at frame_spacing_s with pattern training per the policy. For
/// every frame slot three frames run on the same channel state: full duplex
/// (both nodes), SI only (peer silent) for the cancellation figures, and the
/// half-duplex baseline (this node silent) on an independent replica of the
/// channel trajectory.
SessionResult run_full_duplex_session(const channel::Environment& env,
                                      const antenna::PatternBank& bank,
                                      std::span<const int> pattern_set,
                                      const protocol::RetrainingPolicy& policy,
                                      const SessionOptions& options, const ImpairmentConfig& imp,
                                      std::uint64_t seed);

}  // namespace mrafd::phy
