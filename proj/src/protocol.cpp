#include "mrafd/protocol.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "mrafd/simd.hpp"

namespace mrafd::protocol {

std::int64_t TrainingFrameSpec::segment_ns() const {
  return static_cast<std::int64_t>(std::llround(segment_samples() * 1e9 / sample_rate_hz));
}

void TrainingFrameSpec::validate() const {
  auto bad = [](const std::string& msg) { throw std::invalid_argument("training spec: " + msg); };
  if (!(sample_rate_hz > 0.0)) bad("sample_rate_hz must be positive");
  if (gap_samples < 0) bad("gap_samples must be >= 0");
  if (data_samples <= 0) bad("data_samples must be positive");
  if (data_samples != null_samples) bad("null_samples must equal data_samples");
  if (guard_samples < 0 || guard_samples >= data_samples)
    bad("guard_samples must lie in [0, data_samples)");
  if (gap_samples < guard_samples) bad("gap_samples must be >= guard_samples");
}

void RetrainingPolicy::validate() const {
  spec.validate();
  if (!(retrain_period_s > training_duration(spec)))
    throw std::invalid_argument("retraining policy: retrain_period_s must exceed the training duration");
}

std::vector<int> full_pattern_set() {
  std::vector<int> s(antenna::kConfigs);
  for (int i = 0; i < antenna::kConfigs; ++i) s[i] = i;
  return s;
}

double training_duration(const TrainingFrameSpec& spec) {
  return static_cast<double>(spec.pattern_set.size()) * spec.segment_samples() / spec.sample_rate_hz;
}

double estimate_rss(std::span<const std::complex<double>> samples) {
  if (samples.empty()) throw std::invalid_argument("estimate_rss: no samples");
  return simd::mean_power(samples);
}

std::vector<std::complex<double>> training_sequence(int n) {
  if (n <= 0) throw std::invalid_argument("training_sequence: length must be positive");
  // Zadoff-Chu with root 1: exp(-j pi n (n + (N mod 2)) / N).
  std::vector<std::complex<double>> z(static_cast<std::size_t>(n));
  const int odd = n % 2;
  for (int k = 0; k < n; ++k) {
    const double phase = -std::numbers::pi * static_cast<double>(k) * (k + odd) / n;
    z[static_cast<std::size_t>(k)] = std::polar(1.0, phase);
  }
  return z;
}

namespace {

// Burst start (segment-local sample) for a role.
int burst_start(const TrainingFrameSpec& spec, Role role) {
  return role == Role::Self ? spec.gap_samples : spec.gap_samples + spec.data_samples;
}

}  // namespace

std::vector<std::complex<double>> training_waveform(const TrainingFrameSpec& spec, Role role) {
  spec.validate();
  const int seg = spec.segment_samples();
  const int w = spec.window_samples();
  const auto z = training_sequence(w);
  std::vector<std::complex<double>> x(spec.pattern_set.size() * static_cast<std::size_t>(seg));
  const int start = burst_start(spec, role);
  for (std::size_t s = 0; s < spec.pattern_set.size(); ++s) {
    for (int n = 0; n < spec.data_samples; ++n) {
      const int k = ((n - spec.guard_samples) % w + w) % w;
      x[s * seg + start + n] = z[static_cast<std::size_t>(k)];
    }
  }
  return x;
}

SelectionResult run_training(channel::LinkState& state, const antenna::PatternBank& bank,
                             const TrainingFrameSpec& spec, const ImpairmentConfig& imp, Rng& rng) {
  spec.validate();
  imp.validate();
  for (int p : spec.pattern_set) {
    if (p < 0 || static_cast<std::size_t>(p) >= bank.size())
      throw std::out_of_range("training: pattern index " + std::to_string(p) + " outside bank");
  }
  if (state.si().max_delay() > spec.guard_samples || state.soi().max_delay() > spec.guard_samples)
    throw std::invalid_argument("training: channel delay spread exceeds guard_samples");

  const int seg = spec.segment_samples();
  const int win = spec.window_samples();
  const auto x_self = training_waveform(spec, Role::Self);
  const auto x_peer = training_waveform(spec, Role::Peer);

  const double tx_amp = std::sqrt(imp.tx_power_mw());
  const double tx_noise_amp = std::sqrt(imp.tx_noise_mw());
  const double rx_noise = imp.rx_noise_mw();
  const double rx_noise_amp = std::sqrt(rx_noise);
  const bool tx_noise_on = tx_noise_amp > 0.0;
  const bool rx_noise_on = rx_noise_amp > 0.0;

  SelectionResult result;
  result.measurements.reserve(spec.pattern_set.size());
  result.training_duration_s = training_duration(spec);

  const std::int64_t t0 = state.time_ns();
  const std::int64_t seg_ns = spec.segment_ns();
  std::vector<std::complex<double>> burst(static_cast<std::size_t>(spec.data_samples));
  std::vector<std::complex<double>> window(static_cast<std::size_t>(win));

  // Received window for one burst: y[n] = sum_d h_d (x[n-d] + z_T[n-d]) + z_R[n].
  auto receive = [&](const channel::ChannelRealization& h,
                     const std::vector<std::complex<double>>& x, std::size_t first) {
    for (int n = 0; n < spec.data_samples; ++n) {
      std::complex<double> v = tx_amp * x[first + static_cast<std::size_t>(n)];
      if (tx_noise_on) v += tx_noise_amp * complex_normal(rng);
      burst[static_cast<std::size_t>(n)] = v;
    }
    for (int n = 0; n < win; ++n) {
      const int m = spec.guard_samples + n;  // burst-local index of this sample
      std::complex<double> y{};
      for (std::size_t d = 0; d < h.taps.size(); ++d) y += h.taps[d] * burst[static_cast<std::size_t>(m) - d];
      if (rx_noise_on) y += rx_noise_amp * complex_normal(rng);
      window[static_cast<std::size_t>(n)] = y;
    }
    return estimate_rss(window);
  };

  for (std::size_t s = 0; s < spec.pattern_set.size(); ++s) {
    state.advance_to_ns(t0 + static_cast<std::int64_t>(s) * seg_ns);
    const int p = spec.pattern_set[s];
    const auto& pattern = bank[static_cast<std::size_t>(p)];
    const auto h_si = channel::realize_channel(state.si(), pattern);
    const auto h_soi = channel::realize_channel(state.soi(), pattern);
    const std::size_t base = s * static_cast<std::size_t>(seg);

    SegmentMeasurement m;
    m.pattern_index = p;
    m.si_power = std::max(receive(h_si, x_self, base + burst_start(spec, Role::Self)) - rx_noise, kRssFloor);
    m.soi_power = std::max(receive(h_soi, x_peer, base + burst_start(spec, Role::Peer)) - rx_noise, kRssFloor);
    m.sir_db = 10.0 * std::log10(m.soi_power / m.si_power);
    result.measurements.push_back(m);
  }
  state.advance_to_ns(t0 + static_cast<std::int64_t>(spec.pattern_set.size()) * seg_ns);

  if (!result.measurements.empty()) result.chosen_pattern = select_pattern(result.measurements);
  return result;
}

int select_pattern(std::span<const SegmentMeasurement> measurements) {
  if (measurements.empty()) throw std::invalid_argument("select_pattern: no measurements");
  const SegmentMeasurement* best = &measurements[0];
  for (const auto& m : measurements.subspan(1)) {
    if (m.sir_db > best->sir_db || (m.sir_db == best->sir_db && m.pattern_index < best->pattern_index))
      best = &m;
  }
  return best->pattern_index;
}

double compute_overhead(const RetrainingPolicy& policy) {
  policy.validate();
  const double t = training_duration(policy.spec);
  return t / (policy.retrain_period_s - t);
}

double period_for_overhead(const TrainingFrameSpec& spec, double overhead) {
  if (!(overhead > 0.0)) throw std::invalid_argument("period_for_overhead: overhead must be positive");
  const double t = training_duration(spec);
  return t + t / overhead;
}

std::vector<SweepPoint> retraining_sweep(const channel::Environment& env,
                                         const antenna::PatternBank& bank,
                                         const TrainingFrameSpec& spec,
                                         std::span<const double> periods_s,
                                         const SweepOptions& options, const ImpairmentConfig& imp,
                                         std::uint64_t channel_seed, std::uint64_t noise_seed) {
  if (spec.pattern_set.empty()) throw std::invalid_argument("retraining_sweep: empty pattern set");
  std::vector<SweepPoint> out;
  const auto step_ns = static_cast<std::int64_t>(std::llround(options.sample_step_s * 1e9));
  const auto samples = static_cast<std::int64_t>(std::llround(options.sim_duration_s / options.sample_step_s));
  for (double period : periods_s) {
    RetrainingPolicy policy{period, spec};
    policy.validate();
    const auto period_ns = static_cast<std::int64_t>(std::llround(period * 1e9));

    channel::LinkState state(env, channel_seed);
    Rng noise(noise_seed);
    std::int64_t next_train = 0;
    int pattern = -1;
    SweepPoint point{period, 0.0, 0};
    double acc = 0.0;
    std::int64_t counted = 0;
    for (std::int64_t i = 0; i < samples; ++i) {
      const std::int64_t t = i * step_ns;
      while (next_train <= t) {
        state.advance_to_ns(next_train);
        pattern = run_training(state, bank, spec, imp, noise).chosen_pattern;
        next_train += period_ns;
        ++point.trainings;
      }
      state.advance_to_ns(t);
      const double s = channel::passive_suppression_db(
          channel::realize_channel(state.si(), bank[static_cast<std::size_t>(pattern)]));
      if (std::isfinite(s)) {
        acc += s;
        ++counted;
      }
    }
    point.mean_suppression_db = counted > 0 ? acc / static_cast<double>(counted) : 0.0;
    out.push_back(point);
  }
  return out;
}

void write_selection_csv(std::ostream& out, const SelectionResult& result) {
  out << "pattern_index,si_db,soi_db,sir_db\n";
  char buf[128];
  for (const auto& m : result.measurements) {
    std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f,%.6f\n", m.pattern_index,
                  10.0 * std::log10(m.si_power), 10.0 * std::log10(m.soi_power), m.sir_db);
    out << buf;
  }
}

}  // namespace mrafd::protocol
