#include "mrafd/phy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mrafd/dft.hpp"

namespace mrafd::phy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t usize(int v) { return static_cast<std::size_t>(v); }

}  // namespace

std::string to_string(Constellation c) {
  switch (c) {
    case Constellation::Qpsk: return "qpsk";
    case Constellation::Qam16: return "qam16";
    case Constellation::Qam64: return "qam64";
  }
  return "?";
}

Constellation parse_constellation(const std::string& s) {
  if (s == "qpsk") return Constellation::Qpsk;
  if (s == "qam16") return Constellation::Qam16;
  if (s == "qam64") return Constellation::Qam64;
  throw std::invalid_argument("unknown constellation '" + s + "' (qpsk, qam16, qam64)");
}

int bits_per_symbol(Constellation c) {
  switch (c) {
    case Constellation::Qpsk: return 2;
    case Constellation::Qam16: return 4;
    case Constellation::Qam64: return 6;
  }
  return 0;
}

std::vector<cdouble> constellation_points(Constellation c) {
  const int side = 1 << (bits_per_symbol(c) / 2);
  std::vector<cdouble> pts;
  pts.reserve(usize(side * side));
  double energy = 0.0;
  for (int i = 0; i < side; ++i)
    for (int q = 0; q < side; ++q) {
      const cdouble p(2.0 * i - (side - 1), 2.0 * q - (side - 1));
      pts.push_back(p);
      energy += std::norm(p);
    }
  const double scale = 1.0 / std::sqrt(energy / static_cast<double>(pts.size()));
  for (auto& p : pts) p *= scale;
  return pts;
}

std::vector<cdouble> random_symbols(Constellation c, std::size_t n, Rng& rng) {
  const auto pts = constellation_points(c);
  std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
  std::vector<cdouble> out(n);
  for (auto& s : out) s = pts[pick(rng)];
  return out;
}

void OfdmConfig::validate() const {
  auto bad = [](const std::string& msg) { throw std::invalid_argument("ofdm: " + msg); };
  if (n_subcarriers != kSubcarriers) bad("n_subcarriers must be 64");
  if (cp_len < 0 || cp_len >= n_subcarriers) bad("cp_len must lie in [0, n_subcarriers)");
  if (n_symbols <= 0) bad("n_symbols must be positive");
  if (n_frames <= 0) bad("n_frames must be positive");
  if (n_training <= 0 || n_training % 2 != 0) bad("n_training must be a positive even number");
}

std::vector<cdouble> preamble_symbol(int n_subcarriers) {
  return protocol::training_sequence(n_subcarriers);
}

std::vector<cdouble> preamble_grid(const OfdmConfig& config, Node node) {
  const auto p = preamble_symbol(config.n_subcarriers);
  std::vector<cdouble> grid;
  grid.reserve(usize(config.n_training * config.n_subcarriers));
  for (int t = 0; t < config.n_training; ++t) {
    const double cover = (node == Node::B && t % 2 == 1) ? -1.0 : 1.0;
    for (const auto& v : p) grid.push_back(cover * v);
  }
  return grid;
}

std::span<const cdouble> OfdmFrame::training() const {
  return std::span<const cdouble>(freq_symbols).first(usize(n_training * n_subcarriers));
}

std::span<const cdouble> OfdmFrame::data() const {
  return std::span<const cdouble>(freq_symbols).subspan(usize(n_training * n_subcarriers));
}

OfdmFrame modulate_frame(std::span<const cdouble> payload, const OfdmConfig& config, Node node) {
  config.validate();
  const int k = config.n_subcarriers;
  const std::size_t capacity = usize(k * config.n_symbols);
  if (payload.size() > capacity)
    throw std::invalid_argument("modulate_frame: payload of " + std::to_string(payload.size()) +
                                " symbols exceeds the " + std::to_string(capacity) + "-symbol grid");
  OfdmFrame f;
  f.n_subcarriers = k;
  f.n_training = config.n_training;
  f.n_data = config.n_symbols;
  f.freq_symbols = preamble_grid(config, node);
  f.freq_symbols.insert(f.freq_symbols.end(), payload.begin(), payload.end());
  f.freq_symbols.resize(usize(config.frame_symbols() * k));

  UnitaryDft dft(usize(k));
  std::vector<cdouble> body(usize(k));
  const std::size_t sym = usize(config.symbol_samples());
  f.time_samples.resize(config.frame_samples());
  for (int s = 0; s < config.frame_symbols(); ++s) {
    dft.inverse(std::span<const cdouble>(f.freq_symbols).subspan(usize(s * k), usize(k)), body);
    auto* out = f.time_samples.data() + usize(s) * sym;
    std::copy(body.end() - config.cp_len, body.end(), out);
    std::copy(body.begin(), body.end(), out + config.cp_len);
  }
  return f;
}

std::vector<cdouble> demodulate(std::span<const cdouble> time_samples, const OfdmConfig& config,
                                int n_symbols) {
  const int k = config.n_subcarriers;
  const std::size_t sym = usize(config.symbol_samples());
  if (n_symbols < 0 || time_samples.size() < usize(n_symbols) * sym)
    throw std::invalid_argument("demodulate: not enough samples");
  UnitaryDft dft(usize(k));
  std::vector<cdouble> grid(usize(n_symbols * k));
  for (int s = 0; s < n_symbols; ++s) {
    dft.forward(time_samples.subspan(usize(s) * sym + usize(config.cp_len), usize(k)),
                std::span<cdouble>(grid).subspan(usize(s * k), usize(k)));
  }
  return grid;
}

std::vector<cdouble> apply_link(std::span<const cdouble> x_si, std::span<const cdouble> x_soi,
                                const channel::ChannelRealization& h_si,
                                const channel::ChannelRealization& h_soi,
                                const ImpairmentConfig& imp, const OfdmConfig& config, Rng& rng) {
  imp.validate();
  const std::size_t max_taps = usize(config.cp_len + 1);
  if ((!x_si.empty() && h_si.taps.size() > max_taps) || (!x_soi.empty() && h_soi.taps.size() > max_taps))
    throw std::invalid_argument("apply_link: channel has more taps than cp_len + 1");
  if (!x_si.empty() && !x_soi.empty() && x_si.size() != x_soi.size())
    throw std::invalid_argument("apply_link: frame lengths differ");
  const std::size_t n = std::max(x_si.size(), x_soi.size());

  const double amp = std::sqrt(imp.tx_power_mw());
  const double tx_noise_amp = std::sqrt(imp.tx_noise_mw());
  const double rx_noise_amp = std::sqrt(imp.rx_noise_mw());

  std::vector<cdouble> y(n);
  std::vector<cdouble> tx(n);
  auto add_path = [&](std::span<const cdouble> x, const channel::ChannelRealization& h) {
    if (x.empty()) return;
    for (std::size_t i = 0; i < n; ++i) {
      tx[i] = amp * x[i];
      if (tx_noise_amp > 0.0) tx[i] += tx_noise_amp * complex_normal(rng);
    }
    for (std::size_t i = 0; i < n; ++i) {
      cdouble acc{};
      const std::size_t dmax = std::min(h.taps.size(), i + 1);
      for (std::size_t d = 0; d < dmax; ++d) acc += h.taps[d] * tx[i - d];
      y[i] += acc;
    }
  };
  add_path(x_si, h_si);
  add_path(x_soi, h_soi);
  if (rx_noise_amp > 0.0)
    for (auto& v : y) v += rx_noise_amp * complex_normal(rng);
  return y;
}

ChannelEstimate estimate_channel(std::span<const cdouble> rx_preamble,
                                 std::span<const cdouble> known_preamble, const OfdmConfig& config) {
  const std::size_t k = usize(config.n_subcarriers);
  if (rx_preamble.size() != known_preamble.size() || rx_preamble.empty() || rx_preamble.size() % k != 0)
    throw std::invalid_argument("estimate_channel: preamble grids must be equal whole symbols");
  const std::size_t n_sym = rx_preamble.size() / k;
  ChannelEstimate est;
  est.h_hat.assign(k, cdouble{});
  est.source_frames = static_cast<int>(n_sym);
  for (std::size_t s = 0; s < n_sym; ++s)
    for (std::size_t i = 0; i < k; ++i) {
      const cdouble x = known_preamble[s * k + i];
      if (x == cdouble{}) throw std::invalid_argument("estimate_channel: zero-amplitude training subcarrier");
      est.h_hat[i] += rx_preamble[s * k + i] / x;
    }
  for (auto& h : est.h_hat) h /= static_cast<double>(n_sym);
  return est;
}

std::vector<cdouble> frequency_response(std::span<const cdouble> taps, int n_subcarriers) {
  std::vector<cdouble> h(usize(n_subcarriers));
  for (int k = 0; k < n_subcarriers; ++k) {
    cdouble acc{};
    for (std::size_t d = 0; d < taps.size(); ++d)
      acc += taps[d] * std::polar(1.0, -2.0 * M_PI * k * static_cast<double>(d) / n_subcarriers);
    h[usize(k)] = acc;
  }
  return h;
}

namespace {

double mean_norm(std::span<const cdouble> v) {
  double acc = 0.0;
  for (const auto& x : v) acc += std::norm(x);
  return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

}  // namespace

CancellationResult digital_cancel(std::span<const cdouble> y, const ChannelEstimate& est,
                                  std::span<const cdouble> x_si, double detect_power) {
  const std::size_t k = est.h_hat.size();
  if (k == 0 || y.size() != x_si.size() || y.size() % k != 0)
    throw std::invalid_argument("digital_cancel: grid dimensions disagree");
  CancellationResult r;
  r.residual_freq.assign(y.begin(), y.end());
  for (std::size_t i = 0; i < k; ++i) {
    if (!(std::norm(est.h_hat[i]) > detect_power)) continue;
    for (std::size_t s = 0; s < y.size() / k; ++s) r.residual_freq[s * k + i] -= est.h_hat[i] * x_si[s * k + i];
  }
  r.pre_cancel_si_power = mean_norm(y);
  r.post_cancel_si_power = mean_norm(r.residual_freq);
  r.dc_gain_db = 10.0 * std::log10(r.pre_cancel_si_power / r.post_cancel_si_power);
  return r;
}

std::vector<cdouble> equalize(std::span<const cdouble> y, const ChannelEstimate& est) {
  const std::size_t k = est.h_hat.size();
  if (k == 0 || y.size() % k != 0) throw std::invalid_argument("equalize: grid dimensions disagree");
  std::vector<cdouble> out(y.begin(), y.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= est.h_hat[i % k];
  return out;
}

double compute_evm_snr(std::span<const cdouble> received, std::span<const cdouble> reference) {
  if (received.empty() || received.size() != reference.size())
    throw std::invalid_argument("compute_evm_snr: inputs must be non-empty and equally long");
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < received.size(); ++i) {
    err += std::norm(received[i] - reference[i]);
    ref += std::norm(reference[i]);
  }
  if (err == 0.0) return kInf;
  return ref / err;
}

RateReport compute_rates(std::span<const double> sinr, std::span<const double> snr) {
  if (sinr.empty() || snr.empty()) throw std::invalid_argument("compute_rates: empty grid");
  auto mean_log = [](std::span<const double> g) {
    double acc = 0.0;
    for (double v : g) {
      if (v < 0.0 || std::isnan(v)) throw std::invalid_argument("compute_rates: negative or NaN entry");
      acc += std::log2(1.0 + v);
    }
    return acc / static_cast<double>(g.size());
  };
  RateReport r;
  r.r_fd = mean_log(sinr);
  r.r_hd = 0.5 * mean_log(snr);
  r.gain_percent = 100.0 * (r.r_fd / r.r_hd - 1.0);
  r.per_subcarrier_sinr.assign(sinr.begin(), sinr.end());
  return r;
}

std::string to_string(HdAntenna a) { return a == HdAntenna::Omni ? "omni" : "reselected"; }

HdAntenna parse_hd_antenna(const std::string& s) {
  if (s == "omni") return HdAntenna::Omni;
  if (s == "reselected") return HdAntenna::Reselected;
  throw std::invalid_argument("unknown hd antenna '" + s + "' (reselected, omni)");
}

namespace {

// One node's view of training plus the pattern in use.
struct Trainer {
  channel::LinkState state;
  protocol::RetrainingPolicy policy;
  Rng noise;
  std::int64_t next_train_ns = 0;
  int pattern = 0;
  int trainings = 0;
  bool soi_only = false;

  void maybe_train(const antenna::PatternBank& bank, const ImpairmentConfig& imp, std::int64_t t_ns) {
    const auto period_ns = static_cast<std::int64_t>(std::llround(policy.retrain_period_s * 1e9));
    while (next_train_ns <= t_ns) {
      state.advance_to_ns(std::max(state.time_ns(), next_train_ns));
      const auto sel = protocol::run_training(state, bank, policy.spec, imp, noise);
      if (soi_only) {
        // Half duplex has no SI to avoid: keep the strongest SOI.
        const auto best = std::max_element(
            sel.measurements.begin(), sel.measurements.end(), [](const auto& a, const auto& b) {
              return a.soi_power < b.soi_power ||
                     (a.soi_power == b.soi_power && a.pattern_index > b.pattern_index);
            });
        pattern = best->pattern_index;
      } else {
        pattern = sel.chosen_pattern;
      }
      next_train_ns += period_ns;
      ++trainings;
    }
    state.advance_to_ns(std::max(state.time_ns(), t_ns));
  }
};

// Per-subcarrier SNR from EVM over the data symbols of one frame.
void stream_snr(std::span<const cdouble> eq, std::span<const cdouble> ref, int k, int m,
                std::vector<double>& out_grid) {
  std::vector<cdouble> a(static_cast<std::size_t>(m)), b(static_cast<std::size_t>(m));
  for (int i = 0; i < k; ++i) {
    for (int s = 0; s < m; ++s) {
      a[usize(s)] = eq[usize(s * k + i)];
      b[usize(s)] = ref[usize(s * k + i)];
    }
    const double snr = compute_evm_snr(a, b);
    for (int s = 0; s < m; ++s) out_grid.push_back(snr);
  }
}

double grid_mean_db(std::span<const double> g, std::size_t first) {
  double acc = 0.0;
  for (std::size_t i = first; i < g.size(); ++i) acc += g[i];
  return 10.0 * std::log10(acc / static_cast<double>(g.size() - first));
}

}  // namespace

SessionResult run_full_duplex_session(const channel::Environment& env,
                                      const antenna::PatternBank& bank,
                                      std::span<const int> pattern_set,
                                      const protocol::RetrainingPolicy& policy,
                                      const SessionOptions& options, const ImpairmentConfig& imp,
                                      std::uint64_t seed) {
  const auto& cfg = options.ofdm;
  cfg.validate();
  imp.validate();
  env.validate();
  if (pattern_set.empty()) throw std::invalid_argument("session: empty pattern set");
  protocol::RetrainingPolicy pol = policy;
  pol.spec.pattern_set.assign(pattern_set.begin(), pattern_set.end());
  pol.validate();
  if (!(options.frame_spacing_s > 0.0)) throw std::invalid_argument("session: frame_spacing_s must be positive");

  const auto channel_seed = derive_seed(seed, {tag("channel")});
  Trainer fd{channel::LinkState(env, channel_seed), pol, Rng(derive_seed(seed, {tag("fd-train")}))};
  Trainer hd{channel::LinkState(env, channel_seed), pol, Rng(derive_seed(seed, {tag("hd-train")}))};
  hd.soi_only = true;
  Rng payload(derive_seed(seed, {tag("payload")}));
  Rng fd_noise(derive_seed(seed, {tag("fd-noise")}));
  Rng si_noise(derive_seed(seed, {tag("si-noise")}));
  Rng hd_noise(derive_seed(seed, {tag("hd-noise")}));

  const auto omni = antenna::omni_pattern(static_cast<int>(bank.bins()));
  const auto pre_a = preamble_grid(cfg, Node::A);
  const auto pre_b = preamble_grid(cfg, Node::B);
  const int k = cfg.n_subcarriers;
  const int m = cfg.n_symbols;
  const std::size_t data_len = usize(k * m);
  const double detect = options.dc_detect_factor * imp.rx_noise_mw() / cfg.n_training;
  const std::int64_t spacing_ns = std::llround(options.frame_spacing_s * 1e9);
  const channel::ChannelRealization none;

  SessionResult res;
  res.tx_power_dbm = imp.tx_power_dbm;
  std::vector<double> sinr_grid, snr_grid;
  sinr_grid.reserve(usize(cfg.n_frames) * data_len);
  snr_grid.reserve(usize(cfg.n_frames) * data_len);
  double passive_lin = 0.0, pre_sum = 0.0, post_sum = 0.0;

  auto split = [&](const std::vector<cdouble>& grid) {
    const std::span<const cdouble> g(grid);
    return std::pair{g.first(usize(cfg.n_training * k)), g.subspan(usize(cfg.n_training * k))};
  };

  for (int f = 0; f < cfg.n_frames; ++f) {
    const std::int64_t t = static_cast<std::int64_t>(f) * spacing_ns;
    fd.maybe_train(bank, imp, t);
    hd.maybe_train(bank, imp, t);

    const auto& pattern = bank[usize(fd.pattern)];
    const auto h_si = channel::realize_channel(fd.state.si(), pattern);
    const auto h_soi = channel::realize_channel(fd.state.soi(), pattern);
    const auto& hd_pattern = options.hd_antenna == HdAntenna::Omni ? omni : bank[usize(hd.pattern)];
    const auto h_soi_hd = channel::realize_channel(hd.state.soi(), hd_pattern);

    const auto frame_a = modulate_frame(random_symbols(cfg.constellation, data_len, payload), cfg, Node::A);
    const auto frame_b = modulate_frame(random_symbols(cfg.constellation, data_len, payload), cfg, Node::B);

    FrameTrace tr;
    tr.time_s = static_cast<double>(t) * 1e-9;
    tr.pattern = fd.pattern;
    tr.hd_pattern = options.hd_antenna == HdAntenna::Omni ? antenna::kOmni : hd.pattern;
    const double e_si = h_si.energy();
    passive_lin += e_si;
    tr.passive_db = e_si > 0.0 ? -10.0 * std::log10(e_si) : kInf;

    // Full duplex: both nodes transmit.
    {
      const auto y = apply_link(frame_a.time_samples, frame_b.time_samples, h_si, h_soi, imp, cfg, fd_noise);
      const auto grid = demodulate(y, cfg, cfg.frame_symbols());
      const auto [train, data] = split(grid);
      const auto est_i = estimate_channel(train, pre_a, cfg);
      const auto est_s = estimate_channel(train, pre_b, cfg);
      const auto dc = digital_cancel(data, est_i, frame_a.data(), detect);
      const auto eq = equalize(dc.residual_freq, est_s);
      const std::size_t first = sinr_grid.size();
      stream_snr(eq, frame_b.data(), k, m, sinr_grid);
      tr.sinr_db = grid_mean_db(sinr_grid, first);
    }
    // SI only: the peer stays silent.
    {
      const auto y = apply_link(frame_a.time_samples, {}, h_si, none, imp, cfg, si_noise);
      const auto grid = demodulate(y, cfg, cfg.frame_symbols());
      const auto [train, data] = split(grid);
      const auto est_i = estimate_channel(train, pre_a, cfg);
      res.cancellation = digital_cancel(data, est_i, frame_a.data(), detect);
      pre_sum += res.cancellation.pre_cancel_si_power;
      post_sum += res.cancellation.post_cancel_si_power;
      tr.pre_dbm = 10.0 * std::log10(res.cancellation.pre_cancel_si_power);
      tr.post_dbm = 10.0 * std::log10(res.cancellation.post_cancel_si_power);
    }
    // Half duplex: this node only listens.
    {
      const auto y = apply_link({}, frame_b.time_samples, none, h_soi_hd, imp, cfg, hd_noise);
      const auto grid = demodulate(y, cfg, cfg.frame_symbols());
      const auto [train, data] = split(grid);
      const auto est_s = estimate_channel(train, pre_b, cfg);
      const auto eq = equalize(data, est_s);
      const std::size_t first = snr_grid.size();
      stream_snr(eq, frame_b.data(), k, m, snr_grid);
      tr.snr_db = grid_mean_db(snr_grid, first);
    }
    res.trace.push_back(tr);
  }

  const double n = cfg.n_frames;
  res.passive_db = -10.0 * std::log10(passive_lin / n);
  res.cancellation.pre_cancel_si_power = pre_sum / n;
  res.cancellation.post_cancel_si_power = post_sum / n;
  res.cancellation.dc_gain_db = 10.0 * std::log10(pre_sum / post_sum);
  res.dc_gain_db = res.cancellation.dc_gain_db;
  res.total_db = imp.tx_power_dbm - 10.0 * std::log10(post_sum / n);
  res.trainings = fd.trainings;
  res.rates = compute_rates(sinr_grid, snr_grid);
  return res;
}

}  // namespace mrafd::phy
