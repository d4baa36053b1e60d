#include "mrafd/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mrafd/phy.hpp"
#include "mrafd/protocol.hpp"
#include "mrafd/rng.hpp"

namespace mrafd::pipeline {

using nlohmann::json;

antenna::PatternBank load_bank(const ScenarioConfig& config) {
  const auto path = config.bank_file();
  if (!fs::exists(path))
    throw std::runtime_error("pattern bank " + path.string() +
                             " not found; run `mrafd build-bank` with the same config first");
  auto bank = antenna::load_bank(path);
  if (!(bank.geometry() == config.geometry))
    throw std::runtime_error("pattern bank " + path.string() +
                             " was built from a different geometry; rerun `mrafd build-bank`");
  return bank;
}

std::vector<NamedSet> derive_sets(const ScenarioConfig& config, const heuristic::SuppressionProfile& profile) {
  std::vector<NamedSet> sets{{"full", protocol::full_pattern_set()}};
  for (int b : config.set_budgets)
    sets.push_back({"budget-" + std::to_string(b), heuristic::select_budget(profile, static_cast<std::size_t>(b)).members});
  return sets;
}

heuristic::SuppressionProfile run_profile(const ScenarioConfig& config, const antenna::PatternBank& bank) {
  const auto envs = config.profiling_environments();
  return heuristic::collect_profiles(envs, config.profiling.orientations, bank, config.profiling.options,
                                     config.master_seed);
}

Selection track_selection(const channel::Environment& env, const antenna::PatternBank& bank,
                          const protocol::TrainingFrameSpec& spec, const ImpairmentConfig& imp,
                          double duration_s, double sample_step_s, double retrain_period_s,
                          std::uint64_t channel_seed, std::uint64_t noise_seed) {
  channel::LinkState state(env, channel_seed);
  Rng noise(noise_seed);
  const auto omni = antenna::omni_pattern(static_cast<int>(bank.bins()));
  const bool use_omni = spec.pattern_set.empty();
  const auto step_ns = static_cast<std::int64_t>(std::llround(sample_step_s * 1e9));
  const auto period_ns = static_cast<std::int64_t>(std::llround(retrain_period_s * 1e9));
  const auto samples = std::max<std::int64_t>(1, std::llround(duration_s / sample_step_s));
  Selection out;
  std::int64_t next_train = 0;
  int pattern = 0;
  for (std::int64_t i = 0; i < samples; ++i) {
    const std::int64_t t = i * step_ns;
    while (!use_omni && next_train <= t) {
      state.advance_to_ns(std::max(state.time_ns(), next_train));
      pattern = protocol::run_training(state, bank, spec, imp, noise).chosen_pattern;
      next_train += period_ns;
    }
    state.advance_to_ns(std::max(state.time_ns(), t));
    const auto& p = use_omni ? omni : bank[static_cast<std::size_t>(pattern)];
    out.suppression_db.push_back(channel::passive_suppression_db(channel::realize_channel(state.si(), p)));
    out.soi_power.push_back(channel::realize_channel(state.soi(), p).energy());
  }
  return out;
}

namespace {

std::vector<double> finite(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !std::isfinite(x); }), v.end());
  return v;
}

double mean_of(const std::vector<double>& v) { return metrics::mean(finite(v)); }

double mean_linear(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

protocol::TrainingFrameSpec spec_for(const ScenarioConfig& c, const std::vector<int>& members) {
  auto s = c.training;
  s.pattern_set = members;
  return s;
}

std::uint64_t idx(std::size_t i) { return static_cast<std::uint64_t>(i); }

}  // namespace

EvaluationResult run_evaluation(const ScenarioConfig& config, const antenna::PatternBank& bank,
                                const std::vector<NamedSet>& sets) {
  const auto& ev = config.evaluation;
  const auto envs = scenario::held_out_environments(config.environment, config.master_seed, ev.held_out_count);
  EvaluationResult res;
  for (std::size_t e = 0; e < envs.size(); ++e) {
    const auto channel_seed = derive_seed(config.master_seed, {tag("eval-channel"), idx(e)});
    for (std::size_t p = 0; p < ev.tx_powers_dbm.size(); ++p) {
      ImpairmentConfig imp = config.impairments;
      imp.tx_power_dbm = ev.tx_powers_dbm[p];
      const auto omni = track_selection(envs[e], bank, spec_for(config, {}), imp, ev.duration_s, ev.sample_step_s,
                                        ev.retrain_period_s, channel_seed, 0);
      res.omni_db.insert(res.omni_db.end(), omni.suppression_db.begin(), omni.suppression_db.end());
      for (std::size_t s = 0; s < sets.size(); ++s) {
        const auto noise_seed = derive_seed(config.master_seed, {tag("eval-noise"), idx(e), idx(p), idx(s)});
        const auto sel = track_selection(envs[e], bank, spec_for(config, sets[s].members), imp, ev.duration_s,
                                         ev.sample_step_s, ev.retrain_period_s, channel_seed, noise_seed);
        auto& dst = res.set_db[sets[s].name];
        dst.insert(dst.end(), sel.suppression_db.begin(), sel.suppression_db.end());
      }
    }
  }

  // SOI power loss: same rooms with the peer placed at each named
  // orientation, full bank, one training per room.
  const channel::Orientation orients[] = {channel::Orientation::Opposite, channel::Orientation::FaceToFace,
                                          channel::Orientation::SideToSideLeft,
                                          channel::Orientation::SideToSideRight};
  for (auto o : orients) {
    for (std::size_t e = 0; e < envs.size(); ++e) {
      auto env = envs[e];
      env.orientation = o;
      env.peer_azimuth_rad.reset();
      const auto channel_seed = derive_seed(config.master_seed, {tag("soi-loss"), idx(e)});
      const auto noise_seed = derive_seed(config.master_seed, {tag("soi-loss-noise"), idx(e), static_cast<std::uint64_t>(o)});
      const auto mra = track_selection(env, bank, spec_for(config, sets.front().members), config.impairments,
                                       ev.sample_step_s, ev.sample_step_s, ev.retrain_period_s, channel_seed, noise_seed);
      const auto omni = track_selection(env, bank, spec_for(config, {}), config.impairments, ev.sample_step_s,
                                        ev.sample_step_s, ev.retrain_period_s, channel_seed, 0);
      res.soi_loss.push_back(metrics::soi_power_loss({env.name, channel_seed, mean_linear(mra.soi_power)},
                                                     {env.name, channel_seed, mean_linear(omni.soi_power)}));
      res.soi_loss_orientation.push_back(channel::to_string(o));
    }
  }
  return res;
}

std::vector<metrics::SweepRow> run_sweep(const ScenarioConfig& config, const antenna::PatternBank& bank,
                                         const std::vector<NamedSet>& sets) {
  const auto& sw = config.sweep;
  const auto envs = config.profiling_environments();
  ImpairmentConfig imp = config.impairments;
  imp.tx_power_dbm = sw.tx_power_dbm;
  protocol::SweepOptions opts{sw.sim_duration_s, sw.sample_step_s};
  std::vector<metrics::SweepRow> rows;
  const std::pair<const char*, double> dynamics[] = {{"semi-static", sw.semi_static_rho}, {"dynamic", sw.dynamic_rho}};
  for (const auto& [label, rho] : dynamics) {
    for (int e = 0; e < std::min<int>(sw.environments, static_cast<int>(envs.size())); ++e) {
      auto env = envs[static_cast<std::size_t>(e)];
      env.dynamics_rho = rho;
      env.name = std::string(label) + "/" + env.name;
      const auto channel_seed = derive_seed(config.master_seed, {tag("sweep-channel"), idx(static_cast<std::size_t>(e))});
      for (std::size_t s = 0; s < sets.size(); ++s) {
        const auto spec = spec_for(config, sets[s].members);
        const double t_train = protocol::training_duration(spec);
        std::vector<double> periods;
        for (double p : sw.periods_s)
          if (p > t_train) periods.push_back(p);
        const auto noise_seed = derive_seed(config.master_seed, {tag("sweep-noise"), idx(static_cast<std::size_t>(e)), idx(s)});
        const auto points = protocol::retraining_sweep(env, bank, spec, periods, opts, imp, channel_seed, noise_seed);
        for (const auto& pt : points) {
          const double overhead = protocol::compute_overhead({pt.period_s, spec});
          rows.push_back({env.name, sets[s].name, pt.period_s, overhead, pt.mean_suppression_db, pt.trainings});
        }
      }
    }
  }
  return rows;
}

SessionRows run_sessions(const ScenarioConfig& config, const antenna::PatternBank& bank,
                         const std::vector<NamedSet>& sets) {
  const auto& ss = config.session;
  SessionRows out;
  for (const auto& set : sets) {
    const protocol::RetrainingPolicy policy{ss.retrain_period_s, config.training};
    for (double power : ss.tx_powers_dbm) {
      ImpairmentConfig imp = config.impairments;
      imp.tx_power_dbm = power;
      double pre = 0.0, post = 0.0, passive = 0.0, r_fd = 0.0, r_hd = 0.0;
      for (int run = 0; run < ss.runs; ++run) {
        const auto seed = derive_seed(config.master_seed, {tag("session"), static_cast<std::uint64_t>(run)});
        const auto r = phy::run_full_duplex_session(config.environment, bank, set.members, policy, ss.options, imp, seed);
        pre += r.cancellation.pre_cancel_si_power;
        post += r.cancellation.post_cancel_si_power;
        passive += std::pow(10.0, -r.passive_db / 10.0);
        r_fd += r.rates.r_fd;
        r_hd += r.rates.r_hd;
        if (run == 0 && set.name == "full" && power == config.impairments.tx_power_dbm) out.trace = r.trace;
      }
      const double n = ss.runs;
      metrics::ResidualRow rr;
      rr.set_name = set.name;
      rr.tx_power_dbm = power;
      rr.pre_dc_dbm = 10.0 * std::log10(pre / n);
      rr.post_dc_dbm = 10.0 * std::log10(post / n);
      rr.passive_db = -10.0 * std::log10(passive / n);
      rr.dc_gain_db = rr.pre_dc_dbm - rr.post_dc_dbm;
      rr.total_db = power - rr.post_dc_dbm;
      out.residual.push_back(rr);
      metrics::RateRow rate{set.name, power, r_fd / n, r_hd / n, 100.0 * (r_fd / r_hd - 1.0)};
      out.rates.push_back(rate);
      if (set.name == "full" && power == config.impairments.tx_power_dbm) {
        out.report = {{"tx_power_dbm", power},          {"passive_db", rr.passive_db},
                      {"dc_gain_db", rr.dc_gain_db},    {"total_db", rr.total_db},
                      {"r_fd", rate.r_fd},              {"r_hd", rate.r_hd},
                      {"gain_percent", rate.gain_percent}};
      }
    }
  }
  return out;
}

void write_pattern_set_file(const fs::path& file, const std::string& config_hash, const std::vector<int>& members) {
  std::ofstream out(file);
  metrics::write_hash_line(out, config_hash);
  heuristic::write_pattern_set(out, members);
  if (!out) throw std::runtime_error("cannot write " + file.string());
}

void write_json_file(const fs::path& file, const json& j) {
  std::ofstream out(file);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write " + file.string());
}

namespace {

template <class Fn>
void write_text(const fs::path& file, Fn&& fn) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  fn(out);
  if (!out) throw std::runtime_error("cannot write " + file.string());
}

// Rounded so the summary stays readable and byte-stable.
double r3(double v) { return std::round(v * 1000.0) / 1000.0; }

}  // namespace

std::vector<std::string> artifact_names(const ScenarioConfig& config) {
  std::vector<std::string> names = {"profile.csv", "fig8_curve.csv"};
  for (int b : config.set_budgets) names.push_back("set_budget-" + std::to_string(b) + ".txt");
  for (const char* n : {"fig5_cdf.csv", "held_out.csv", "soi_loss.csv", "fig10_sweep.csv", "fig11_residual.csv",
                        "fig12_rates.csv", "session.json", "session_trace.csv", "summary.json"})
    names.emplace_back(n);
  return names;
}

json run_all(const ScenarioConfig& config, const antenna::PatternBank& bank, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const auto hash = scenario::config_hash(config);
  json summary;
  summary["config_hash"] = hash;
  summary["master_seed"] = config.master_seed;

  // Profiling and reduced sets.
  const auto profile = run_profile(config, bank);
  write_text(out_dir / "profile.csv", [&](std::ostream& o) {
    metrics::write_hash_line(o, hash);
    heuristic::write_profile_csv(o, profile);
  });
  const auto curve = heuristic::set_size_curve(profile, config.thresholds_db);
  write_text(out_dir / "fig8_curve.csv", [&](std::ostream& o) { metrics::write_fig8_curve(o, hash, curve); });
  const auto sets = derive_sets(config, profile);
  for (const auto& s : sets) {
    if (s.name == "full") continue;
    write_pattern_set_file(out_dir / ("set_" + s.name + ".txt"), hash, s.members);
    summary["sets"][s.name] = {{"size", s.members.size()},
                               {"threshold_db", r3(heuristic::select_budget(profile, s.members.size()).threshold_db)}};
  }
  for (double x : {52.0, 58.0})
    summary["threshold_counts"][metrics::fmt(x, 0)] = heuristic::select_set(profile, x).members.size();

  // Held-out evaluation (passive suppression CDF, set gaps, SOI loss).
  const auto ev = run_evaluation(config, bank, sets);
  const auto omni_cdf = metrics::empirical_cdf(finite(ev.omni_db));
  const auto mra_cdf = metrics::empirical_cdf(finite(ev.set_db.at("full")));
  write_text(out_dir / "fig5_cdf.csv", [&](std::ostream& o) { metrics::write_fig5_cdf(o, hash, omni_cdf, mra_cdf); });
  write_text(out_dir / "held_out.csv", [&](std::ostream& o) {
    metrics::write_hash_line(o, hash);
    o << "set,mean_suppression_db,samples\n";
    o << "omni," << metrics::fmt(mean_of(ev.omni_db)) << ',' << ev.omni_db.size() << '\n';
    for (const auto& s : sets) {
      const auto& v = ev.set_db.at(s.name);
      o << s.name << ',' << metrics::fmt(mean_of(v)) << ',' << v.size() << '\n';
    }
  });
  write_text(out_dir / "soi_loss.csv", [&](std::ostream& o) {
    metrics::write_hash_line(o, hash);
    o << "environment,orientation,seed,loss_db\n";
    for (std::size_t i = 0; i < ev.soi_loss.size(); ++i)
      o << ev.soi_loss[i].environment << ',' << ev.soi_loss_orientation[i] << ',' << ev.soi_loss[i].seed << ','
        << metrics::fmt(ev.soi_loss[i].loss_db) << '\n';
  });
  summary["passive"]["omni_mean_db"] = r3(mean_of(ev.omni_db));
  for (const auto& s : sets) summary["passive"]["set_mean_db"][s.name] = r3(mean_of(ev.set_db.at(s.name)));
  summary["passive"]["mra_gain_over_omni_db"] = r3(mean_of(ev.set_db.at("full")) - mean_of(ev.omni_db));
  {
    std::map<std::string, std::vector<double>> by_orientation;
    for (std::size_t i = 0; i < ev.soi_loss.size(); ++i)
      by_orientation[ev.soi_loss_orientation[i]].push_back(ev.soi_loss[i].loss_db);
    for (const auto& [o, v] : by_orientation) summary["soi_loss_mean_db"][o] = r3(metrics::mean(v));
  }

  // Re-training sweep.
  const auto sweep = run_sweep(config, bank, sets);
  write_text(out_dir / "fig10_sweep.csv", [&](std::ostream& o) { metrics::write_fig10_sweep(o, hash, sweep); });
  {
    // Mean over environments per (dynamics, set, period).
    std::map<std::string, std::map<std::string, std::map<double, std::vector<double>>>> agg;
    for (const auto& r : sweep) {
      const auto dyn = r.environment.substr(0, r.environment.find('/'));
      agg[dyn][r.set_name][r.period_s].push_back(r.mean_suppression_db);
    }
    for (const auto& [dyn, by_set] : agg)
      for (const auto& [set, by_period] : by_set) {
        json curve_j = json::object();
        for (const auto& [p, v] : by_period) curve_j[metrics::fmt(p, 3)] = r3(metrics::mean(v));
        summary["sweep"][dyn][set]["mean_db_by_period"] = curve_j;
        if (by_period.count(0.05) && by_period.count(0.5))
          summary["sweep"][dyn][set]["loss_50ms_to_500ms_db"] =
              r3(metrics::mean(by_period.at(0.05)) - metrics::mean(by_period.at(0.5)));
      }
  }

  // Full-duplex sessions.
  const auto sessions = run_sessions(config, bank, sets);
  write_text(out_dir / "fig11_residual.csv",
             [&](std::ostream& o) { metrics::write_fig11_residual(o, hash, sessions.residual); });
  write_text(out_dir / "fig12_rates.csv", [&](std::ostream& o) { metrics::write_fig12_rates(o, hash, sessions.rates); });
  json report = sessions.report;
  report["config_hash"] = hash;
  write_json_file(out_dir / "session.json", report);
  write_text(out_dir / "session_trace.csv", [&](std::ostream& o) {
    metrics::write_hash_line(o, hash);
    o << "time_s,pattern,hd_pattern,passive_db,pre_dc_dbm,post_dc_dbm,sinr_db,snr_db\n";
    for (const auto& t : sessions.trace)
      o << metrics::fmt(t.time_s) << ',' << t.pattern << ',' << t.hd_pattern << ',' << metrics::fmt(t.passive_db) << ','
        << metrics::fmt(t.pre_dbm) << ',' << metrics::fmt(t.post_dbm) << ',' << metrics::fmt(t.sinr_db) << ','
        << metrics::fmt(t.snr_db) << '\n';
  });
  summary["session"] = sessions.report;
  for (auto& [k, v] : summary["session"].items())
    if (v.is_number_float()) v = r3(v.get<double>());

  write_json_file(out_dir / "summary.json", summary);
  write_manifest(config, out_dir);
  return summary;
}

std::string artifact_hash(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  if (file.extension() == ".json") {
    const auto j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("config_hash") || !j["config_hash"].is_string()) return {};
    return j["config_hash"].get<std::string>();
  }
  return metrics::read_hash_line(in);
}

json write_manifest(const ScenarioConfig& config, const fs::path& out_dir) {
  const auto hash = scenario::config_hash(config);
  json manifest;
  manifest["config_hash"] = hash;
  manifest["master_seed"] = config.master_seed;
  manifest["artifacts"] = json::array();
  for (const auto& name : artifact_names(config)) {
    const auto file = out_dir / name;
    if (!fs::exists(file)) continue;
    const auto h = artifact_hash(file);
    if (h != hash)
      throw std::runtime_error("artifact " + file.string() + " has config hash '" + h + "' but the config hashes to '" +
                               hash + "'; refusing to aggregate");
    std::ifstream in(file, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    char digest[17];
    std::snprintf(digest, sizeof(digest), "%016llx", static_cast<unsigned long long>(tag(ss.str())));
    manifest["artifacts"].push_back({{"file", name}, {"fnv1a64", digest}, {"bytes", ss.str().size()}});
  }
  write_json_file(out_dir / "manifest.json", manifest);
  return manifest;
}

}  // namespace mrafd::pipeline
