// Command-line front end: one subcommand per experiment stage.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mrafd/heuristic.hpp"
#include "mrafd/metrics.hpp"
#include "mrafd/phy.hpp"
#include "mrafd/pipeline.hpp"
#include "mrafd/protocol.hpp"
#include "mrafd/scenario.hpp"
#include "mrafd/simd.hpp"

namespace fs = std::filesystem;
using namespace mrafd;

namespace {

struct Globals {
  std::string config_path;
  std::string bank_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

scenario::ScenarioConfig resolve(const Globals& g) {
  scenario::ScenarioConfig c = g.config_path.empty() ? scenario::ScenarioConfig{} : scenario::load_config(g.config_path);
  if (!g.out_dir.empty()) c.output_dir = g.out_dir;
  if (!g.bank_path.empty()) c.bank_path = g.bank_path;
  if (g.seed) c.master_seed = *g.seed;
  c.validate();
  return c;
}

fs::path out_or(const std::string& flag, const scenario::ScenarioConfig& c, const std::string& name) {
  if (!flag.empty()) return flag;
  fs::create_directories(c.output_dir);
  return fs::path(c.output_dir) / name;
}

std::vector<int> load_set(const std::string& path) {
  if (path.empty()) return protocol::full_pattern_set();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pattern set " + path);
  auto s = heuristic::read_pattern_set(in);
  if (s.empty()) throw std::runtime_error("pattern set " + path + " is empty");
  return s;
}

heuristic::SuppressionProfile load_profile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profile " + path.string() + "; run `mrafd profile` first");
  return heuristic::read_profile_csv(in);
}

template <class Fn>
void write_file(const fs::path& path, Fn&& fn) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  fn(out);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  std::cout << "wrote " << path.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Full-duplex link simulator with a multi-reconfigurable receive antenna"};
  app.require_subcommand(1);
  Globals g;
  std::string out;
  app.add_option("--config", g.config_path, "Scenario config (JSON); defaults apply when omitted")->check(CLI::ExistingFile);
  app.add_option("--bank", g.bank_path, "Pattern bank file (overrides bank_path)");
  app.add_option("--out-dir", g.out_dir, "Output directory (overrides output_dir)");
  app.add_option("--seed", g.seed, "Master seed (overrides master_seed)");

  auto* build = app.add_subcommand("build-bank", "Synthesize all 4096 patterns and save the bank");

  auto* profile = app.add_subcommand("profile", "Per-pattern max suppression over the profiling suite");
  profile->add_option("--out", out, "Profile CSV (default <out-dir>/profile.csv)");

  double threshold = 0.0;
  int budget = 0;
  std::string profile_path;
  auto* select = app.add_subcommand("select-set", "Patterns whose max suppression exceeds a threshold");
  auto* thr_opt = select->add_option("--threshold", threshold, "Threshold X in dB (keeps patterns > X)");
  auto* bud_opt = select->add_option("--budget", budget, "Largest set with at most this many patterns");
  thr_opt->excludes(bud_opt);
  select->add_option("--profile", profile_path, "Profile CSV (default <out-dir>/profile.csv)");
  select->add_option("--out", out, "Pattern-set file");

  std::vector<double> thresholds;
  auto* curve = app.add_subcommand("size-curve", "Set size against threshold");
  curve->add_option("--thresholds", thresholds, "Ascending thresholds in dB (comma separated)")->delimiter(',');
  curve->add_option("--profile", profile_path, "Profile CSV (default <out-dir>/profile.csv)");
  curve->add_option("--out", out, "CSV (default <out-dir>/fig8_curve.csv)");

  std::string set_path;
  std::optional<double> tx_power;
  auto* train = app.add_subcommand("train", "One training frame on the scenario environment");
  train->add_option("--set", set_path, "Pattern-set file (default: all 4096)");
  train->add_option("--tx-power", tx_power, "Transmit power in dBm");
  train->add_option("--out", out, "Selection CSV (default <out-dir>/selection.csv)");

  std::vector<double> periods;
  auto* sweep = app.add_subcommand("retrain-sweep", "Mean suppression against re-training period");
  sweep->add_option("--set", set_path, "Pattern-set file (default: all 4096)");
  sweep->add_option("--periods", periods, "Periods in seconds (comma separated)")->delimiter(',');
  std::string dynamics = "dynamic";
  sweep->add_option("--dynamics", dynamics, "semi-static or dynamic")->check(CLI::IsMember({"semi-static", "dynamic"}));
  sweep->add_option("--out", out, "CSV (default <out-dir>/fig10_sweep.csv)");

  auto* session = app.add_subcommand("session", "Full-duplex session with digital cancellation and rates");
  session->add_option("--set", set_path, "Pattern-set file (default: all 4096)");
  session->add_option("--tx-power", tx_power, "Transmit power in dBm");
  session->add_option("--out", out, "JSON report (default <out-dir>/session.json)");

  auto* report = app.add_subcommand("report", "Verify artifact hashes and write manifest.json");
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage and write all artifacts");
  auto* dump = app.add_subcommand("dump-config", "Print the resolved scenario config");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = resolve(g);
    const auto hash = scenario::config_hash(cfg);

    if (*dump) {
      std::cout << scenario::to_json(cfg).dump(2) << '\n';
      return 0;
    }
    if (*build) {
      const auto path = cfg.bank_file();
      if (path.has_parent_path()) fs::create_directories(path.parent_path());
      antenna::save_bank(antenna::build_pattern_bank(cfg.geometry), path);
      std::cout << "wrote " << path.string() << " (isa " << simd::isa_name(simd::active_isa()) << ")\n";
      return 0;
    }
    if (*report) {
      const auto m = pipeline::write_manifest(cfg, cfg.output_dir);
      std::cout << "manifest lists " << m["artifacts"].size() << " artifacts with config hash " << hash << '\n';
      return 0;
    }
    if (*select || *curve) {
      const auto prof = load_profile(profile_path.empty() ? fs::path(cfg.output_dir) / "profile.csv" : fs::path(profile_path));
      if (*select) {
        if (!*thr_opt && !*bud_opt) throw CLI::ValidationError("select-set needs --threshold or --budget");
        const auto set = *thr_opt ? heuristic::select_set(prof, threshold)
                                  : heuristic::select_budget(prof, static_cast<std::size_t>(budget));
        const std::string name = *thr_opt ? "set_threshold-" + metrics::fmt(threshold, 1) + ".txt"
                                          : "set_budget-" + std::to_string(budget) + ".txt";
        const auto path = out_or(out, cfg, name);
        pipeline::write_pattern_set_file(path, hash, set.members);
        std::cout << "wrote " << path.string() << " (" << set.members.size() << " patterns)\n";
      } else {
        const auto& xs = thresholds.empty() ? cfg.thresholds_db : thresholds;
        write_file(out_or(out, cfg, "fig8_curve.csv"),
                   [&](std::ostream& o) { metrics::write_fig8_curve(o, hash, heuristic::set_size_curve(prof, xs)); });
      }
      return 0;
    }

    const auto bank = pipeline::load_bank(cfg);
    if (*profile) {
      const auto prof = pipeline::run_profile(cfg, bank);
      write_file(out_or(out, cfg, "profile.csv"), [&](std::ostream& o) {
        metrics::write_hash_line(o, hash);
        heuristic::write_profile_csv(o, prof);
      });
    } else if (*train) {
      auto spec = cfg.training;
      spec.pattern_set = load_set(set_path);
      auto imp = cfg.impairments;
      if (tx_power) imp.tx_power_dbm = *tx_power;
      channel::LinkState state(cfg.environment, derive_seed(cfg.master_seed, {tag("train-channel")}));
      Rng noise(derive_seed(cfg.master_seed, {tag("train-noise")}));
      const auto res = protocol::run_training(state, bank, spec, imp, noise);
      write_file(out_or(out, cfg, "selection.csv"), [&](std::ostream& o) {
        metrics::write_hash_line(o, hash);
        protocol::write_selection_csv(o, res);
      });
      std::cout << "chosen pattern " << res.chosen_pattern << '\n';
    } else if (*sweep) {
      auto spec = cfg.training;
      spec.pattern_set = load_set(set_path);
      auto env = cfg.environment;
      env.dynamics_rho = dynamics == "dynamic" ? cfg.sweep.dynamic_rho : cfg.sweep.semi_static_rho;
      env.name = dynamics + "/" + env.name;
      auto imp = cfg.impairments;
      imp.tx_power_dbm = cfg.sweep.tx_power_dbm;
      const auto& ps = periods.empty() ? cfg.sweep.periods_s : periods;
      const auto points = protocol::retraining_sweep(
          env, bank, spec, ps, {cfg.sweep.sim_duration_s, cfg.sweep.sample_step_s}, imp,
          derive_seed(cfg.master_seed, {tag("sweep-channel"), 0}), derive_seed(cfg.master_seed, {tag("sweep-noise"), 0, 0}));
      std::vector<metrics::SweepRow> rows;
      const std::string set_name = set_path.empty() ? "full" : fs::path(set_path).stem().string();
      for (const auto& p : points)
        rows.push_back({env.name, set_name, p.period_s, protocol::compute_overhead({p.period_s, spec}),
                        p.mean_suppression_db, p.trainings});
      write_file(out_or(out, cfg, "fig10_sweep.csv"), [&](std::ostream& o) { metrics::write_fig10_sweep(o, hash, rows); });
    } else if (*session) {
      const auto set = load_set(set_path);
      auto imp = cfg.impairments;
      if (tx_power) imp.tx_power_dbm = *tx_power;
      const auto r = phy::run_full_duplex_session(cfg.environment, bank, set,
                                                  {cfg.session.retrain_period_s, cfg.training}, cfg.session.options,
                                                  imp, derive_seed(cfg.master_seed, {tag("session"), 0}));
      const nlohmann::json j = {{"config_hash", hash},          {"tx_power_dbm", r.tx_power_dbm},
                                {"passive_db", r.passive_db},   {"dc_gain_db", r.dc_gain_db},
                                {"total_db", r.total_db},       {"r_fd", r.rates.r_fd},
                                {"r_hd", r.rates.r_hd},         {"gain_percent", r.rates.gain_percent}};
      const auto path = out_or(out, cfg, "session.json");
      pipeline::write_json_file(path, j);
      std::cout << j.dump(2) << '\n';
    } else if (*pipeline) {
      const auto summary = pipeline::run_all(cfg, bank, cfg.output_dir);
      std::cout << summary.dump(2) << '\n';
    }
    return 0;
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
