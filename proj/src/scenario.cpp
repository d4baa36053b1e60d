#include "mrafd/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <stdexcept>

#include "mrafd/rng.hpp"

namespace mrafd::scenario {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

[[noreturn]] void fail(const std::string& where, const std::string& why) {
  throw std::invalid_argument("config: " + where + ": " + why);
}

// Reads the keys of one JSON object, remembering which were consumed so that
// typos surface as errors instead of silently falling back to defaults.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail(where_.empty() ? "<root>" : where_, "expected an object");
  }

  std::string path(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

  bool has(const std::string& key) {
    if (!j_.contains(key)) return false;
    seen_.insert(key);
    return true;
  }

  template <class T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      fail(path(key), "wrong type");
    }
  }

  double read_double(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (v.is_number()) return v.get<double>();
    // JSON has no infinity; accept the usual spellings.
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
      if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    fail(path(key), "expected a number");
  }

  std::vector<double> read_doubles(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_array()) fail(path(key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail(path(key), "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  cdouble read_complex(const std::string& key, cdouble fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      fail(path(key), "expected [re, im]");
    return {v[0].get<double>(), v[1].get<double>()};
  }

  const json& child(const std::string& key) { return j_.at(key); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(path(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

json number(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return v;
}

json complex_json(cdouble c) { return json::array({c.real(), c.imag()}); }

}  // namespace

ScenarioConfig::ScenarioConfig() {
  for (double x = 40.0; x <= 70.0 + 1e-9; x += 2.0) thresholds_db.push_back(x);
}

std::filesystem::path ScenarioConfig::bank_file() const {
  if (!bank_path.empty()) return bank_path;
  return std::filesystem::path(output_dir) / "bank.bin";
}

std::vector<channel::Environment> ScenarioConfig::profiling_environments() const {
  if (!profiling.environments.empty()) return profiling.environments;
  return default_profiling_environments(environment, master_seed, profiling.default_count);
}

void ScenarioConfig::validate() const {
  auto wrap = [](const std::string& where, auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      fail(where, e.what());
    }
  };
  wrap("geometry", [&] { geometry.validate(); });
  wrap("impairments", [&] { impairments.validate(); });
  wrap("training", [&] { training.validate(); });
  wrap("environment", [&] { environment.validate(); });
  wrap("session.ofdm", [&] { session.options.ofdm.validate(); });
  for (std::size_t i = 0; i < profiling.environments.size(); ++i)
    wrap("profiling.environments[" + std::to_string(i) + "]", [&] { profiling.environments[i].validate(); });
  if (output_dir.empty()) fail("output_dir", "must not be empty");
  if (profiling.default_count <= 0) fail("profiling.default_count", "must be positive");
  if (profiling.orientations.empty()) fail("profiling.orientations", "must not be empty");
  if (!(profiling.options.duration_s > 0.0)) fail("profiling.duration_s", "must be positive");
  if (!(profiling.options.sample_step_s > 0.0)) fail("profiling.sample_step_s", "must be positive");
  for (std::size_t i = 1; i < thresholds_db.size(); ++i)
    if (!(thresholds_db[i] > thresholds_db[i - 1])) fail("thresholds_db", "must be strictly ascending");
  for (int b : set_budgets)
    if (b <= 0 || b > antenna::kConfigs) fail("set_budgets", "entries must lie in 1..4096");
  if (evaluation.held_out_count <= 0) fail("evaluation.held_out_count", "must be positive");
  if (!(evaluation.duration_s > 0.0)) fail("evaluation.duration_s", "must be positive");
  if (!(evaluation.sample_step_s > 0.0)) fail("evaluation.sample_step_s", "must be positive");
  if (evaluation.tx_powers_dbm.empty()) fail("evaluation.tx_powers_dbm", "must not be empty");
  if (!(evaluation.retrain_period_s > 0.0)) fail("evaluation.retrain_period_s", "must be positive");
  if (sweep.periods_s.empty()) fail("sweep.periods_s", "must not be empty");
  for (double p : sweep.periods_s)
    if (!(p > 0.0)) fail("sweep.periods_s", "entries must be positive");
  if (sweep.environments <= 0) fail("sweep.environments", "must be positive");
  if (!(sweep.sim_duration_s > 0.0)) fail("sweep.sim_duration_s", "must be positive");
  if (!(sweep.sample_step_s > 0.0)) fail("sweep.sample_step_s", "must be positive");
  for (auto [name, rho] : {std::pair{"sweep.semi_static_rho", sweep.semi_static_rho},
                           std::pair{"sweep.dynamic_rho", sweep.dynamic_rho}})
    if (!(rho >= 0.0 && rho <= 1.0)) fail(name, "must lie in [0, 1]");
  if (session.tx_powers_dbm.empty()) fail("session.tx_powers_dbm", "must not be empty");
  if (session.runs <= 0) fail("session.runs", "must be positive");
  if (!(session.retrain_period_s > 0.0)) fail("session.retrain_period_s", "must be positive");
  if (!(session.options.frame_spacing_s > 0.0)) fail("session.frame_spacing_s", "must be positive");
  if (!(session.options.dc_detect_factor >= 0.0)) fail("session.dc_detect_factor", "must be >= 0");
}

json environment_to_json(const channel::Environment& env) {
  json j;
  j["name"] = env.name;
  j["orientation"] = channel::to_string(env.orientation);
  if (env.peer_azimuth_rad) j["peer_azimuth_deg"] = *env.peer_azimuth_rad / kDeg;
  j["los_blocked"] = env.los_blocked;
  j["n_reflectors"] = env.n_reflectors;
  j["si_los_power_db"] = number(env.si_los_power_db);
  j["si_nlos_rel_db"] = number(env.si_nlos_rel_db);
  j["si_los_azimuth_deg"] = env.si_los_azimuth_rad / kDeg;
  j["soi_pathloss_db"] = number(env.soi_pathloss_db);
  j["soi_nlos_rel_db"] = number(env.soi_nlos_rel_db);
  j["dynamics_rho"] = env.dynamics_rho;
  j["step_s"] = env.step_s;
  j["max_delay_bins"] = env.max_delay_bins;
  j["seed"] = env.seed;
  return j;
}

channel::Environment environment_from_json(const json& j, const channel::Environment& base,
                                           const std::string& where) {
  Reader r(j, where);
  channel::Environment env = base;
  r.read("name", env.name);
  if (r.has("orientation")) {
    try {
      env.orientation = channel::parse_orientation(j.at("orientation").get<std::string>());
    } catch (const std::exception& e) {
      fail(r.path("orientation"), e.what());
    }
  }
  if (r.has("peer_azimuth_deg")) env.peer_azimuth_rad = r.read_double("peer_azimuth_deg", 0.0) * kDeg;
  r.read("los_blocked", env.los_blocked);
  r.read("n_reflectors", env.n_reflectors);
  env.si_los_power_db = r.read_double("si_los_power_db", env.si_los_power_db);
  env.si_nlos_rel_db = r.read_double("si_nlos_rel_db", env.si_nlos_rel_db);
  env.si_los_azimuth_rad = r.read_double("si_los_azimuth_deg", env.si_los_azimuth_rad / kDeg) * kDeg;
  env.soi_pathloss_db = r.read_double("soi_pathloss_db", env.soi_pathloss_db);
  env.soi_nlos_rel_db = r.read_double("soi_nlos_rel_db", env.soi_nlos_rel_db);
  env.dynamics_rho = r.read_double("dynamics_rho", env.dynamics_rho);
  env.step_s = r.read_double("step_s", env.step_s);
  r.read("max_delay_bins", env.max_delay_bins);
  r.read("seed", env.seed);
  r.finish();
  try {
    env.validate();
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
  return env;
}

json to_json(const ScenarioConfig& c) {
  json j;
  j["master_seed"] = c.master_seed;
  j["output_dir"] = c.output_dir;
  j["bank_path"] = c.bank_path;

  const auto& g = c.geometry;
  j["geometry"] = {{"pitch_wavelengths", g.pitch_wavelengths},
                   {"azimuth_bins", g.azimuth_bins},
                   {"coupling", json::array()},
                   {"switch_load", complex_json(g.switch_load)}};
  for (const auto& v : g.coupling) j["geometry"]["coupling"].push_back(complex_json(v));

  j["impairments"] = {{"tx_power_dbm", number(c.impairments.tx_power_dbm)},
                      {"tx_noise_dbc", number(c.impairments.tx_noise_dbc)},
                      {"rx_noise_floor_dbm", number(c.impairments.rx_noise_floor_dbm)}};
  j["training"] = {{"sample_rate_hz", c.training.sample_rate_hz},
                   {"gap_samples", c.training.gap_samples},
                   {"data_samples", c.training.data_samples},
                   {"null_samples", c.training.null_samples},
                   {"guard_samples", c.training.guard_samples}};
  j["environment"] = environment_to_json(c.environment);

  json envs = json::array();
  for (const auto& e : c.profiling.environments) envs.push_back(environment_to_json(e));
  json orients = json::array();
  for (auto o : c.profiling.orientations) orients.push_back(channel::to_string(o));
  j["profiling"] = {{"environments", envs},
                    {"default_count", c.profiling.default_count},
                    {"orientations", orients},
                    {"duration_s", c.profiling.options.duration_s},
                    {"sample_step_s", c.profiling.options.sample_step_s}};
  j["thresholds_db"] = c.thresholds_db;
  j["set_budgets"] = c.set_budgets;
  j["evaluation"] = {{"held_out_count", c.evaluation.held_out_count},
                     {"duration_s", c.evaluation.duration_s},
                     {"retrain_period_s", c.evaluation.retrain_period_s},
                     {"sample_step_s", c.evaluation.sample_step_s},
                     {"tx_powers_dbm", c.evaluation.tx_powers_dbm}};
  j["sweep"] = {{"periods_s", c.sweep.periods_s},
                {"environments", c.sweep.environments},
                {"sim_duration_s", c.sweep.sim_duration_s},
                {"sample_step_s", c.sweep.sample_step_s},
                {"tx_power_dbm", c.sweep.tx_power_dbm},
                {"semi_static_rho", c.sweep.semi_static_rho},
                {"dynamic_rho", c.sweep.dynamic_rho}};
  const auto& o = c.session.options;
  j["session"] = {{"tx_powers_dbm", c.session.tx_powers_dbm},
                  {"retrain_period_s", c.session.retrain_period_s},
                  {"runs", c.session.runs},
                  {"frame_spacing_s", o.frame_spacing_s},
                  {"hd_antenna", phy::to_string(o.hd_antenna)},
                  {"dc_detect_factor", o.dc_detect_factor},
                  {"ofdm",
                   {{"cp_len", o.ofdm.cp_len},
                    {"constellation", phy::to_string(o.ofdm.constellation)},
                    {"n_symbols", o.ofdm.n_symbols},
                    {"n_frames", o.ofdm.n_frames},
                    {"n_training", o.ofdm.n_training}}}};
  return j;
}

ScenarioConfig from_json(const json& j) {
  ScenarioConfig c;
  Reader r(j, "");
  r.read("master_seed", c.master_seed);
  r.read("output_dir", c.output_dir);
  r.read("bank_path", c.bank_path);

  if (r.has("geometry")) {
    Reader g(r.child("geometry"), "geometry");
    auto& geo = c.geometry;
    geo.pitch_wavelengths = g.read_double("pitch_wavelengths", geo.pitch_wavelengths);
    g.read("azimuth_bins", geo.azimuth_bins);
    if (g.has("coupling")) {
      const auto& arr = r.child("geometry").at("coupling");
      if (!arr.is_array() || arr.size() != antenna::kPixels) fail("geometry.coupling", "expected 9 [re, im] pairs");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto& v = arr[i];
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
          fail("geometry.coupling[" + std::to_string(i) + "]", "expected [re, im]");
        geo.coupling[i] = {v[0].get<double>(), v[1].get<double>()};
      }
    }
    geo.switch_load = g.read_complex("switch_load", geo.switch_load);
    g.finish();
  }
  if (r.has("impairments")) {
    Reader im(r.child("impairments"), "impairments");
    auto& imp = c.impairments;
    imp.tx_power_dbm = im.read_double("tx_power_dbm", imp.tx_power_dbm);
    imp.tx_noise_dbc = im.read_double("tx_noise_dbc", imp.tx_noise_dbc);
    imp.rx_noise_floor_dbm = im.read_double("rx_noise_floor_dbm", imp.rx_noise_floor_dbm);
    im.finish();
  }
  if (r.has("training")) {
    Reader t(r.child("training"), "training");
    t.read("sample_rate_hz", c.training.sample_rate_hz);
    t.read("gap_samples", c.training.gap_samples);
    t.read("data_samples", c.training.data_samples);
    t.read("null_samples", c.training.null_samples);
    t.read("guard_samples", c.training.guard_samples);
    t.finish();
  }
  if (r.has("environment")) c.environment = environment_from_json(r.child("environment"), c.environment, "environment");
  if (r.has("profiling")) {
    Reader p(r.child("profiling"), "profiling");
    if (p.has("environments")) {
      const auto& arr = r.child("profiling").at("environments");
      if (!arr.is_array()) fail("profiling.environments", "expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i)
        c.profiling.environments.push_back(
            environment_from_json(arr[i], c.environment, "profiling.environments[" + std::to_string(i) + "]"));
    }
    p.read("default_count", c.profiling.default_count);
    if (p.has("orientations")) {
      std::vector<std::string> names;
      p.read("orientations", names);
      c.profiling.orientations.clear();
      for (const auto& n : names) {
        try {
          c.profiling.orientations.push_back(channel::parse_orientation(n));
        } catch (const std::exception& e) {
          fail("profiling.orientations", e.what());
        }
      }
    }
    c.profiling.options.duration_s = p.read_double("duration_s", c.profiling.options.duration_s);
    c.profiling.options.sample_step_s = p.read_double("sample_step_s", c.profiling.options.sample_step_s);
    p.finish();
  }
  c.thresholds_db = r.read_doubles("thresholds_db", c.thresholds_db);
  r.read("set_budgets", c.set_budgets);
  if (r.has("evaluation")) {
    Reader e(r.child("evaluation"), "evaluation");
    e.read("held_out_count", c.evaluation.held_out_count);
    c.evaluation.duration_s = e.read_double("duration_s", c.evaluation.duration_s);
    c.evaluation.retrain_period_s = e.read_double("retrain_period_s", c.evaluation.retrain_period_s);
    c.evaluation.sample_step_s = e.read_double("sample_step_s", c.evaluation.sample_step_s);
    c.evaluation.tx_powers_dbm = e.read_doubles("tx_powers_dbm", c.evaluation.tx_powers_dbm);
    e.finish();
  }
  if (r.has("sweep")) {
    Reader s(r.child("sweep"), "sweep");
    c.sweep.periods_s = s.read_doubles("periods_s", c.sweep.periods_s);
    s.read("environments", c.sweep.environments);
    c.sweep.sim_duration_s = s.read_double("sim_duration_s", c.sweep.sim_duration_s);
    c.sweep.sample_step_s = s.read_double("sample_step_s", c.sweep.sample_step_s);
    c.sweep.tx_power_dbm = s.read_double("tx_power_dbm", c.sweep.tx_power_dbm);
    c.sweep.semi_static_rho = s.read_double("semi_static_rho", c.sweep.semi_static_rho);
    c.sweep.dynamic_rho = s.read_double("dynamic_rho", c.sweep.dynamic_rho);
    s.finish();
  }
  if (r.has("session")) {
    Reader s(r.child("session"), "session");
    auto& o = c.session.options;
    c.session.tx_powers_dbm = s.read_doubles("tx_powers_dbm", c.session.tx_powers_dbm);
    c.session.retrain_period_s = s.read_double("retrain_period_s", c.session.retrain_period_s);
    s.read("runs", c.session.runs);
    o.frame_spacing_s = s.read_double("frame_spacing_s", o.frame_spacing_s);
    o.dc_detect_factor = s.read_double("dc_detect_factor", o.dc_detect_factor);
    if (s.has("hd_antenna")) {
      try {
        o.hd_antenna = phy::parse_hd_antenna(r.child("session").at("hd_antenna").get<std::string>());
      } catch (const std::exception& e) {
        fail("session.hd_antenna", e.what());
      }
    }
    if (s.has("ofdm")) {
      Reader f(r.child("session").at("ofdm"), "session.ofdm");
      f.read("cp_len", o.ofdm.cp_len);
      if (f.has("constellation")) {
        try {
          o.ofdm.constellation =
              phy::parse_constellation(r.child("session").at("ofdm").at("constellation").get<std::string>());
        } catch (const std::exception& e) {
          fail("session.ofdm.constellation", e.what());
        }
      }
      f.read("n_symbols", o.ofdm.n_symbols);
      f.read("n_frames", o.ofdm.n_frames);
      f.read("n_training", o.ofdm.n_training);
      f.finish();
    }
    s.finish();
  }
  r.finish();
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config: " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

std::string config_hash(const ScenarioConfig& config) {
  const std::string dump = to_json(config).dump();
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(tag(dump)));
  return buf;
}

namespace {

channel::Environment draw_room(const channel::Environment& base, Rng& rng, int index, const char* prefix) {
  channel::Environment env = base;
  char name[32];
  std::snprintf(name, sizeof(name), "%s-%02d", prefix, index + 1);
  env.name = name;
  env.n_reflectors = 4 + 2 * static_cast<int>(rng() % 5);
  env.si_los_power_db = base.si_los_power_db + uniform(rng, -1.0, 1.0);
  env.si_nlos_rel_db = base.si_nlos_rel_db + uniform(rng, -3.0, 3.0);
  env.soi_pathloss_db = base.soi_pathloss_db + uniform(rng, -3.0, 3.0);
  env.los_blocked = index % 4 == 3;
  env.seed = rng();
  return env;
}

}  // namespace

std::vector<channel::Environment> default_profiling_environments(const channel::Environment& base,
                                                                 std::uint64_t master_seed, int count) {
  std::vector<channel::Environment> out;
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(master_seed, {tag("profiling-env"), static_cast<std::uint64_t>(i)}));
    out.push_back(draw_room(base, rng, i, "room"));
  }
  return out;
}

std::vector<channel::Environment> held_out_environments(const channel::Environment& base,
                                                        std::uint64_t master_seed, int count) {
  std::vector<channel::Environment> out;
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(master_seed, {tag("held-out-env"), static_cast<std::uint64_t>(i)}));
    auto env = draw_room(base, rng, i, "held-out");
    env.peer_azimuth_rad = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    out.push_back(env);
  }
  return out;
}

}  // namespace mrafd::scenario
