#include "mrafd/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace mrafd::channel {

double orientation_azimuth(Orientation o) {
  switch (o) {
    case Orientation::Opposite: return std::numbers::pi;
    case Orientation::FaceToFace: return 0.0;
    case Orientation::SideToSideLeft: return 0.5 * std::numbers::pi;
    case Orientation::SideToSideRight: return 1.5 * std::numbers::pi;
  }
  return 0.0;
}

std::string to_string(Orientation o) {
  switch (o) {
    case Orientation::Opposite: return "opposite";
    case Orientation::FaceToFace: return "face_to_face";
    case Orientation::SideToSideLeft: return "side_to_side_left";
    case Orientation::SideToSideRight: return "side_to_side_right";
  }
  return "?";
}

Orientation parse_orientation(const std::string& s) {
  if (s == "opposite") return Orientation::Opposite;
  if (s == "face_to_face") return Orientation::FaceToFace;
  if (s == "side_to_side_left") return Orientation::SideToSideLeft;
  if (s == "side_to_side_right") return Orientation::SideToSideRight;
  throw std::invalid_argument("unknown orientation '" + s + "'");
}

double Environment::peer_azimuth() const {
  return peer_azimuth_rad ? *peer_azimuth_rad : orientation_azimuth(orientation);
}

void Environment::validate() const {
  auto bad = [this](const std::string& field, const std::string& why) {
    throw std::invalid_argument("environment '" + name + "': " + field + " " + why);
  };
  if (!(dynamics_rho >= 0.0 && dynamics_rho <= 1.0)) bad("dynamics_rho", "must lie in [0, 1]");
  if (!(si_los_power_db < 0.0)) bad("si_los_power_db", "must be negative");
  if (n_reflectors < 0) bad("n_reflectors", "must be >= 0");
  if (!(step_s > 0.0)) bad("step_s", "must be positive");
  if (max_delay_bins < 1) bad("max_delay_bins", "must be >= 1");
  if (std::isnan(si_nlos_rel_db)) bad("si_nlos_rel_db", "must be a number");
  if (std::isnan(soi_pathloss_db)) bad("soi_pathloss_db", "must be a number");
}

double PathSet::total_power() const {
  double p = 0.0;
  for (const auto& c : paths) p += std::norm(c.amplitude);
  return p;
}

int PathSet::max_delay() const {
  int d = 0;
  for (const auto& c : paths) d = std::max(d, c.delay_bins);
  return d;
}

double ChannelRealization::energy() const {
  double e = 0.0;
  for (const auto& t : taps) e += std::norm(t);
  return e;
}

namespace {

cdouble random_phase(double magnitude, Rng& rng) {
  return std::polar(magnitude, uniform(rng, 0.0, 2.0 * std::numbers::pi));
}

void add_reflectors(PathSet& set, const Environment& env, double aggregate_power, Rng& rng) {
  if (env.n_reflectors == 0) return;
  const double per_path = aggregate_power / env.n_reflectors;
  std::uniform_int_distribution<int> delay(1, env.max_delay_bins);
  for (int i = 0; i < env.n_reflectors; ++i) {
    PathComponent c;
    c.kind = PathKind::Nlos;
    c.aoa = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    c.delay_bins = delay(rng);
    c.power = per_path;
    c.amplitude = std::sqrt(per_path) * complex_normal(rng);
    set.paths.push_back(c);
  }
}

}  // namespace

PathSet generate_si_paths(const Environment& env, Rng& rng) {
  env.validate();
  PathSet set;
  set.link = Link::Si;
  const double los_power = db_to_linear(env.si_los_power_db);
  PathComponent los;
  los.kind = PathKind::Los;
  los.aoa = env.si_los_azimuth_rad;
  los.delay_bins = 0;
  los.amplitude = random_phase(std::sqrt(los_power), rng);
  set.paths.push_back(los);
  add_reflectors(set, env, los_power * db_to_linear(env.si_nlos_rel_db), rng);
  return set;
}

PathSet generate_soi_paths(const Environment& env, Rng& rng) {
  env.validate();
  PathSet set;
  set.link = Link::Soi;
  const double total = db_to_linear(-env.soi_pathloss_db);
  if (env.los_blocked) {
    add_reflectors(set, env, total, rng);
  } else {
    PathComponent los;
    los.kind = PathKind::Los;
    los.aoa = env.peer_azimuth();
    los.delay_bins = 0;
    los.amplitude = random_phase(std::sqrt(total), rng);
    set.paths.push_back(los);
    add_reflectors(set, env, total * db_to_linear(env.soi_nlos_rel_db), rng);
  }
  return set;
}

ChannelRealization realize_channel(const PathSet& paths, const antenna::RadiationPattern& pattern) {
  ChannelRealization r;
  r.link = paths.link;
  r.pattern_index = pattern.config_index;
  r.taps.assign(static_cast<std::size_t>(paths.max_delay()) + 1, cdouble{});
  for (const auto& c : paths.paths) {
    if (c.delay_bins < 0) throw std::invalid_argument("realize_channel: negative path delay");
    r.taps[static_cast<std::size_t>(c.delay_bins)] += c.amplitude * antenna::gain_at(pattern, c.aoa);
  }
  return r;
}

PathSet evolve(const PathSet& paths, int steps, const Environment& env, Rng& rng) {
  if (steps < 0) throw std::invalid_argument("evolve: steps must be >= 0");
  PathSet out = paths;
  const double rho = env.dynamics_rho;
  const double innov = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  for (int s = 0; s < steps; ++s) {
    for (auto& c : out.paths) {
      if (c.kind != PathKind::Nlos) continue;
      c.amplitude = rho * c.amplitude + innov * std::sqrt(c.power) * complex_normal(rng);
    }
  }
  return out;
}

double passive_suppression_db(const ChannelRealization& realization) {
  if (realization.link != Link::Si)
    throw std::invalid_argument("passive suppression is defined for the SI link only");
  const double e = realization.energy();
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(e);
}

std::vector<simd::WeightedBin> weighted_bins(const PathSet& paths, std::size_t bins) {
  std::vector<simd::WeightedBin> out;
  out.reserve(paths.paths.size());
  for (const auto& c : paths.paths) {
    out.push_back({static_cast<std::uint32_t>(antenna::azimuth_bin(c.aoa, bins)),
                   static_cast<std::uint32_t>(c.delay_bins), c.amplitude.real(), c.amplitude.imag()});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.delay < b.delay; });
  return out;
}

void write_paths_csv(std::ostream& out, const PathSet& paths) {
  out << "aoa,delay,re,im,kind\n";
  char buf[160];
  for (const auto& c : paths.paths) {
    std::snprintf(buf, sizeof(buf), "%.17g,%d,%.17g,%.17g,%s\n", c.aoa, c.delay_bins,
                  c.amplitude.real(), c.amplitude.imag(), c.kind == PathKind::Los ? "LOS" : "NLOS");
    out << buf;
  }
}

LinkState::LinkState(Environment env, std::uint64_t seed)
    : env_(std::move(env)), rng_(seed),
      step_ns_(static_cast<std::int64_t>(std::llround(env_.step_s * 1e9))) {
  env_.validate();
  si_ = generate_si_paths(env_, rng_);
  soi_ = generate_soi_paths(env_, rng_);
}

void LinkState::advance_ns(std::int64_t dt_ns) {
  if (dt_ns < 0) throw std::invalid_argument("LinkState: time cannot run backwards");
  const std::int64_t t1 = time_ns_ + dt_ns;
  const auto steps = static_cast<int>(t1 / step_ns_ - time_ns_ / step_ns_);
  // One step at a time so the trajectory does not depend on how the caller
  // slices time.
  if (env_.dynamics_rho < 1.0) {
    for (int s = 0; s < steps; ++s) {
      si_ = evolve(si_, 1, env_, rng_);
      soi_ = evolve(soi_, 1, env_, rng_);
    }
  }
  time_ns_ = t1;
}

void LinkState::advance_to_ns(std::int64_t t_ns) {
  if (t_ns > time_ns_) advance_ns(t_ns - time_ns_);
}

}  // namespace mrafd::channel
