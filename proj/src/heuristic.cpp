#include "mrafd/heuristic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mrafd/rng.hpp"
#include "mrafd/simd.hpp"

namespace mrafd::heuristic {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

SuppressionProfile SuppressionProfile::empty() {
  SuppressionProfile p;
  p.max_suppression_db.assign(antenna::kConfigs, -kInf);
  return p;
}

void SuppressionProfile::merge(const SuppressionProfile& other) {
  if (other.max_suppression_db.size() != max_suppression_db.size())
    throw std::invalid_argument("profile merge: size mismatch");
  for (std::size_t i = 0; i < max_suppression_db.size(); ++i)
    max_suppression_db[i] = std::max(max_suppression_db[i], other.max_suppression_db[i]);
  runs_meta.insert(runs_meta.end(), other.runs_meta.begin(), other.runs_meta.end());
}

SuppressionProfile profile_run(const channel::Environment& env, const antenna::PatternBank& bank,
                               const ProfilingOptions& options, std::uint64_t seed) {
  channel::LinkState state(env, seed);
  const auto view = bank.bin_major();
  std::vector<double> energy(bank.size());
  std::vector<double> min_energy(bank.size(), kInf);
  const auto step_ns = static_cast<std::int64_t>(std::llround(options.sample_step_s * 1e9));
  const auto samples =
      std::max<std::int64_t>(1, std::llround(options.duration_s / options.sample_step_s));
  for (std::int64_t i = 0; i < samples; ++i) {
    state.advance_to_ns(i * step_ns);
    const auto paths = channel::weighted_bins(state.si(), bank.bins());
    simd::pattern_energies(view, paths, energy);
    for (std::size_t p = 0; p < energy.size(); ++p) min_energy[p] = std::min(min_energy[p], energy[p]);
  }
  SuppressionProfile out;
  out.max_suppression_db.resize(bank.size());
  for (std::size_t p = 0; p < bank.size(); ++p)
    out.max_suppression_db[p] = min_energy[p] == 0.0 ? kInf : -10.0 * std::log10(min_energy[p]);
  out.runs_meta.push_back({env.name, channel::to_string(env.orientation), seed});
  return out;
}

SuppressionProfile collect_profiles(std::span<const channel::Environment> environments,
                                    std::span<const channel::Orientation> orientations,
                                    const antenna::PatternBank& bank,
                                    const ProfilingOptions& options, std::uint64_t master_seed) {
  if (environments.empty()) throw std::invalid_argument("collect_profiles: no environments");
  if (orientations.empty()) throw std::invalid_argument("collect_profiles: no orientations");
  auto profile = SuppressionProfile::empty();
  for (std::size_t e = 0; e < environments.size(); ++e) {
    for (auto o : orientations) {
      channel::Environment env = environments[e];
      env.orientation = o;
      env.peer_azimuth_rad.reset();
      const auto seed = derive_seed(master_seed, {tag("profile"), e, static_cast<std::uint64_t>(o)});
      profile.merge(profile_run(env, bank, options, seed));
    }
  }
  return profile;
}

ThresholdSet select_set(const SuppressionProfile& profile, double threshold_db) {
  ThresholdSet s;
  s.threshold_db = threshold_db;
  for (std::size_t p = 0; p < profile.max_suppression_db.size(); ++p)
    if (profile.max_suppression_db[p] > threshold_db) s.members.push_back(static_cast<int>(p));
  return s;
}

std::vector<std::pair<double, int>> set_size_curve(const SuppressionProfile& profile,
                                                   std::span<const double> thresholds_db) {
  if (!std::is_sorted(thresholds_db.begin(), thresholds_db.end()))
    throw std::invalid_argument("set_size_curve: thresholds must be ascending");
  std::vector<double> sorted = profile.max_suppression_db;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, int>> curve;
  curve.reserve(thresholds_db.size());
  for (double x : thresholds_db) {
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), x);
    curve.emplace_back(x, static_cast<int>(above));
  }
  return curve;
}

ThresholdSet select_budget(const SuppressionProfile& profile, std::size_t budget) {
  std::vector<double> sorted = profile.max_suppression_db;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  if (budget >= sorted.size()) return select_set(profile, -kInf);
  // Thresholding at the budget-th largest value keeps strictly larger ones;
  // ties at the cut are dropped so the size never exceeds the budget.
  return select_set(profile, sorted[budget]);
}

namespace {

std::string format_db(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9f", v);
  return buf;
}

double parse_db(const std::string& s) {
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
  return v;
}

}  // namespace

void write_profile_csv(std::ostream& out, const SuppressionProfile& profile) {
  out << "pattern_index,max_suppression_db\n";
  for (std::size_t p = 0; p < profile.max_suppression_db.size(); ++p)
    out << p << ',' << format_db(profile.max_suppression_db[p]) << '\n';
}

SuppressionProfile read_profile_csv(std::istream& in) {
  std::string line;
  while (std::getline(in, line) && (line.empty() || line[0] == '#')) {
  }
  if (line != "pattern_index,max_suppression_db")
    throw std::runtime_error("profile CSV: unexpected header '" + line + "'");
  auto profile = SuppressionProfile::empty();
  std::vector<bool> seen(profile.max_suppression_db.size(), false);
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("profile CSV: malformed row '" + line + "'");
    const int idx = std::stoi(line.substr(0, comma));
    if (idx < 0 || idx >= antenna::kConfigs) throw std::runtime_error("profile CSV: index out of range");
    profile.max_suppression_db[static_cast<std::size_t>(idx)] = parse_db(line.substr(comma + 1));
    seen[static_cast<std::size_t>(idx)] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw std::runtime_error("profile CSV: expected 4096 rows");
  return profile;
}

void write_pattern_set(std::ostream& out, std::span<const int> members) {
  for (int m : members) out << m << '\n';
}

std::vector<int> read_pattern_set(std::istream& in) {
  std::vector<int> members;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::size_t used = 0;
    const int v = std::stoi(line, &used);
    if (used != line.size()) throw std::runtime_error("pattern set: bad line '" + line + "'");
    if (v < 0 || v >= antenna::kConfigs) throw std::runtime_error("pattern set: index out of range");
    members.push_back(v);
  }
  return members;
}

}  // namespace mrafd::heuristic
