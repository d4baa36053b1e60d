#include "mrafd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace mrafd::metrics {

double EmpiricalCdf::eval(double x) const {
  const auto it = std::upper_bound(sorted_values.begin(), sorted_values.end(), x);
  return static_cast<double>(it - sorted_values.begin()) / static_cast<double>(sorted_values.size());
}

double EmpiricalCdf::mean() const { return metrics::mean(sorted_values); }

EmpiricalCdf empirical_cdf(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("empirical_cdf: no values");
  EmpiricalCdf cdf;
  cdf.sorted_values.assign(values.begin(), values.end());
  if (std::any_of(values.begin(), values.end(), [](double v) { return std::isnan(v); }))
    throw std::invalid_argument("empirical_cdf: NaN value");
  std::sort(cdf.sorted_values.begin(), cdf.sorted_values.end());
  const double n = static_cast<double>(values.size());
  cdf.probabilities.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) cdf.probabilities[i] = static_cast<double>(i + 1) / n;
  return cdf;
}

double ks_statistic(const EmpiricalCdf& cdf, const std::function<double(double)>& reference) {
  double d = 0.0;
  const double n = static_cast<double>(cdf.sorted_values.size());
  for (std::size_t i = 0; i < cdf.sorted_values.size(); ++i) {
    const double f = reference(cdf.sorted_values[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical_95(std::size_t n) { return 1.358 / std::sqrt(static_cast<double>(n)); }

SoiLossRecord soi_power_loss(const PowerRun& mra_run, const PowerRun& omni_run) {
  if (mra_run.environment != omni_run.environment || mra_run.seed != omni_run.seed)
    throw std::invalid_argument("soi_power_loss: runs differ in environment or seed");
  return {mra_run.environment, mra_run.seed, 10.0 * std::log10(omni_run.soi_power / mra_run.soi_power)};
}

double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean: no values");
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / static_cast<double>(values.size());
}

std::string fmt(double v, int decimals) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

void write_hash_line(std::ostream& out, const std::string& config_hash) {
  out << "# config_hash: " << config_hash << '\n';
}

std::string read_hash_line(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) return {};
  const std::string prefix = "# config_hash: ";
  if (line.rfind(prefix, 0) != 0) return {};
  return line.substr(prefix.size());
}

void write_fig5_cdf(std::ostream& out, const std::string& config_hash, const EmpiricalCdf& omni,
                    const EmpiricalCdf& mra) {
  write_hash_line(out, config_hash);
  out << "antenna,suppression_db,probability\n";
  auto emit = [&](const char* name, const EmpiricalCdf& c) {
    for (std::size_t i = 0; i < c.sorted_values.size(); ++i)
      out << name << ',' << fmt(c.sorted_values[i]) << ',' << fmt(c.probabilities[i], 9) << '\n';
  };
  emit("omni", omni);
  emit("mra", mra);
}

void write_fig8_curve(std::ostream& out, const std::string& config_hash,
                      std::span<const std::pair<double, int>> curve) {
  write_hash_line(out, config_hash);
  out << "threshold_db,count\n";
  for (const auto& [x, n] : curve) out << fmt(x, 3) << ',' << n << '\n';
}

void write_fig10_sweep(std::ostream& out, const std::string& config_hash, std::span<const SweepRow> rows) {
  write_hash_line(out, config_hash);
  out << "environment,set,period_s,overhead,mean_suppression_db,trainings\n";
  for (const auto& r : rows)
    out << r.environment << ',' << r.set_name << ',' << fmt(r.period_s) << ',' << fmt(r.overhead, 9) << ','
        << fmt(r.mean_suppression_db) << ',' << r.trainings << '\n';
}

void write_fig11_residual(std::ostream& out, const std::string& config_hash,
                          std::span<const ResidualRow> rows) {
  write_hash_line(out, config_hash);
  out << "set,tx_power_dbm,pre_dc_dbm,post_dc_dbm,passive_db,dc_gain_db,total_db\n";
  for (const auto& r : rows)
    out << r.set_name << ',' << fmt(r.tx_power_dbm, 3) << ',' << fmt(r.pre_dc_dbm) << ',' << fmt(r.post_dc_dbm)
        << ',' << fmt(r.passive_db) << ',' << fmt(r.dc_gain_db) << ',' << fmt(r.total_db) << '\n';
}

void write_fig12_rates(std::ostream& out, const std::string& config_hash, std::span<const RateRow> rows) {
  write_hash_line(out, config_hash);
  out << "set,tx_power_dbm,r_fd,r_hd,gain_percent\n";
  for (const auto& r : rows)
    out << r.set_name << ',' << fmt(r.tx_power_dbm, 3) << ',' << fmt(r.r_fd) << ',' << fmt(r.r_hd) << ','
        << fmt(r.gain_percent) << '\n';
}

}  // namespace mrafd::metrics
