#pragma once

// Empirical CDFs, SOI power loss and the fixed-schema CSV artifacts.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mrafd::metrics {

struct EmpiricalCdf {
  std::vector<double> sorted_values;
  /// probabilities[i] = (i + 1) / n.
  std::vector<double> probabilities;

  /// Fraction of samples <= x.
  double eval(double x) const;
  double mean() const;
};

/// Throws std::invalid_argument on empty input or NaN.
EmpiricalCdf empirical_cdf(std::span<const double> values);

/// sup |F_n(x) - F(x)| over the sample points (both one-sided limits).
double ks_statistic(const EmpiricalCdf& cdf, const std::function<double(double)>& reference);

/// Two-sided 95% Kolmogorov-Smirnov band for n samples (asymptotic).
double ks_critical_95(std::size_t n);

/// Received SOI power of one run (linear) tagged with what produced it.
struct PowerRun {
  std::string environment;
  std::uint64_t seed = 0;
  double soi_power = 0.0;
};

struct SoiLossRecord {
  std::string environment;
  std::uint64_t seed = 0;
  double loss_db = 0.0;
};

/// loss = 10 log10(P_omni / P_mra); negative is a gain. Throws
/// std::invalid_argument if the runs come from different environments or seeds.
SoiLossRecord soi_power_loss(const PowerRun& mra_run, const PowerRun& omni_run);

double mean(std::span<const double> values);

// Every artifact starts with "# config_hash: <hash>".
void write_hash_line(std::ostream& out, const std::string& config_hash);
/// Reads the hash from an artifact's first line; empty if absent.
std::string read_hash_line(std::istream& in);

void write_fig5_cdf(std::ostream& out, const std::string& config_hash, const EmpiricalCdf& omni,
                    const EmpiricalCdf& mra);

void write_fig8_curve(std::ostream& out, const std::string& config_hash,
                      std::span<const std::pair<double, int>> curve);

struct SweepRow {
  std::string environment;
  std::string set_name;
  double period_s = 0.0;
  double overhead = 0.0;
  double mean_suppression_db = 0.0;
  int trainings = 0;
};
void write_fig10_sweep(std::ostream& out, const std::string& config_hash, std::span<const SweepRow> rows);

struct ResidualRow {
  std::string set_name;
  double tx_power_dbm = 0.0;
  double pre_dc_dbm = 0.0;
  double post_dc_dbm = 0.0;
  double passive_db = 0.0;
  double dc_gain_db = 0.0;
  double total_db = 0.0;
};
void write_fig11_residual(std::ostream& out, const std::string& config_hash,
                          std::span<const ResidualRow> rows);

struct RateRow {
  std::string set_name;
  double tx_power_dbm = 0.0;
  double r_fd = 0.0;
  double r_hd = 0.0;
  double gain_percent = 0.0;
};
void write_fig12_rates(std::ostream& out, const std::string& config_hash, std::span<const RateRow> rows);

/// Fixed-precision rendering used by every artifact ("inf"/"-inf"/"nan" spelled out).
std::string fmt(double v, int decimals = 6);

}  // namespace mrafd::metrics
