#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mrafd {

/// Additive radio impairments. Powers are handled in mW internally.
struct ImpairmentConfig {
  double tx_power_dbm = 5.0;
  /// Transmitter noise relative to the transmit power; -inf disables it.
  double tx_noise_dbc = -40.0;
  /// Receiver noise power; -inf disables it.
  double rx_noise_floor_dbm = -85.0;

  double tx_power_mw() const { return std::pow(10.0, tx_power_dbm / 10.0); }
  double tx_noise_mw() const { return tx_power_mw() * std::pow(10.0, tx_noise_dbc / 10.0); }
  double rx_noise_mw() const { return std::pow(10.0, rx_noise_floor_dbm / 10.0); }

  void validate() const {
    if (!(tx_noise_dbc < 0.0))
      throw std::invalid_argument("impairments: tx_noise_dbc must be negative");
    if (std::isnan(rx_noise_floor_dbm))
      throw std::invalid_argument("impairments: rx_noise_floor_dbm must be a number");
    if (!std::isfinite(tx_power_dbm))
      throw std::invalid_argument("impairments: tx_power_dbm must be finite");
  }

  static ImpairmentConfig noise_free(double tx_power_dbm = 0.0) {
    const double off = -std::numeric_limits<double>::infinity();
    return {tx_power_dbm, off, off};
  }
};

}  // namespace mrafd
