#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "mrafd/metrics.hpp"

using namespace mrafd::metrics;

TEST_CASE("empirical CDF of small samples") {
  const std::vector<double> v = {3.0, 1.0, 2.0, 2.0};
  const auto c = empirical_cdf(v);
  CHECK(c.sorted_values == std::vector<double>{1.0, 2.0, 2.0, 3.0});
  CHECK(c.probabilities == std::vector<double>{0.25, 0.5, 0.75, 1.0});
  CHECK(c.eval(0.0) == 0.0);
  CHECK(c.eval(1.0) == 0.25);
  CHECK(c.eval(2.0) == 0.75);
  CHECK(c.eval(2.5) == 0.75);
  CHECK(c.eval(9.0) == 1.0);
  CHECK(c.mean() == doctest::Approx(2.0));
  CHECK_THROWS(empirical_cdf({}));
  const std::vector<double> bad = {1.0, std::nan("")};
  CHECK_THROWS(empirical_cdf(bad));
}

TEST_CASE("KS statistic of uniform samples is within the 95% band") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(5000);
  for (auto& x : v) x = u(rng);
  const auto c = empirical_cdf(v);
  const double d = ks_statistic(c, [](double x) { return std::clamp(x, 0.0, 1.0); });
  CHECK(d < ks_critical_95(v.size()));
  // A shifted reference is rejected.
  CHECK(ks_statistic(c, [](double x) { return std::clamp(x - 0.1, 0.0, 1.0); }) > ks_critical_95(v.size()));
  CHECK(ks_critical_95(100) == doctest::Approx(0.1358));
}

TEST_CASE("SOI power loss arithmetic") {
  const auto r = soi_power_loss({"room", 4, 1.0}, {"room", 4, 4.0});
  CHECK(r.loss_db == doctest::Approx(6.0206).epsilon(1e-4));
  CHECK(soi_power_loss({"room", 4, 4.0}, {"room", 4, 1.0}).loss_db == doctest::Approx(-r.loss_db));
  CHECK(soi_power_loss({"room", 4, 2.0}, {"room", 4, 2.0}).loss_db == 0.0);
  CHECK_THROWS(soi_power_loss({"room", 4, 1.0}, {"hall", 4, 1.0}));
  CHECK_THROWS(soi_power_loss({"room", 4, 1.0}, {"room", 5, 1.0}));
}

TEST_CASE("number formatting and hash lines") {
  CHECK(fmt(1.5) == "1.500000");
  CHECK(fmt(-2.0, 2) == "-2.00");
  CHECK(fmt(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(fmt(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(fmt(std::nan("")) == "nan");

  std::stringstream s;
  write_hash_line(s, "00ff00ff00ff00ff");
  s << "a,b\n";
  CHECK(read_hash_line(s) == "00ff00ff00ff00ff");
  std::stringstream none("a,b\n");
  CHECK(read_hash_line(none).empty());
}

TEST_CASE("artifact schemas") {
  std::ostringstream a;
  const std::vector<std::pair<double, int>> curve = {{40.0, 12}, {42.0, 7}};
  write_fig8_curve(a, "h", curve);
  CHECK(a.str() == "# config_hash: h\nthreshold_db,count\n40.000,12\n42.000,7\n");

  std::ostringstream b;
  const std::vector<SweepRow> rows = {{"env", "full", 0.5, 0.01, 50.0, 6}};
  write_fig10_sweep(b, "h", rows);
  CHECK(b.str().rfind("# config_hash: h\nenvironment,set,period_s,overhead,mean_suppression_db,trainings\n", 0) == 0);

  std::ostringstream c;
  const std::vector<ResidualRow> rr = {{"full", 5.0, -50.0, -80.0, 55.0, 30.0, 85.0}};
  write_fig11_residual(c, "h", rr);
  CHECK(c.str().find("set,tx_power_dbm,pre_dc_dbm,post_dc_dbm,passive_db,dc_gain_db,total_db\n") != std::string::npos);

  std::ostringstream d;
  const std::vector<RateRow> rates = {{"full", 5.0, 2.0, 1.1, 81.8}};
  write_fig12_rates(d, "h", rates);
  CHECK(d.str().find("set,tx_power_dbm,r_fd,r_hd,gain_percent\n") != std::string::npos);

  std::ostringstream e;
  const std::vector<double> o = {1.0, 2.0}, m = {3.0};
  write_fig5_cdf(e, "h", empirical_cdf(o), empirical_cdf(m));
  CHECK(e.str() ==
        "# config_hash: h\nantenna,suppression_db,probability\n"
        "omni,1.000000,0.500000000\nomni,2.000000,1.000000000\nmra,3.000000,1.000000000\n");
}
