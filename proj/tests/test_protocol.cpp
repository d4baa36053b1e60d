#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "mrafd/protocol.hpp"
#include "support.hpp"

using namespace mrafd;
using namespace mrafd::protocol;

namespace {

TrainingFrameSpec spec_with(std::vector<int> set) {
  TrainingFrameSpec s;
  s.pattern_set = std::move(set);
  return s;
}

std::vector<int> first_n(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

channel::Environment frozen(std::uint64_t seed) {
  channel::Environment env;
  env.dynamics_rho = 1.0;
  env.si_nlos_rel_db = -15.0;
  env.seed = seed;
  return env;
}

}  // namespace

TEST_CASE("training duration and overhead arithmetic") {
  CHECK(training_duration(spec_with(first_n(4096))) == doctest::Approx(8.192e-3).epsilon(1e-12));
  CHECK(training_duration(spec_with(first_n(1000))) == doctest::Approx(2.0e-3).epsilon(1e-12));
  CHECK(training_duration(spec_with(first_n(300))) == doctest::Approx(0.6e-3).epsilon(1e-12));
  CHECK(spec_with({}).segment_ns() == 2000);

  const double o = compute_overhead({1.0, spec_with(first_n(4096))});
  CHECK(o == doctest::Approx(8.192e-3 / (1.0 - 8.192e-3)));
  CHECK(period_for_overhead(spec_with(first_n(300)), 0.01) == doctest::Approx(0.0606));
  CHECK_THROWS(compute_overhead({0.005, spec_with(first_n(4096))}));
  CHECK_THROWS(period_for_overhead(spec_with(first_n(300)), 0.0));
}

TEST_CASE("spec validation") {
  auto s = spec_with({0});
  s.null_samples = 20;
  CHECK_THROWS_WITH(s.validate(), doctest::Contains("null_samples"));
  s = spec_with({0});
  s.guard_samples = 30;
  CHECK_THROWS_WITH(s.validate(), doctest::Contains("guard_samples"));
  s = spec_with({0});
  s.gap_samples = 4;
  CHECK_THROWS_WITH(s.validate(), doctest::Contains("gap_samples"));
}

TEST_CASE("training sequence has ideal periodic autocorrelation") {
  for (int n : {22, 23, 64}) {
    const auto z = training_sequence(n);
    for (int lag = 0; lag < n; ++lag) {
      std::complex<double> acc{};
      for (int k = 0; k < n; ++k) acc += z[static_cast<std::size_t>(k)] * std::conj(z[static_cast<std::size_t>((k + lag) % n)]);
      CHECK(std::abs(acc) == doctest::Approx(lag == 0 ? n : 0.0).epsilon(1e-9).scale(n));
    }
  }
  CHECK_THROWS(training_sequence(0));
}

TEST_CASE("training waveform layout") {
  const auto spec = spec_with({3, 9});
  const auto self = training_waveform(spec, Role::Self);
  const auto peer = training_waveform(spec, Role::Peer);
  REQUIRE(self.size() == 2u * 80u);
  for (int s = 0; s < 2; ++s) {
    for (int n = 0; n < 80; ++n) {
      const auto i = static_cast<std::size_t>(s * 80 + n);
      const bool in_data = n >= 20 && n < 50;
      const bool in_null = n >= 50;
      CHECK(std::abs(self[i]) == doctest::Approx(in_data ? 1.0 : 0.0));
      CHECK(std::abs(peer[i]) == doctest::Approx(in_null ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("RSS estimate") {
  std::vector<std::complex<double>> x = {{1, 0}, {0, 2}, {3, 4}};
  CHECK(estimate_rss(x) == doctest::Approx(10.0));
  CHECK_THROWS(estimate_rss({}));
}

TEST_CASE("noise-free RSS is exactly the realized channel energy times power") {
  const auto& bank = test::default_bank();
  const auto imp = ImpairmentConfig::noise_free(3.0);
  channel::LinkState state(frozen(4), 4);
  const std::vector<int> set = {0, 17, 2048, 4095};
  Rng rng(1);
  const auto res = run_training(state, bank, spec_with(set), imp, rng);
  REQUIRE(res.measurements.size() == set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& pat = bank[static_cast<std::size_t>(set[i])];
    const double si = channel::realize_channel(state.si(), pat).energy() * imp.tx_power_mw();
    const double soi = channel::realize_channel(state.soi(), pat).energy() * imp.tx_power_mw();
    CHECK(res.measurements[i].pattern_index == set[i]);
    CHECK(res.measurements[i].si_power == doctest::Approx(std::max(si, kRssFloor)).epsilon(1e-9));
    CHECK(res.measurements[i].soi_power == doctest::Approx(std::max(soi, kRssFloor)).epsilon(1e-9));
  }
  CHECK(state.time_ns() == 4 * 2000);
}

TEST_CASE("noise-free selection equals the brute-force SIR argmax") {
  const auto& bank = test::default_bank();
  const auto imp = ImpairmentConfig::noise_free(0.0);
  const auto spec = spec_with(full_pattern_set());
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    channel::LinkState state(frozen(seed), seed);
    int best = 0;
    double best_sir = -1e300;
    for (int p = 0; p < 4096; ++p) {
      const auto& pat = bank[static_cast<std::size_t>(p)];
      const double sir = channel::realize_channel(state.soi(), pat).energy() /
                         channel::realize_channel(state.si(), pat).energy();
      if (sir > best_sir) {
        best_sir = sir;
        best = p;
      }
    }
    Rng rng(seed);
    CHECK(run_training(state, bank, spec, imp, rng).chosen_pattern == best);
  }
}

TEST_CASE("select_pattern breaks ties toward the lowest index") {
  std::vector<SegmentMeasurement> m = {{9, 1, 1, 5.0}, {4, 1, 1, 5.0}, {7, 1, 1, 3.0}};
  CHECK(select_pattern(m) == 4);
  m.push_back({2, 1, 1, 5.0});
  CHECK(select_pattern(m) == 2);
  CHECK_THROWS(select_pattern({}));
}

TEST_CASE("run_training rejects bad inputs") {
  const auto& bank = test::default_bank();
  channel::LinkState state(frozen(1), 1);
  Rng rng(1);
  CHECK_THROWS_AS(run_training(state, bank, spec_with({4096}), ImpairmentConfig{}, rng), std::out_of_range);
  auto env = frozen(1);
  env.max_delay_bins = 12;
  env.n_reflectors = 40;
  channel::LinkState wide(env, 1);
  CHECK_THROWS_AS(run_training(wide, bank, spec_with({0}), ImpairmentConfig{}, rng), std::invalid_argument);
}

TEST_CASE("a superset never selects a worse pattern") {
  const auto& bank = test::default_bank();
  const auto imp = ImpairmentConfig::noise_free(0.0);
  const auto small = first_n(64);
  const auto large = first_n(1024);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    channel::LinkState s1(frozen(seed), seed), s2(frozen(seed), seed);
    Rng rng(1);
    const auto a = run_training(s1, bank, spec_with(small), imp, rng);
    const auto b = run_training(s2, bank, spec_with(large), imp, rng);
    double sir_a = 0, sir_b = 0;
    for (auto& m : a.measurements) if (m.pattern_index == a.chosen_pattern) sir_a = m.sir_db;
    for (auto& m : b.measurements) if (m.pattern_index == b.chosen_pattern) sir_b = m.sir_db;
    CHECK(sir_b >= sir_a);
  }
}

TEST_CASE("training is deterministic given seeds") {
  const auto& bank = test::default_bank();
  auto env = frozen(3);
  env.dynamics_rho = 0.99;
  const auto spec = spec_with(first_n(200));
  channel::LinkState a(env, 3), b(env, 3);
  Rng ra(8), rb(8);
  const auto x = run_training(a, bank, spec, ImpairmentConfig{}, ra);
  const auto y = run_training(b, bank, spec, ImpairmentConfig{}, rb);
  CHECK(x.chosen_pattern == y.chosen_pattern);
  for (std::size_t i = 0; i < x.measurements.size(); ++i) CHECK(x.measurements[i].sir_db == y.measurements[i].sir_db);
}

TEST_CASE("static channel: every retraining period gives the same suppression") {
  const auto& bank = test::default_bank();
  const auto imp = ImpairmentConfig::noise_free(0.0);
  const std::vector<double> periods = {0.01, 0.05, 0.2};
  const auto pts = retraining_sweep(frozen(2), bank, spec_with(first_n(300)), periods, {0.4, 1e-3}, imp, 2, 3);
  REQUIRE(pts.size() == 3);
  CHECK(pts[0].trainings == 40);
  CHECK(pts[1].trainings == 8);
  CHECK(pts[2].trainings == 2);
  for (const auto& p : pts) CHECK(p.mean_suppression_db == doctest::Approx(pts[0].mean_suppression_db));
}

TEST_CASE("selection CSV schema") {
  SelectionResult r;
  r.measurements = {{5, 1e-3, 1e-6, -30.0}};
  std::ostringstream out;
  write_selection_csv(out, r);
  CHECK(out.str() == "pattern_index,si_db,soi_db,sir_db\n5,-30.000000,-60.000000,-30.000000\n");
}
