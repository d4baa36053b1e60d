#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mrafd/channel.hpp"
#include "mrafd/simd.hpp"
#include "support.hpp"

using namespace mrafd;
using namespace mrafd::channel;

namespace {

double db(double x) { return 10.0 * std::log10(x); }

}  // namespace

TEST_CASE("SI path powers average to the configured levels") {
  Environment env;
  env.si_los_power_db = -20.0;
  env.si_nlos_rel_db = -3.0;
  double los = 0.0, nlos = 0.0;
  const int runs = 1000;
  for (int s = 0; s < runs; ++s) {
    Rng rng(static_cast<std::uint64_t>(s) + 1);
    const auto set = generate_si_paths(env, rng);
    REQUIRE(set.paths.size() == static_cast<std::size_t>(env.n_reflectors + 1));
    REQUIRE(set.paths[0].kind == PathKind::Los);
    REQUIRE(set.paths[0].delay_bins == 0);
    CHECK(set.paths[0].aoa == doctest::Approx(env.si_los_azimuth_rad));
    los += std::norm(set.paths[0].amplitude);
    for (std::size_t i = 1; i < set.paths.size(); ++i) {
      REQUIRE(set.paths[i].delay_bins >= 1);
      REQUIRE(set.paths[i].delay_bins <= env.max_delay_bins);
      nlos += std::norm(set.paths[i].amplitude);
    }
  }
  CHECK(std::abs(db(los / runs) - (-20.0)) < 1e-9);
  CHECK(std::abs(db(nlos / runs) - (-23.0)) < 0.5);
}

TEST_CASE("SOI power follows the path loss with or without LOS") {
  for (bool blocked : {false, true}) {
    Environment env;
    env.los_blocked = blocked;
    env.soi_pathloss_db = 55.0;
    double total = 0.0;
    const int runs = 1000;
    for (int s = 0; s < runs; ++s) {
      Rng rng(static_cast<std::uint64_t>(s) + 17);
      const auto set = generate_soi_paths(env, rng);
      if (blocked) {
        for (const auto& c : set.paths) REQUIRE(c.kind == PathKind::Nlos);
      } else {
        REQUIRE(set.paths[0].kind == PathKind::Los);
      }
      total += set.total_power();
    }
    const double nlos_factor = blocked ? 1.0 : 1.0 + std::pow(10.0, env.soi_nlos_rel_db / 10.0);
    CHECK(std::abs(db(total / runs) - db(std::pow(10.0, -5.5) * nlos_factor)) < 0.5);
  }
}

TEST_CASE("orientation sets the peer LOS azimuth") {
  Environment env;
  for (auto [o, az] : {std::pair{Orientation::FaceToFace, 0.0}, std::pair{Orientation::Opposite, std::numbers::pi},
                       std::pair{Orientation::SideToSideLeft, std::numbers::pi / 2},
                       std::pair{Orientation::SideToSideRight, 3 * std::numbers::pi / 2}}) {
    env.orientation = o;
    Rng rng(3);
    CHECK(generate_soi_paths(env, rng).paths[0].aoa == doctest::Approx(az));
    CHECK(parse_orientation(to_string(o)) == o);
  }
  env.peer_azimuth_rad = 1.0;
  Rng rng(3);
  CHECK(generate_soi_paths(env, rng).paths[0].aoa == doctest::Approx(1.0));
  CHECK_THROWS(parse_orientation("sideways"));
}

TEST_CASE("no reflectors leaves only the LOS path") {
  Environment env;
  env.n_reflectors = 0;
  Rng rng(1);
  const auto set = generate_si_paths(env, rng);
  CHECK(set.paths.size() == 1);
  CHECK(set.max_delay() == 0);
}

TEST_CASE("realize_channel equals a per-path oracle and is linear") {
  const auto& bank = test::default_bank();
  Environment env;
  env.si_nlos_rel_db = -5.0;
  Rng rng(5);
  const auto set = generate_si_paths(env, rng);
  for (int p : {0, 100, 4095}) {
    const auto& pat = bank[static_cast<std::size_t>(p)];
    const auto r = realize_channel(set, pat);
    CHECK(r.pattern_index == p);
    std::vector<cdouble> taps(static_cast<std::size_t>(set.max_delay()) + 1);
    for (const auto& c : set.paths) {
      const auto k = antenna::azimuth_bin(c.aoa, pat.bins());
      taps[static_cast<std::size_t>(c.delay_bins)] += c.amplitude * pat.gains[k];
    }
    REQUIRE(r.taps.size() == taps.size());
    for (std::size_t d = 0; d < taps.size(); ++d) CHECK(std::abs(r.taps[d] - taps[d]) < 1e-15);

    auto scaled = set;
    for (auto& c : scaled.paths) c.amplitude *= cdouble(0.5, -2.0);
    const auto rs = realize_channel(scaled, pat);
    for (std::size_t d = 0; d < taps.size(); ++d) CHECK(std::abs(rs.taps[d] - cdouble(0.5, -2.0) * r.taps[d]) < 1e-12);
  }
  // Omni: plain sum of amplitudes per delay.
  const auto omni = realize_channel(set, antenna::omni_pattern(360));
  CHECK(omni.energy() > 0.0);
  CHECK(omni.pattern_index == antenna::kOmni);
}

TEST_CASE("a pattern null on the only path gives infinite suppression") {
  Environment env;
  env.n_reflectors = 0;
  Rng rng(1);
  const auto set = generate_si_paths(env, rng);
  auto pat = antenna::omni_pattern(360);
  pat.gains[antenna::azimuth_bin(env.si_los_azimuth_rad, 360)] = 0.0;
  const auto r = realize_channel(set, pat);
  CHECK(r.energy() == 0.0);
  CHECK(std::isinf(passive_suppression_db(r)));
}

TEST_CASE("passive suppression arithmetic") {
  ChannelRealization r;
  r.taps = {0.01};
  CHECK(passive_suppression_db(r) == doctest::Approx(40.0).epsilon(1e-12));
  r.taps = {0.01, cdouble(0.0, 0.01)};
  CHECK(passive_suppression_db(r) == doctest::Approx(36.9897).epsilon(1e-5));
  r.link = Link::Soi;
  CHECK_THROWS_AS(passive_suppression_db(r), std::invalid_argument);
}

TEST_CASE("evolve keeps LOS fixed and honours rho extremes") {
  Environment env;
  env.si_nlos_rel_db = 0.0;
  Rng rng(9);
  const auto set = generate_si_paths(env, rng);

  env.dynamics_rho = 1.0;
  const auto same = evolve(set, 50, env, rng);
  for (std::size_t i = 0; i < set.paths.size(); ++i) CHECK(same.paths[i].amplitude == set.paths[i].amplitude);

  env.dynamics_rho = 0.5;
  const auto moved = evolve(set, 3, env, rng);
  CHECK(moved.paths[0].amplitude == set.paths[0].amplitude);
  for (std::size_t i = 1; i < set.paths.size(); ++i) {
    CHECK(moved.paths[i].amplitude != set.paths[i].amplitude);
    CHECK(moved.paths[i].aoa == set.paths[i].aoa);
    CHECK(moved.paths[i].delay_bins == set.paths[i].delay_bins);
  }
  CHECK_THROWS(evolve(set, -1, env, rng));
}

TEST_CASE("AR(1) evolution is stationary with geometric correlation") {
  Environment env;
  env.si_nlos_rel_db = 0.0;
  env.n_reflectors = 4;
  env.dynamics_rho = 0.999;
  const int seeds = 1000, steps = 10000, lag = 100;
  double p0 = 0.0, p_end = 0.0;
  cdouble corr{};
  double corr_norm = 0.0;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(static_cast<std::uint64_t>(s) + 100);
    auto set = generate_si_paths(env, rng);
    for (std::size_t i = 1; i < set.paths.size(); ++i) p0 += std::norm(set.paths[i].amplitude);
    const auto before = set;
    const auto after_lag = evolve(set, lag, env, rng);
    for (std::size_t i = 1; i < set.paths.size(); ++i) {
      corr += after_lag.paths[i].amplitude * std::conj(before.paths[i].amplitude);
      corr_norm += before.paths[i].power;
    }
    set = evolve(after_lag, steps - lag, env, rng);
    for (std::size_t i = 1; i < set.paths.size(); ++i) p_end += std::norm(set.paths[i].amplitude);
  }
  CHECK(std::abs(db(p_end / p0)) < 0.5);
  CHECK(std::abs(corr.real() / corr_norm - std::pow(0.999, lag)) < 0.05);
}

TEST_CASE("link state evolves once per crossed step boundary") {
  Environment env;
  env.dynamics_rho = 0.9;
  env.si_nlos_rel_db = 0.0;
  LinkState a(env, 42), b(env, 42);
  a.advance_ns(3'000'000);
  for (int i = 0; i < 6; ++i) b.advance_ns(500'000);
  for (std::size_t i = 0; i < a.si().paths.size(); ++i) CHECK(a.si().paths[i].amplitude == b.si().paths[i].amplitude);
  CHECK(a.time_ns() == b.time_ns());

  LinkState c(env, 42);
  c.advance_ns(999'999);
  for (std::size_t i = 0; i < c.si().paths.size(); ++i)
    CHECK(c.si().paths[i].amplitude == LinkState(env, 42).si().paths[i].amplitude);
  CHECK_THROWS(c.advance_ns(-1));
  c.advance_to_ns(10);  // earlier than now: no-op
  CHECK(c.time_ns() == 999'999);
}

TEST_CASE("SIMD energies of weighted bins equal realized energies") {
  const auto& bank = test::default_bank();
  Environment env;
  env.si_nlos_rel_db = -10.0;
  Rng rng(77);
  const auto set = generate_si_paths(env, rng);
  const auto wb = weighted_bins(set, bank.bins());
  std::vector<double> e(bank.size());
  simd::pattern_energies(bank.bin_major(), wb, e);
  for (std::size_t p = 0; p < bank.size(); ++p) {
    const double ref = realize_channel(set, bank[p]).energy();
    // Absolute tolerance: deep nulls cancel, so relative error is meaningless there.
    REQUIRE(std::abs(e[p] - ref) <= 1e-12 * set.total_power() * 100.0);
  }
}

TEST_CASE("environment validation names the field") {
  Environment env;
  env.dynamics_rho = 1.5;
  CHECK_THROWS_WITH(env.validate(), doctest::Contains("dynamics_rho"));
  env = Environment{};
  env.n_reflectors = -1;
  CHECK_THROWS_WITH(env.validate(), doctest::Contains("n_reflectors"));
  env = Environment{};
  env.si_los_power_db = 3.0;
  CHECK_THROWS_WITH(env.validate(), doctest::Contains("si_los_power_db"));
}

TEST_CASE("channel generation is deterministic per seed") {
  Environment env;
  Rng a(123), b(123);
  const auto x = generate_si_paths(env, a);
  const auto y = generate_si_paths(env, b);
  for (std::size_t i = 0; i < x.paths.size(); ++i) {
    CHECK(x.paths[i].amplitude == y.paths[i].amplitude);
    CHECK(x.paths[i].aoa == y.paths[i].aoa);
  }
}
