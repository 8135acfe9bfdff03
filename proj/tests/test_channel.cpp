#include <doctest.h>

#include <Eigen/SVD>
#include <cmath>
#include <sstream>

#include "uavris/channel.hpp"

using namespace uavris;
using doctest::Approx;

TEST_CASE("departure angles match the closed-form geometry") {
  // directly overhead: maximal elevation, azimuth falls back to 0
  AodAngles over = aod_angles({0, 0, 50}, {0, 0, 0});
  CHECK(over.theta == Approx(kPi / 2).epsilon(1e-12));
  CHECK(over.phi == 0.0);

  // 45-degree elevation: height equals the horizontal offset
  AodAngles diag = aod_angles({0, 0, 50}, {50, 0, 0});
  CHECK(diag.theta == Approx(kPi / 4).epsilon(1e-12));

  // offset purely along +y: zero azimuth
  AodAngles north = aod_angles({0, 1, 50}, {0, 0, 0});
  CHECK(north.phi == Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(aod_angles({1, 2, 3}, {1, 2, 3}), ValidationError);
}

TEST_CASE("elevation is rotation-invariant and azimuth folds by the rotation") {
  Rng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const Position air{rng.uniform(-80, 80), rng.uniform(-80, 80), rng.uniform(30, 100)};
    const double dx = rng.uniform(-60, 60), dy = rng.uniform(-60, 60);
    if (std::hypot(dx, dy) < 1e-6) continue;
    const Position gnd{air.x + dx, air.y + dy, 0.0};
    const AodAngles base = aod_angles(air, gnd);

    const double rot = rng.uniform(0.0, 2.0 * kPi);
    // rotate the ground offset about the vertical axis through the airborne node
    const double rx = dx * std::cos(rot) - dy * std::sin(rot);
    const double ry = dx * std::sin(rot) + dy * std::cos(rot);
    const AodAngles turned = aod_angles(air, {air.x + rx, air.y + ry, 0.0});

    CHECK(turned.theta == Approx(base.theta).epsilon(1e-10));
    // the azimuth convention folds signed angles onto [0, pi]; a
    // counterclockwise turn of the ground offset subtracts from the heading
    const double beta = std::atan2(-dx, -dy);  // offset direction seen from above
    CHECK(turned.phi == Approx(std::acos(std::cos(beta - rot))).epsilon(1e-8));
  }
}

TEST_CASE("array response is a pure-phase steering vector") {
  const Eigen::VectorXcd trivial = aar_vector({0.3, 1.1}, 1, 1);
  REQUIRE(trivial.size() == 1);
  CHECK(std::abs(trivial[0] - cd(1.0, 0.0)) < 1e-15);

  // half-wavelength spacing, grazing angle: alternating signs
  const Eigen::VectorXcd alt = aar_vector({kPi / 2, 0.0}, 4, 1, 0.5);
  REQUIRE(alt.size() == 4);
  for (int k = 0; k < 4; ++k) {
    const double expect = (k % 2 == 0) ? 1.0 : -1.0;
    CHECK(alt[k].real() == Approx(expect).epsilon(1e-12));
    CHECK(alt[k].imag() == Approx(0.0).scale(1.0).epsilon(1e-12));
  }

  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const AodAngles a{rng.uniform(0, kPi / 2), rng.uniform(0, kPi)};
    const Eigen::VectorXcd v = aar_vector(a, 3, 2);
    REQUIRE(v.size() == 6);
    CHECK(std::abs(v[0] - cd(1.0, 0.0)) < 1e-12);
    for (int n = 0; n < v.size(); ++n) CHECK(std::abs(v[n]) == Approx(1.0).epsilon(1e-12));
  }

  CHECK_THROWS_AS(aar_vector({0.1, 0.1}, 0, 2), ValidationError);
}

TEST_CASE("line-of-sight gain follows the exact distance law") {
  const double lambda = 0.19986163866666667;

  // reference geometry at 50 m
  const A2gChannel ch = a2g_channel({0, 0, 50}, {0, 0, 0}, lambda, 2, 2);
  REQUIRE(ch.gain.size() == 4);
  for (int n = 0; n < 4; ++n)
    CHECK(std::abs(ch.gain[n]) == Approx(0.00031808967728246283).epsilon(1e-9));

  // modulus = (lambda/4pi)/distance for arbitrary geometry
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const Position air{rng.uniform(-90, 90), rng.uniform(-90, 90), rng.uniform(30, 100)};
    const Position gnd{rng.uniform(-90, 90), rng.uniform(-90, 90), 0.0};
    const A2gChannel c = a2g_channel(air, gnd, lambda, 2, 2);
    const double expect = lambda / (4.0 * kPi) / distance(air, gnd);
    for (int n = 0; n < c.gain.size(); ++n)
      CHECK(std::abs(c.gain[n]) == Approx(expect).epsilon(1e-12));
  }

  // unit modulus exactly at distance lambda/(4 pi); halves when doubled
  const double d0 = lambda / (4.0 * kPi);
  const A2gChannel unit = a2g_channel({0, 0, d0}, {0, 0, 0}, lambda, 1, 1);
  CHECK(std::abs(unit.gain[0]) == Approx(1.0).epsilon(1e-12));
  const A2gChannel twice = a2g_channel({0, 0, 2 * d0}, {0, 0, 0}, lambda, 1, 1);
  CHECK(std::abs(twice.gain[0]) == Approx(0.5).epsilon(1e-12));

  // gain magnitude is continuous across the overhead fallback
  const A2gChannel at = a2g_channel({0, 0, 50}, {0, 0, 0}, lambda, 2, 2);
  const A2gChannel near = a2g_channel({0, 0, 50}, {1e-7, 0, 0}, lambda, 2, 2);
  for (int n = 0; n < 4; ++n)
    CHECK(std::abs(at.gain[n]) == Approx(std::abs(near.gain[n])).epsilon(1e-9));
}

TEST_CASE("small-cell path gain matches the configured loss law") {
  NetworkConfig cfg = default_config();
  CHECK(mmw_path_gain(cfg, 100.0) == Approx(2.2956496821830556e-15).epsilon(1e-9));
  // inverse-square by default
  CHECK(mmw_path_gain(cfg, 50.0) / mmw_path_gain(cfg, 100.0) == Approx(4.0).epsilon(1e-12));
  cfg.path_loss_exponent = 3.0;
  CHECK(mmw_path_gain(cfg, 50.0) / mmw_path_gain(cfg, 100.0) == Approx(8.0).epsilon(1e-12));
  CHECK_THROWS_AS(mmw_path_gain(cfg, 0.0), ValidationError);
}

TEST_CASE("fading draws are reproducible and hit the mean-power law") {
  NetworkConfig cfg = default_config();
  const double dist = 40.0;
  const double want = mmw_path_gain(cfg, dist);

  SUBCASE("identical seeds give identical draws") {
    Rng a(42), b(42);
    const Eigen::VectorXcd ha = sample_mmw_channel(a, cfg, dist, true);
    const Eigen::VectorXcd hb = sample_mmw_channel(b, cfg, dist, true);
    CHECK((ha - hb).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("pure scattering: Monte-Carlo mean power within 2 percent") {
    cfg.rician_factor = 0.0;
    Rng rng(5);
    double acc = 0.0;
    const int draws = 100000;
    for (int d = 0; d < draws; ++d)
      acc += sample_mmw_channel(rng, cfg, dist, true).squaredNorm();
    const double mean_entry = acc / draws / cfg.sbs_antennas;
    CHECK(mean_entry == Approx(want).epsilon(0.02));
  }

  SUBCASE("serving-link draws keep the same mean power") {
    Rng rng(6);
    double acc = 0.0;
    const int draws = 100000;
    for (int d = 0; d < draws; ++d)
      acc += sample_mmw_channel(rng, cfg, dist, true).squaredNorm();
    CHECK(acc / draws / cfg.sbs_antennas == Approx(want).epsilon(0.02));
  }

  SUBCASE("huge direct-path dominance collapses the variance") {
    cfg.rician_factor = 1e12;
    Eigen::VectorXcd mean = Eigen::VectorXcd::Zero(cfg.sbs_antennas);
    std::vector<Eigen::VectorXcd> draws;
    for (int d = 0; d < 200; ++d) {
      Rng rng(1000 + d);
      draws.push_back(sample_mmw_channel(rng, cfg, dist, true));
      mean += draws.back();
    }
    mean /= 200.0;
    double var = 0.0;
    for (const auto& h : draws) var += (h - mean).squaredNorm();
    var /= 200.0;
    CHECK(var < 1e-8 * want);
    CHECK(mean.squaredNorm() == Approx(want * cfg.sbs_antennas).epsilon(1e-4));
  }
}

TEST_CASE("panel-feed matrix is a perturbed outer product of steering vectors") {
  NetworkConfig cfg = default_config();
  const Position uav{20, -30, 60};

  SUBCASE("no scattering: exactly rank one with the distance-law magnitude") {
    cfg.ris_scatter_power = 0.0;
    Rng rng(3);
    const Eigen::MatrixXcd g = mbs_ris_channel(rng, cfg, uav);
    REQUIRE(g.rows() == cfg.ris_elements());
    REQUIRE(g.cols() == cfg.mbs_antennas);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(g);
    CHECK(svd.singularValues()(1) < 1e-14 * svd.singularValues()(0));
    const double eta = cfg.wavelength() / (4.0 * kPi);
    const double d = distance(uav, cfg.mbs_position);
    CHECK(std::abs(g(0, 0)) == Approx(eta / d).epsilon(1e-10));
  }

  SUBCASE("default scattering makes it full rank but close to rank one") {
    Rng rng(3);
    const Eigen::MatrixXcd g = mbs_ris_channel(rng, cfg, uav);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(g);
    CHECK(svd.singularValues()(1) > 0.0);
    CHECK(svd.singularValues()(1) < svd.singularValues()(0));
  }
}

TEST_CASE("slot channel sets are deterministic in seed, slot, and geometry") {
  NetworkConfig cfg = default_config();
  const std::vector<Position> uavs = {{10, 5, 50}};

  const ChannelSet a = build_channel_set(cfg, uavs, 99, 2);
  const ChannelSet b = build_channel_set(cfg, uavs, 99, 2);
  CHECK((a.h(1, 0, 2) - b.h(1, 0, 2)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.g_mbs_ris(0, 0) - b.g_mbs_ris(0, 0)).cwiseAbs().maxCoeff() == 0.0);

  const ChannelSet c = build_channel_set(cfg, uavs, 100, 2);
  CHECK((a.h(1, 0, 2) - c.h(1, 0, 2)).cwiseAbs().maxCoeff() > 0.0);
  const ChannelSet d = build_channel_set(cfg, uavs, 99, 3);
  CHECK((a.h(1, 0, 2) - d.h(1, 0, 2)).cwiseAbs().maxCoeff() > 0.0);

  // moving the platform changes only the links that see it
  const ChannelSet e = build_channel_set(cfg, {{15, 5, 50}}, 99, 2);
  CHECK((a.h(1, 0, 2) - e.h(1, 0, 2)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.g_ris_mue(0, 0, 1) - e.g_ris_mue(0, 0, 1)).cwiseAbs().maxCoeff() > 0.0);

  CHECK_NOTHROW(a.validate());
  CHECK_THROWS_AS(build_channel_set(cfg, {}, 99, 0), ValidationError);
}

TEST_CASE("channel dumps round-trip through the CSV form") {
  NetworkConfig cfg = default_config();
  const ChannelSet a = build_channel_set(cfg, {{10, 5, 50}}, 7, 1);
  std::stringstream buf;
  dump_channels(a, buf);
  const ChannelSet b = load_channels(buf);

  for (int l = 0; l < a.mmw_subcarriers; ++l)
    for (int j = 0; j < a.num_sbs; ++j)
      for (int s = 0; s < a.num_sues; ++s)
        CHECK((a.h(l, j, s) - b.h(l, j, s)).cwiseAbs().maxCoeff() < 1e-15);
  for (int x = 0; x < a.muw_subcarriers; ++x) {
    CHECK((a.g_mbs_ris(x, 0) - b.g_mbs_ris(x, 0)).cwiseAbs().maxCoeff() < 1e-15);
    for (int m = 0; m < a.num_mues; ++m)
      CHECK((a.g_ris_mue(x, 0, m) - b.g_ris_mue(x, 0, m)).cwiseAbs().maxCoeff() < 1e-15);
  }

  std::istringstream garbage("kind,i0,i1,i2,entry,re,im\nbogus,0,0,0,0,1,2\n");
  CHECK_THROWS_AS(load_channels(garbage), ValidationError);
}
