#include <doctest.h>

#include <cmath>
#include <vector>

#include "shapemetrics/metric.hpp"
#include "support.hpp"

using namespace shapemetrics;
using namespace testsupport;

TEST_CASE("factor_values on the three families") {
  const FactorValues fl = factor_values(ConformalFactor::length(), two_pi);
  CHECK(fl.phi == doctest::Approx(two_pi));
  CHECK(fl.dphi == doctest::Approx(1.0));
  CHECK(fl.ddphi == doctest::Approx(0.0));

  const FactorValues fe = factor_values(ConformalFactor::exp(0.1), 10.0);
  const double e = std::exp(1.0);
  CHECK(fe.phi == doctest::Approx(e).epsilon(1e-14));
  CHECK(fe.dphi == doctest::Approx(0.1 * e).epsilon(1e-14));
  CHECK(fe.ddphi == doctest::Approx(0.01 * e).epsilon(1e-14));

  const FactorValues fo = factor_values(ConformalFactor::one(), 5.0);
  CHECK(fo.phi == 1.0);
  CHECK(fo.dphi == 0.0);
  CHECK(fo.ddphi == 0.0);

  CHECK_THROWS_AS(factor_values(ConformalFactor::length(), 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(ConformalFactor::exp(-1.0), std::invalid_argument);
}

TEST_CASE("conformal factor CLI syntax") {
  CHECK(parse_conformal("one").kind == FactorKind::one);
  CHECK(parse_conformal("length").kind == FactorKind::length);
  const ConformalFactor cf = parse_conformal("exp:0.25");
  CHECK(cf.kind == FactorKind::exp);
  CHECK(cf.A == doctest::Approx(0.25));
  CHECK_THROWS_AS(parse_conformal("exp:"), std::invalid_argument);
  CHECK_THROWS_AS(parse_conformal("exp:-2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_conformal("exp:1x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_conformal("quadratic"), std::invalid_argument);
}

TEST_CASE("inner products on the unit circle") {
  const DiscreteCurve c = make_circle({0, 0}, 1.0, 128);
  const std::size_t n = c.size();
  const ScalarField ones(n, 1.0);
  CHECK(inner(ConformalFactor::one(), c, ones, ones) ==
        doctest::Approx(two_pi).epsilon(1e-12));
  CHECK(inner(ConformalFactor::length(), c, ones, ones) ==
        doctest::Approx(4.0 * pi * pi).epsilon(1e-12));

  ScalarField cosf(n, 0.0), sinf(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    cosf[j] = std::cos(two_pi * double(j) / double(n));
    sinf[j] = std::sin(two_pi * double(j) / double(n));
  }
  CHECK(std::abs(inner(ConformalFactor::one(), c, cosf, sinf)) < 1e-12);

  CHECK_THROWS_AS(inner(ConformalFactor::one(), c, ScalarField(64, 1.0), ones),
                  std::invalid_argument);
}

TEST_CASE("inner is bilinear, symmetric and positive definite") {
  Rng rng(5);
  const DiscreteCurve c = random_smooth_curve(rng, 96);
  const std::size_t n = c.size();
  const ConformalFactor cf = ConformalFactor::exp(0.2);
  const ScalarField h = random_smooth_field(rng, n), k = random_smooth_field(rng, n),
                    g = random_smooth_field(rng, n);
  const double alpha = 1.7, beta = -0.4;

  CHECK(inner(cf, c, h, k) == doctest::Approx(inner(cf, c, k, h)).epsilon(1e-14));

  ScalarField combo(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) combo[j] = alpha * h[j] + beta * g[j];
  CHECK(inner(cf, c, combo, k) ==
        doctest::Approx(alpha * inner(cf, c, h, k) + beta * inner(cf, c, g, k))
            .epsilon(1e-12));

  CHECK(inner(cf, c, h, h) > 0.0);
}

TEST_CASE("normal_velocity: translation, shrinking circle, stationary path") {
  const std::size_t n = 128;
  const DiscreteCurve circ = make_circle({0, 0}, 1.0, n);

  // translation with velocity (1, 0): a = (1,0) . n = -cos(theta)
  const CurvePath tp = translation_path(circ, {1.0, 0.0}, 1.0, 10);
  const ScalarField a = normal_velocity(tp, 5);
  for (std::size_t j = 0; j < n; j += 11) {
    const double th = two_pi * double(j) / double(n);
    CHECK(a[j] == doctest::Approx(-std::cos(th)).epsilon(1e-9));
  }

  // shrinking circle r(t) = 1 - t with r_t = -1: a = 1
  const CurvePath sp = circle_schedule_path([](double t) { return 1.0 - t; },
                                            n, 0.5, 50);
  const ScalarField as = normal_velocity(sp, 25);
  for (std::size_t j = 0; j < n; j += 17)
    CHECK(as[j] == doctest::Approx(1.0).epsilon(1e-10));

  // stationary path
  const CurvePath st = translation_path(circ, {0.0, 0.0}, 1.0, 5);
  const ScalarField az = normal_velocity(st, 2);
  for (std::size_t j = 0; j < n; ++j) CHECK(az[j] == 0.0);

  CHECK_THROWS_AS(normal_velocity(st, 99), std::invalid_argument);
}

TEST_CASE("path_length: grassfire circle equals the swept annulus area") {
  const CurvePath p = circle_schedule_path([](double t) { return 1.0 + t; },
                                           256, 1.0, 200);
  const double L = path_length(ConformalFactor::length(), p);
  CHECK(L == doctest::Approx(3.0 * pi).epsilon(1e-4));

  const double L1 = path_length(ConformalFactor::one(), p);
  CHECK(L1 > 0.0);
  CHECK(L1 < L);  // phi = 1 < phi = l when l > 1 throughout

  const CurvePath st = translation_path(make_circle({0, 0}, 1.0, 64),
                                        {0.0, 0.0}, 1.0, 5);
  CHECK(path_length(ConformalFactor::length(), st) == doctest::Approx(0.0));
}

TEST_CASE("path_energy closed forms") {
  const CurvePath st = translation_path(make_circle({0, 0}, 1.0, 64),
                                        {0.0, 0.0}, 1.0, 5);
  CHECK(path_energy(ConformalFactor::length(), st) == doctest::Approx(0.0));

  // grassfire r(t) = 1 + t with a = 1, phi = l:
  // E = 1/2 integral (2 pi (1+t))^2 dt = 14 pi^2 / 3
  const CurvePath p = circle_schedule_path([](double t) { return 1.0 + t; },
                                           256, 1.0, 200);
  const double closed_form = 14.0 * pi * pi / 3.0;
  const double err200 = std::abs(path_energy(ConformalFactor::length(), p) - closed_form);
  CHECK(err200 < 1e-5 * closed_form);
  // quadrature refinement converges to the closed form at second order
  const CurvePath p2 = circle_schedule_path([](double t) { return 1.0 + t; },
                                            256, 1.0, 400);
  const double err400 = std::abs(path_energy(ConformalFactor::length(), p2) - closed_form);
  CHECK(err400 < 0.3 * err200);

  // constant metric speed: r(t) = sqrt(1 - 2t/pi) keeps a*l = 2, so the
  // integrand phi * integral a^2 |c_theta| = (a l)^2 = 4 is constant:
  // E = 2, L = 2, and L^2 = 2 * t_end * E holds with equality.
  const CurvePath cs = circle_schedule_path(
      [](double t) { return std::sqrt(1.0 - 2.0 * t / pi); }, 128, 1.0, 400);
  const double E = path_energy(ConformalFactor::length(), cs);
  const double L = path_length(ConformalFactor::length(), cs);
  CHECK(E == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(L == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(L * L == doctest::Approx(2.0 * 1.0 * E).epsilon(1e-6));
}

TEST_CASE("Cauchy-Schwarz: length^2 <= 2 t_end energy for normal paths") {
  Rng rng(23);
  const DiscreteCurve c0 = random_smooth_curve(rng, 96);
  const CurvePath p = evolve_normal_speed(
      c0,
      [](double t, double th) {
        return 0.2 * std::sin(2.0 * th) + 0.1 * std::cos(t + th);
      },
      0.4, 60);
  for (const ConformalFactor& cf :
       {ConformalFactor::one(), ConformalFactor::length(), ConformalFactor::exp(0.3)}) {
    const double L = path_length(cf, p);
    const double E = path_energy(cf, p);
    CHECK(L * L <= 2.0 * p.duration() * E * (1.0 + 1e-9));
  }
}

TEST_CASE("path_length is stable under refinement on smooth paths") {
  auto build = [](std::size_t n, std::size_t steps) {
    return circle_schedule_path(
        [](double t) { return std::sqrt(1.0 + 3.0 * t); }, n, 1.0, steps);
  };
  const double coarse = path_length(ConformalFactor::length(), build(128, 100));
  const double fine = path_length(ConformalFactor::length(), build(256, 200));
  CHECK(std::abs(fine - coarse) / fine < 1e-4);
}

TEST_CASE("CurvePath validation") {
  const DiscreteCurve c = make_circle({0, 0}, 1.0, 64);
  std::vector<DiscreteCurve> cs{c, c, c};
  CHECK_THROWS_AS(CurvePath({0.0, 0.1, 0.3}, std::vector<DiscreteCurve>(cs)),
                  std::invalid_argument);
  CHECK_THROWS_AS(CurvePath({0.0}, std::vector<DiscreteCurve>{c}),
                  std::invalid_argument);
  std::vector<DiscreteCurve> mixed{c, make_circle({0, 0}, 1.0, 32)};
  CHECK_THROWS_AS(CurvePath({0.0, 0.1}, std::move(mixed)), std::invalid_argument);
}
