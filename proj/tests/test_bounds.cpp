#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "shapemetrics/bounds.hpp"
#include "shapemetrics/geodesic.hpp"
#include "support.hpp"

using namespace shapemetrics;
using namespace testsupport;

TEST_CASE("swept_area closed forms") {
  // growing annulus 1 -> 2
  const CurvePath annulus = circle_schedule_path(
      [](double t) { return 1.0 + t; }, 256, 1.0, 200);
  CHECK(swept_area(annulus) == doctest::Approx(3.0 * pi).epsilon(1e-6));

  // rigid translation of the unit circle by distance 1 sweeps 4 with
  // multiplicity (integral of |cos| over the circle)
  const CurvePath trans =
      translation_path(make_circle({0, 0}, 1.0, 256), {1.0, 0.0}, 1.0, 100);
  CHECK(swept_area(trans) == doctest::Approx(4.0).epsilon(1e-4));

  const CurvePath still =
      translation_path(make_circle({0, 0}, 1.0, 64), {0.0, 0.0}, 1.0, 4);
  CHECK(swept_area(still) == doctest::Approx(0.0));
}

TEST_CASE("d_flat quadrature on circles") {
  const DiscreteCurve c1 = make_circle({0, 0}, 1.0, 256);
  const DiscreteCurve c2 = make_circle({0, 0}, 2.0, 256);
  const GridSpec g{512, 0.25};
  CHECK(d_flat(c1, c2, g) == doctest::Approx(3.0 * pi).epsilon(0.01));

  const DiscreteCurve far = make_circle({3.0, 0.0}, 1.0, 256);
  CHECK(d_flat(c1, far, g) == doctest::Approx(2.0 * pi).epsilon(0.01));

  CHECK(d_flat(c1, c1, g) == doctest::Approx(0.0));

  CHECK_THROWS_AS(d_flat(c1, c2, GridSpec{16, 0.25}), std::invalid_argument);
  CHECK_THROWS_AS(d_flat(c1, c2, GridSpec{64, 0.0}), std::invalid_argument);
}

TEST_CASE("d_flat metric axioms") {
  Rng rng(41);
  const DiscreteCurve a = random_smooth_curve(rng, 128);
  const DiscreteCurve b = random_smooth_curve(rng, 128, 1.1, 0.08);
  DiscreteCurve c = random_smooth_curve(rng, 128, 0.9, 0.12);
  for (auto& p : c.points) p.x += 0.4;

  const GridSpec g{128, 0.3};
  const double ab = d_flat(a, b, g), ba = d_flat(b, a, g);
  CHECK(ab == ba);  // same grid, same cells

  const double ac = d_flat(a, c, g), bc = d_flat(b, c, g);
  CHECK(ac <= ab + bc + 0.05 * (ab + bc));  // L1 triangle up to grid noise
}

TEST_CASE("d_flat subdivides cells whose centers land on a trace") {
  // Concentric rounded squares with the grid tuned so one row of cell
  // centers lies exactly on the flat bottom edge of the inner square:
  // ymin + 34.5 * cell = -0.7 with cell = (2 + 2p)/200 solves to p = 9/131.
  const DiscreteCurve inner = make_rounded_square({0, 0}, 1.4, 0.1, 1024);
  const DiscreteCurve outer = make_rounded_square({0, 0}, 2.0, 0.1, 1024);
  const GridSpec g{200, 9.0 / 131.0};

  // the engineered row really does produce on-trace candidates
  const shapemetrics::detail::Box bb =
      shapemetrics::detail::bounding_box(inner, outer, g.padding);
  const double cell = (bb.xmax - bb.xmin) / double(g.resolution);
  const auto near = shapemetrics::detail::cells_near_trace(
      inner, bb, g.resolution, g.resolution, cell,
      1e-9 * shapemetrics::detail::polyline_length(inner));
  CHECK(near.size() > 10);

  // the corner-fillet corrections cancel: d_flat = 2^2 - 1.4^2 = 2.04
  CHECK(d_flat(inner, outer, g) == doctest::Approx(2.04).epsilon(0.03));
}

TEST_CASE("swept-area bounds on the growing circle") {
  const CurvePath p = circle_schedule_path(
      [](double t) { return 1.0 + t; }, 256, 1.0, 200);

  const BoundsReport len = swept_area_bounds(ConformalFactor::length(), p);
  CHECK(std::abs(len.ratio - 1.0) < 1e-4);  // grassfire optimality
  CHECK(len.swept_area == doctest::Approx(3.0 * pi).epsilon(1e-6));
  CHECK(len.lower_bound == doctest::Approx(len.swept_area));
  REQUIRE(len.d_flat_lower.has_value());
  CHECK(*len.d_flat_lower <= len.path_length_value * 1.02);

  // exp factor with l(t) < 1/A throughout: strict gap of at least 1%
  const BoundsReport ex = swept_area_bounds(ConformalFactor::exp(0.05), p);
  CHECK(ex.strict_gap_regime);
  CHECK(ex.path_length_value > 1.01 * ex.lower_bound);
  REQUIRE(ex.upper_bound.has_value());
  CHECK(*ex.upper_bound >= ex.lower_bound);

  CHECK_THROWS_AS(swept_area_bounds(ConformalFactor::one(), p),
                  std::invalid_argument);

  const CurvePath still =
      translation_path(make_circle({0, 0}, 1.0, 64), {0.0, 0.0}, 1.0, 4);
  const BoundsReport zero = swept_area_bounds(ConformalFactor::length(), still,
                                            PathScheme::smooth, GridSpec{64, 0.2});
  CHECK(zero.path_length_value == doctest::Approx(0.0));
  CHECK(zero.swept_area == doctest::Approx(0.0));
  CHECK(zero.lower_bound == doctest::Approx(0.0));
}

TEST_CASE("lower-bound law holds for every constructed path") {
  Rng rng(77);
  std::vector<std::pair<CurvePath, PathScheme>> paths;
  paths.emplace_back(
      circle_schedule_path([](double t) { return 1.0 + t; }, 128, 1.0, 80),
      PathScheme::smooth);
  paths.emplace_back(
      translation_path(make_circle({0, 0}, 1.0, 128), {0.7, -0.4}, 1.0, 80),
      PathScheme::smooth);
  paths.emplace_back(
      evolve_normal_speed(random_smooth_curve(rng, 96),
                          [](double t, double th) {
                            return 0.3 * std::sin(3.0 * th) +
                                   0.2 * std::cos(t + 2.0 * th);
                          },
                          0.5, 60),
      PathScheme::smooth);
  {
    BumpSpec spec;
    spec.delta = 0.5;
    spec.epsilon = 0.01;
    spec.teeth = 4;
    spec.phase_steps = 20;
    paths.emplace_back(
        bump_path(make_circle({0, 0}, 10.0, 256), spec, ConformalFactor::length()),
        PathScheme::polyline);
  }
  paths.emplace_back(
      circle_schedule_path([](double t) { return std::sqrt(1.0 + t); }, 96, 1.0, 60),
      PathScheme::smooth);

  const double root_ae = std::sqrt(0.1 * std::numbers::e);
  for (const auto& [p, scheme] : paths) {
    const double alpha = swept_area(p, scheme);
    CHECK(path_length(ConformalFactor::length(), p, scheme) >=
          (1.0 - 1e-3) * alpha);
    CHECK(path_length(ConformalFactor::exp(0.1), p, scheme) >=
          (1.0 - 1e-3) * root_ae * alpha);
  }
}

TEST_CASE("d_flat lower-bounds the path length under phi = l") {
  const CurvePath trans =
      translation_path(make_circle({0, 0}, 1.0, 256), {1.0, 0.0}, 1.0, 100);
  const double L = path_length(ConformalFactor::length(), trans);
  const double dfl =
      d_flat(trans.curves.front(), trans.curves.back(), GridSpec{512, 0.3});
  CHECK(L >= dfl * (1.0 - 0.02));
}

TEST_CASE("bump construction: endpoints, eta solve, monotone teeth") {
  const DiscreteCurve base = make_circle({0, 0}, 10.0, 256);
  BumpSpec spec;
  spec.delta = 0.5;
  spec.epsilon = 0.01;
  spec.teeth = 4;
  spec.phase_steps = 20;

  const BumpConstruction bc =
      bump_path_detailed(base, spec, ConformalFactor::length());
  CHECK(bc.eta > 0.0);
  CHECK(bc.eta < 0.5 * spec.epsilon);
  // the bisection hit its saw-length target
  const CurvePath& path = bc.path;
  CHECK(path.step_count() == 3 * spec.phase_steps + 1);

  // start curve is the resampled base
  const DiscreteCurve fine = resample_arclength(base, bc.samples);
  CHECK(sup_distance(path.curves.front(), fine) < 1e-10);

  // final curve equals the trapezoidal profile analytically
  const CurveGeometry g = geometry(fine);
  const double ds = g.length / double(bc.samples);
  const double half_tooth = spec.delta / (2.0 * double(spec.teeth));
  double worst = 0.0;
  for (std::size_t j = 0; j < bc.samples; ++j) {
    const double u = ds * double(j);
    double f = 0.0;
    if (u <= spec.delta)
      f = spec.epsilon *
          std::min({u / half_tooth, 1.0, (spec.delta - u) / half_tooth});
    const Point2 want = fine.points[j] + f * g.normal[j];
    worst = std::max(worst, norm(path.curves.back().points[j] - want));
  }
  CHECK(worst < 1e-9);

  // Hausdorff distance to the sharp rectangular-bump trace is set by the
  // end-ramp width delta/(2 teeth)
  std::vector<Point2> rect = fine.points;
  for (std::size_t j = 0; j < bc.samples; ++j) {
    const double u = ds * double(j);
    if (u > 0.0 && u < spec.delta) rect[j] += spec.epsilon * g.normal[j];
  }
  const DiscreteCurve rect_curve{std::move(rect)};
  double h1 = 0.0;
  for (const Point2& q : path.curves.back().points)
    h1 = std::max(h1, shapemetrics::detail::dist_to_trace(rect_curve, q));
  double h2 = 0.0;
  for (const Point2& q : rect_curve.points)
    h2 = std::max(h2, shapemetrics::detail::dist_to_trace(path.curves.back(), q));
  const double hausdorff = std::max(h1, h2);
  CHECK(hausdorff <= 0.55 * spec.delta / double(spec.teeth) + 2.0 * ds);

}

TEST_CASE("teeth efficiency: costs drop once tooth slopes reach order one") {
  // With the bump height a fifth of the support width the saw slopes
  // 2 * teeth * eta / delta pass 1 already at 4 teeth, and doubling the
  // teeth keeps cutting the cost; by 16 teeth the phi = 1 cost is less than
  // half the 4-tooth cost, the vanishing-distance mechanism of G^0.
  const DiscreteCurve base = make_circle({0, 0}, 10.0, 256);
  BumpSpec spec;
  spec.delta = 0.5;
  spec.epsilon = 0.1;
  spec.teeth = 4;
  spec.phase_steps = 20;

  for (const ConformalFactor& cf :
       {ConformalFactor::one(), ConformalFactor::length()}) {
    std::vector<double> lengths;
    for (std::size_t teeth : {4u, 8u, 16u}) {
      BumpSpec s = spec;
      s.teeth = teeth;
      lengths.push_back(
          path_length(cf, bump_path(base, s, cf), PathScheme::polyline));
    }
    CHECK(lengths[1] < lengths[0]);
    CHECK(lengths[2] < lengths[1]);
  }

  // 64 teeth of height ~eps/2 reach slope ~23: the phi = 1 cost collapses
  // well below half of the 4-tooth cost
  spec.epsilon = 0.2;
  const double l4 =
      path_length(ConformalFactor::one(), bump_path(base, spec, ConformalFactor::one()),
                  PathScheme::polyline);
  BumpSpec spec64 = spec;
  spec64.teeth = 64;
  const double l64 =
      path_length(ConformalFactor::one(), bump_path(base, spec64, ConformalFactor::one()),
                  PathScheme::polyline);
  CHECK(l64 < 0.5 * l4);
}

TEST_CASE("bump path cost approaches the rectangular-bump bound as teeth grow") {
  // Unit circle with a generous bump height: tooth slopes reach order one
  // early and the measured cost closes in on the bound from above.
  const DiscreteCurve base = make_circle({0, 0}, 1.0, 256);
  BumpSpec spec;
  spec.delta = 0.5;
  spec.epsilon = 0.05;
  spec.phase_steps = 30;
  const double bound = [&] {
    BumpSpec s = spec;
    s.teeth = 4;
    return bump_bound(base, s, ConformalFactor::length());
  }();

  double prev = 1e30;
  for (std::size_t teeth : {16u, 64u, 256u}) {
    spec.teeth = teeth;
    const double L = path_length(ConformalFactor::length(),
                                 bump_path(base, spec, ConformalFactor::length()),
                                 PathScheme::polyline);
    CHECK(L > bound);  // the bound really is a lower envelope for the family
    CHECK(L < prev);
    prev = L;
  }
  CHECK(prev / bound < 1.3);  // within 30% of the bound by 256 teeth
}

TEST_CASE("bump_bound closed forms and errors") {
  const DiscreteCurve base = make_circle({0, 0}, 10.0, 256);
  BumpSpec spec;
  spec.delta = 0.5;
  spec.epsilon = 0.01;
  spec.teeth = 64;

  // factor ((1 + 0.001)/(1 - 0.001))^2 on the area 0.005 (1 - eps kappa / 2)
  const double factor = std::pow(1.001 / 0.999, 2.0);
  const double area = 0.01 * 0.5 * (1.0 - 0.5 * 0.01 * 0.1);
  CHECK(bump_bound(base, spec, ConformalFactor::length()) ==
        doctest::Approx(factor * area).epsilon(1e-6));

  // vanishing-curvature limit: the factor tends to 1
  BumpSpec tiny = spec;
  tiny.epsilon = 1e-5;
  const double b = bump_bound(base, tiny, ConformalFactor::length());
  CHECK(b / (tiny.epsilon * tiny.delta) == doctest::Approx(1.0).epsilon(1e-3));

  // chart violation: eps * max kappa >= 1
  BumpSpec bad = spec;
  bad.epsilon = 0.6;
  CHECK_THROWS_AS(bump_bound(make_circle({0, 0}, 0.5, 256), bad,
                             ConformalFactor::length()),
                  std::invalid_argument);

  CHECK_THROWS_AS(bump_bound(base, spec, ConformalFactor::one()),
                  std::invalid_argument);
}

TEST_CASE("bump path for the exp factor: solvable and unsolvable targets") {
  const DiscreteCurve base = make_circle({0, 0}, 10.0, 256);
  BumpSpec spec;
  spec.delta = 0.5;
  spec.epsilon = 0.02;
  spec.teeth = 16;
  spec.phase_steps = 10;

  // 1/A = 0.5556 is reachable by 16 teeth of height <= eps/2
  const BumpConstruction bc =
      bump_path_detailed(base, spec, ConformalFactor::exp(1.8));
  CHECK(bc.saw_target_a == doctest::Approx(1.8));
  CHECK(bc.eta < 0.5 * spec.epsilon);

  // 1/A = 10 is far beyond any reachable saw length here
  CHECK_THROWS_AS(bump_path_detailed(base, spec, ConformalFactor::exp(0.1)),
                  std::invalid_argument);

  // delta >= 1/A is rejected outright
  CHECK_THROWS_AS(bump_path_detailed(base, spec, ConformalFactor::exp(3.0)),
                  std::invalid_argument);

  // chart violation applies to the path construction too
  BumpSpec chart = spec;
  chart.epsilon = 0.6;
  CHECK_THROWS_AS(bump_path_detailed(make_circle({0, 0}, 0.5, 256), chart,
                                     ConformalFactor::length()),
                  std::invalid_argument);
}

TEST_CASE("linear interpolation path check") {
  const DiscreteCurve c1 = make_circle({0, 0}, 1.0, 128);
  DiscreteCurve c2 = c1;
  for (auto& p : c2.points) p.x += 0.3;

  const BoundsReport rep = linear_path_check(ConformalFactor::length(), c1, c2, 100);
  REQUIRE(rep.sup_dist.has_value());
  CHECK(*rep.sup_dist == doctest::Approx(0.3).epsilon(1e-12));
  // normal projection of the translation: L = 0.3 pi sqrt(2)
  CHECK(rep.path_length_value ==
        doctest::Approx(0.3 * pi * std::sqrt(2.0)).epsilon(1e-3));
  REQUIRE(rep.upper_bound.has_value());
  CHECK(*rep.upper_bound == doctest::Approx(0.3 * two_pi).epsilon(1e-9));
  CHECK(rep.path_length_value <= *rep.upper_bound);
  REQUIRE(rep.stated_upper_bound.has_value());
  CHECK(*rep.stated_upper_bound == doctest::Approx(0.3 * two_pi).epsilon(1e-9));

  // concentric radii 1 and 1.2
  const BoundsReport rc = linear_path_check(
      ConformalFactor::length(), c1, make_circle({0, 0}, 1.2, 128), 100);
  CHECK(rc.path_length_value <= *rc.upper_bound);
  CHECK(rc.path_length_value >= rc.lower_bound * (1.0 - 1e-9));

  // identical endpoints: zero length under any bound
  const BoundsReport rz = linear_path_check(ConformalFactor::length(), c1, c1, 10);
  CHECK(rz.path_length_value == doctest::Approx(0.0));

  // interpolation through the point-reflected circle collapses at t = 1/2
  DiscreteCurve mir = c1;
  for (auto& p : mir.points) p = {-p.x, -p.y};
  CHECK_THROWS_AS(linear_path_check(ConformalFactor::length(), c1, mir, 10),
                  immersion_error);
}

TEST_CASE("first variation: formula matches finite differences") {
  const std::size_t n = 128, steps = 100;
  const CurvePath p = circle_schedule_path(
      [](double t) { return 1.0 + t; }, n, 1.0, steps);

  Rng rng(4);
  std::vector<std::vector<Point2>> v(steps + 1, std::vector<Point2>(n));
  std::vector<double> mode_a(5), mode_p(5);
  for (int k = 0; k < 5; ++k) {
    mode_a[k] = rng.uniform(-1.0, 1.0);
    mode_p[k] = rng.uniform(0.0, two_pi);
  }
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = p.times[i];
    const double envelope = std::sin(pi * t);  // vanishes at both ends
    const CurveGeometry g = geometry(p.curves[i]);
    for (std::size_t j = 0; j < n; ++j) {
      const double th = two_pi * double(j) / double(n);
      double amp = 0.0;
      for (int k = 0; k < 5; ++k)
        amp += mode_a[k] * std::cos(double(k) * th + mode_p[k]);
      v[i][j] = (envelope * amp) * g.normal[j];
    }
  }

  const VariationCheck vc =
      first_variation_check(ConformalFactor::length(), p, v);
  CHECK(vc.relative_error < 1e-3);

  // zero perturbation: both sides vanish
  std::vector<std::vector<Point2>> zero(steps + 1, std::vector<Point2>(n));
  const VariationCheck vz = first_variation_check(ConformalFactor::length(), p, zero);
  CHECK(vz.fd_derivative == doctest::Approx(0.0));
  CHECK(vz.formula_derivative == doctest::Approx(0.0));

  // stationary path: the derivative vanishes at the minimum
  const CurvePath still =
      translation_path(make_circle({0, 0}, 1.0, n), {0.0, 0.0}, 1.0, steps);
  const VariationCheck vs = first_variation_check(ConformalFactor::length(), still, v);
  CHECK(std::abs(vs.fd_derivative) < 1e-10);
  CHECK(std::abs(vs.formula_derivative) < 1e-10);

  // endpoint-nonvanishing perturbation is rejected
  std::vector<std::vector<Point2>> bad = zero;
  bad.front()[0] = {1.0, 0.0};
  CHECK_THROWS_AS(first_variation_check(ConformalFactor::length(), p, bad),
                  std::invalid_argument);
}

TEST_CASE("support_measure") {
  const std::size_t n = 256;
  const DiscreteCurve c = make_circle({0, 0}, 1.0, n);
  CHECK(support_measure(ScalarField(n, 1.0), c) ==
        doctest::Approx(two_pi).epsilon(1e-12));
  CHECK(support_measure(ScalarField(n, 0.0), c) == doctest::Approx(0.0));

  ScalarField half(n, 0.0);
  for (std::size_t j = 0; j < n / 2; ++j) half[j] = 0.7;
  CHECK(support_measure(half, c) == doctest::Approx(pi).epsilon(two_pi / n));
}
