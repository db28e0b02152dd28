#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "shapemetrics/geodesic.hpp"
#include "shapemetrics/metric.hpp"

// Shared test fixtures: a deterministic RNG, random smooth curves and fields
// built from a few Fourier modes, and analytic/evolved path builders.

namespace testsupport {

using namespace shapemetrics;

// xorshift64* - deterministic across platforms
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545f4914f6cdd1dull;
  }

  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * (double(next() >> 11) / 9007199254740992.0);
  }

 private:
  std::uint64_t state_;
};

// Smooth closed immersion: a circle plus a few low-order radial modes.
inline DiscreteCurve random_smooth_curve(Rng& rng, std::size_t n,
                                         double base_radius = 1.0,
                                         double wobble = 0.1) {
  std::vector<double> amp(4), phase(4);
  for (int k = 0; k < 4; ++k) {
    amp[k] = wobble * base_radius * rng.uniform(-1.0, 1.0) / double(k + 2);
    phase[k] = rng.uniform(0.0, two_pi);
  }
  std::vector<Point2> pts(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double th = two_pi * double(j) / double(n);
    double r = base_radius;
    for (int k = 0; k < 4; ++k) r += amp[k] * std::cos(double(k + 2) * th + phase[k]);
    pts[j] = {r * std::cos(th), r * std::sin(th)};
  }
  return DiscreteCurve(std::move(pts));
}

// Smooth field from a handful of harmonics.
inline ScalarField random_smooth_field(Rng& rng, std::size_t n,
                                       double scale = 1.0, int modes = 4) {
  std::vector<double> v(n, 0.0);
  for (int k = 0; k <= modes; ++k) {
    const double a = scale * rng.uniform(-1.0, 1.0) / double(k + 1);
    const double ph = rng.uniform(0.0, two_pi);
    for (std::size_t j = 0; j < n; ++j)
      v[j] += a * std::cos(double(k) * two_pi * double(j) / double(n) + ph);
  }
  return ScalarField(std::move(v));
}

// Rigid translation of a curve at constant velocity over [0, t_end].
inline CurvePath translation_path(const DiscreteCurve& c0, Point2 velocity,
                                  double t_end, std::size_t steps) {
  std::vector<double> times(steps + 1);
  std::vector<DiscreteCurve> curves;
  curves.reserve(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = t_end * double(i) / double(steps);
    times[i] = t;
    std::vector<Point2> pts = c0.points;
    for (auto& p : pts) p += t * velocity;
    curves.emplace_back(std::move(pts));
  }
  return CurvePath(std::move(times), std::move(curves));
}

// Concentric circles with a prescribed radius schedule r(t).
template <typename RadiusFn>
inline CurvePath circle_schedule_path(RadiusFn&& r, std::size_t n,
                                      double t_end, std::size_t steps) {
  std::vector<double> times(steps + 1);
  std::vector<DiscreteCurve> curves;
  curves.reserve(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = t_end * double(i) / double(steps);
    times[i] = t;
    curves.push_back(make_circle({0.0, 0.0}, r(t), n));
  }
  return CurvePath(std::move(times), std::move(curves));
}

// Evolve c_t = a(t, theta) n by RK4 without resampling; small smooth motions.
template <typename SpeedFn>
inline CurvePath evolve_normal_speed(const DiscreteCurve& c0, SpeedFn&& a,
                                     double t_end, std::size_t steps) {
  const std::size_t n = c0.size();
  std::vector<Point2> pts = c0.points;
  std::vector<double> times(steps + 1);
  std::vector<DiscreteCurve> curves;
  curves.reserve(steps + 1);
  times[0] = 0.0;
  curves.push_back(DiscreteCurve{std::vector<Point2>(pts)});
  const double dt = t_end / double(steps);
  auto deriv = [&](const std::vector<Point2>& q, double t) {
    const CurveGeometry g = geometry(DiscreteCurve{std::vector<Point2>(q)});
    std::vector<Point2> d(n);
    for (std::size_t j = 0; j < n; ++j)
      d[j] = a(t, two_pi * double(j) / double(n)) * g.normal[j];
    return d;
  };
  for (std::size_t i = 1; i <= steps; ++i) {
    const double t = dt * double(i - 1);
    const auto k1 = deriv(pts, t);
    auto mid = pts;
    for (std::size_t j = 0; j < n; ++j) mid[j] += 0.5 * dt * k1[j];
    const auto k2 = deriv(mid, t + 0.5 * dt);
    mid = pts;
    for (std::size_t j = 0; j < n; ++j) mid[j] += 0.5 * dt * k2[j];
    const auto k3 = deriv(mid, t + 0.5 * dt);
    mid = pts;
    for (std::size_t j = 0; j < n; ++j) mid[j] += dt * k3[j];
    const auto k4 = deriv(mid, t + dt);
    for (std::size_t j = 0; j < n; ++j)
      pts[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    times[i] = dt * double(i);
    curves.push_back(DiscreteCurve{std::vector<Point2>(pts)});
  }
  return CurvePath(std::move(times), std::move(curves));
}

}  // namespace testsupport
