#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "shapemetrics/metric.hpp"

// Geodesic evolution in the shape space of immersed curves under G^phi.
// Purely normal motion c_t = a n is integrated together with the normal
// speed equation
//
//   a_t = (kappa/2) (a^2 - (phi'/phi) * integral a^2 |c_theta| dtheta)
//         + (phi'/phi) * a * integral a kappa |c_theta| dtheta,
//
// by classic fourth-order time stepping; after each full step the curve is
// resampled to arclength and a is transported along the trace.

namespace shapemetrics {

struct GeodesicState {
  DiscreteCurve curve;  // arclength-resampled
  ScalarField a;        // normal speed, c_t = a n
};

struct ShootResult {
  CurvePath path;
  std::vector<ScalarField> speeds;              // a at each step
  std::vector<double> ell;                      // l(t)
  std::vector<double> mean_speed;               // arclength average of a
  std::vector<double> speed_length_product;     // mean_speed * l
};

inline ScalarField geodesic_rhs(const ConformalFactor& cf,
                                const DiscreteCurve& c, const ScalarField& a,
                                DiffScheme scheme = DiffScheme::spectral) {
  if (a.size() != c.size())
    throw std::invalid_argument("geodesic_rhs: field/curve size mismatch");
  const CurveGeometry g = geometry(c, scheme);
  const double dth = two_pi / double(c.size());
  double q_sq = 0.0;  // integral a^2 |c_theta| dtheta
  double q_k = 0.0;   // integral a kappa |c_theta| dtheta
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double w = g.speed[j] * dth;
    q_sq += a[j] * a[j] * w;
    q_k += a[j] * g.curvature[j] * w;
  }
  const FactorValues fv = factor_values(cf, g.length);
  const double ratio = fv.dphi / fv.phi;
  std::vector<double> out(c.size());
  for (std::size_t j = 0; j < c.size(); ++j)
    out[j] = 0.5 * g.curvature[j] * (a[j] * a[j] - ratio * q_sq) +
             ratio * a[j] * q_k;
  return ScalarField(std::move(out));
}

namespace detail {

struct FlowState {
  std::vector<Point2> pts;
  std::vector<double> a;
};

struct FlowDeriv {
  std::vector<Point2> dpts;
  std::vector<double> da;
};

inline void check_finite(const FlowState& s, double t) {
  for (const Point2& p : s.pts)
    if (!finite(p)) throw immersion_error("evolution produced non-finite point", t);
  for (double v : s.a)
    if (!std::isfinite(v))
      throw immersion_error("evolution produced non-finite speed", t);
}

// Breakdown guard: a step that moves points by a notable fraction of the
// local curvature radius signals a collapsing feature (shrinking loop,
// swallow-tail) before |c_theta| itself underflows the immersion tolerance.
inline void check_step_scale(const CurveGeometry& g, const std::vector<double>& a,
                             double dt, double t) {
  double amax = 0.0, kmax = 0.0;
  for (double v : a) amax = std::max(amax, std::abs(v));
  for (double k : g.curvature.values) kmax = std::max(kmax, std::abs(k));
  if (amax * dt * kmax > 0.5)
    throw immersion_error("evolution breakdown: curvature scale collapsed", t);
}

template <typename DerivFn>
inline FlowState rk4_step(const FlowState& s, double dt, DerivFn&& deriv) {
  const std::size_t n = s.pts.size();
  auto advanced = [n](const FlowState& base, const FlowDeriv& d, double h) {
    FlowState out = base;
    for (std::size_t j = 0; j < n; ++j) {
      out.pts[j] += h * d.dpts[j];
      out.a[j] += h * d.da[j];
    }
    return out;
  };
  const FlowDeriv k1 = deriv(s);
  const FlowDeriv k2 = deriv(advanced(s, k1, 0.5 * dt));
  const FlowDeriv k3 = deriv(advanced(s, k2, 0.5 * dt));
  const FlowDeriv k4 = deriv(advanced(s, k3, dt));
  FlowState out = s;
  for (std::size_t j = 0; j < n; ++j) {
    out.pts[j] += dt / 6.0 * (k1.dpts[j] + 2.0 * k2.dpts[j] + 2.0 * k3.dpts[j] +
                              k4.dpts[j]);
    out.a[j] += dt / 6.0 * (k1.da[j] + 2.0 * k2.da[j] + 2.0 * k3.da[j] + k4.da[j]);
  }
  return out;
}

}  // namespace detail

// Integrate (c_t = a n, a_t = geodesic rhs) from an arclength-resampled copy
// of c0. Aborts with immersion_error (carrying the failure time) on
// breakdown; the classic RK4 step count is fixed, no adaptivity.
inline ShootResult geodesic_shoot(const ConformalFactor& cf,
                                  const DiscreteCurve& c0,
                                  const ScalarField& a0, double t_end,
                                  std::size_t steps) {
  if (steps < 1) throw std::invalid_argument("geodesic_shoot: steps >= 1");
  if (!(t_end > 0.0)) throw std::invalid_argument("geodesic_shoot: t_end > 0");
  if (a0.size() != c0.size())
    throw std::invalid_argument("geodesic_shoot: speed/curve size mismatch");

  const std::size_t n = c0.size();
  const double dt = t_end / double(steps);

  ResampledCurve rs = resample_arclength_detail(c0, n);
  detail::FlowState state{rs.curve.points,
                          sample_field_at_params(a0, rs.source_params).values};

  auto deriv = [&](const detail::FlowState& s) {
    const DiscreteCurve cur{std::vector<Point2>(s.pts)};
    const CurveGeometry g = geometry(cur, DiffScheme::spectral);
    const ScalarField at = geodesic_rhs(cf, cur, ScalarField{std::vector<double>(s.a)});
    detail::FlowDeriv d;
    d.dpts.resize(n);
    d.da = at.values;
    for (std::size_t j = 0; j < n; ++j) d.dpts[j] = s.a[j] * g.normal[j];
    return d;
  };

  std::vector<double> times(steps + 1);
  std::vector<DiscreteCurve> curves;
  curves.reserve(steps + 1);
  std::vector<ScalarField> speeds;
  speeds.reserve(steps + 1);
  std::vector<double> ells(steps + 1), means(steps + 1), products(steps + 1);

  auto record = [&](std::size_t i, const detail::FlowState& s) {
    times[i] = double(i) * dt;
    DiscreteCurve cur{std::vector<Point2>(s.pts)};
    const CurveGeometry g = geometry(cur, DiffScheme::spectral);
    const double dth = two_pi / double(n);
    double am = 0.0;
    for (std::size_t j = 0; j < n; ++j) am += s.a[j] * g.speed[j] * dth;
    am /= g.length;
    ells[i] = g.length;
    means[i] = am;
    products[i] = am * g.length;
    curves.push_back(std::move(cur));
    speeds.push_back(ScalarField{std::vector<double>(s.a)});
  };

  record(0, state);
  for (std::size_t i = 1; i <= steps; ++i) {
    const double t = double(i - 1) * dt;
    try {
      {
        const DiscreteCurve cur{std::vector<Point2>(state.pts)};
        const CurveGeometry g = geometry(cur, DiffScheme::spectral);
        detail::check_step_scale(g, state.a, dt, t);
      }
      state = detail::rk4_step(state, dt, deriv);
      detail::check_finite(state, t + dt);
      ResampledCurve r = resample_arclength_detail(
          DiscreteCurve{std::vector<Point2>(state.pts)}, n);
      state.a = sample_field_at_params(ScalarField{std::move(state.a)},
                                       r.source_params)
                    .values;
      state.pts = std::move(r.curve.points);
    } catch (immersion_error& e) {
      if (!e.failure_time) throw immersion_error(e.what(), t);
      throw;
    }
    record(i, state);
  }

  return ShootResult{CurvePath(std::move(times), std::move(curves)),
                     std::move(speeds), std::move(ells), std::move(means),
                     std::move(products)};
}

// Constant-normal-speed evolution c_t = speed * n (not generally a geodesic).
inline CurvePath grassfire(const DiscreteCurve& c0, double speed, double t_end,
                           std::size_t steps) {
  if (steps < 1) throw std::invalid_argument("grassfire: steps >= 1");
  if (!(t_end > 0.0)) throw std::invalid_argument("grassfire: t_end > 0");
  const std::size_t n = c0.size();
  const double dt = t_end / double(steps);

  detail::FlowState state{resample_arclength(c0, n).points,
                          std::vector<double>(n, speed)};

  auto deriv = [&](const detail::FlowState& s) {
    const DiscreteCurve cur{std::vector<Point2>(s.pts)};
    const CurveGeometry g = geometry(cur, DiffScheme::spectral);
    detail::FlowDeriv d;
    d.dpts.resize(n);
    d.da.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) d.dpts[j] = speed * g.normal[j];
    return d;
  };

  std::vector<double> times(steps + 1);
  std::vector<DiscreteCurve> curves;
  curves.reserve(steps + 1);
  times[0] = 0.0;
  curves.push_back(DiscreteCurve{std::vector<Point2>(state.pts)});
  for (std::size_t i = 1; i <= steps; ++i) {
    const double t = double(i - 1) * dt;
    try {
      {
        const DiscreteCurve cur{std::vector<Point2>(state.pts)};
        const CurveGeometry g = geometry(cur, DiffScheme::spectral);
        detail::check_step_scale(g, state.a, dt, t);
      }
      state = detail::rk4_step(state, dt, deriv);
      detail::check_finite(state, t + dt);
      state.pts = resample_arclength(DiscreteCurve{std::vector<Point2>(state.pts)}, n)
                      .points;
    } catch (immersion_error& e) {
      if (!e.failure_time) throw immersion_error(e.what(), t);
      throw;
    }
    times[i] = double(i) * dt;
    curves.push_back(DiscreteCurve{std::vector<Point2>(state.pts)});
  }
  return CurvePath(std::move(times), std::move(curves));
}

// Concentric-circle geodesic for phi(l) = l: r(t)^2 = t r1^2 + (1 - t) r0^2.
inline double circle_geodesic_exact(const ConformalFactor& cf, double r0,
                                    double r1, double t) {
  if (cf.kind != FactorKind::length)
    throw std::invalid_argument(
        "circle_geodesic_exact: closed form implemented for phi = length only");
  if (!(r0 > 0.0) || !(r1 > 0.0))
    throw std::invalid_argument("circle_geodesic_exact: radii must be positive");
  if (t < 0.0 || t > 1.0)
    throw std::invalid_argument("circle_geodesic_exact: t in [0, 1]");
  return std::sqrt(t * r1 * r1 + (1.0 - t) * r0 * r0);
}

// Max over interior steps and samples of |finite-difference a_t - rhs|.
inline double geodesic_residual(const ConformalFactor& cf,
                                const ShootResult& sr,
                                DiffScheme scheme = DiffScheme::spectral) {
  const std::size_t T = sr.path.step_count() - 1;
  if (T < 2)
    throw std::invalid_argument("geodesic_residual: need at least 3 steps");
  const double dt = sr.path.dt();
  double res = 0.0;
  for (std::size_t i = 1; i < T; ++i) {
    const ScalarField rhs = geodesic_rhs(cf, sr.path.curves[i], sr.speeds[i], scheme);
    for (std::size_t j = 0; j < sr.speeds[i].size(); ++j) {
      const double fd = (sr.speeds[i + 1][j] - sr.speeds[i - 1][j]) / (2.0 * dt);
      res = std::max(res, std::abs(fd - rhs[j]));
    }
  }
  return res;
}

}  // namespace shapemetrics
