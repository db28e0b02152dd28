#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "shapemetrics/curve.hpp"

// The conformal metric family G^phi on curve space,
//
//   G^phi_c(h, k) = phi(l) * integral( h*k |c_theta| dtheta ),
//
// with phi depending on the curve length l only, plus the induced path
// functionals (length of a path of curves, path energy) and extraction of the
// scalar normal velocity a = c_t . n along a path.

namespace shapemetrics {

enum class FactorKind { one, length, exp };

struct ConformalFactor {
  FactorKind kind = FactorKind::one;
  double A = 0.0;  // rate of the exponential family, > 0

  static ConformalFactor one() { return {FactorKind::one, 0.0}; }
  static ConformalFactor length() { return {FactorKind::length, 0.0}; }
  static ConformalFactor exp(double a) {
    if (!(a > 0.0))
      throw std::invalid_argument("ConformalFactor::exp: A must be positive");
    return {FactorKind::exp, a};
  }
};

struct FactorValues {
  double phi;    // phi(l)
  double dphi;   // d phi / d l
  double ddphi;  // d^2 phi / d l^2
};

inline FactorValues factor_values(const ConformalFactor& cf, double ell) {
  if (!(ell > 0.0))
    throw std::invalid_argument("factor_values: length must be positive");
  switch (cf.kind) {
    case FactorKind::one:
      return {1.0, 0.0, 0.0};
    case FactorKind::length:
      return {ell, 1.0, 0.0};
    case FactorKind::exp: {
      const double e = std::exp(cf.A * ell);
      return {e, cf.A * e, cf.A * cf.A * e};
    }
  }
  throw std::logic_error("factor_values: bad kind");
}

// CLI syntax: "one" | "length" | "exp:<A>" with A > 0.
inline ConformalFactor parse_conformal(const std::string& text) {
  if (text == "one") return ConformalFactor::one();
  if (text == "length") return ConformalFactor::length();
  if (text.rfind("exp:", 0) == 0) {
    const std::string num = text.substr(4);
    std::size_t used = 0;
    double a = 0.0;
    try {
      a = std::stod(num, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("conformal factor: malformed \"" + text + "\"");
    }
    if (used != num.size() || !(a > 0.0))
      throw std::invalid_argument("conformal factor: malformed \"" + text + "\"");
    return ConformalFactor::exp(a);
  }
  throw std::invalid_argument("conformal factor: expected one|length|exp:<A>, got \"" +
                              text + "\"");
}

inline std::string to_string(const ConformalFactor& cf) {
  switch (cf.kind) {
    case FactorKind::one: return "one";
    case FactorKind::length: return "length";
    case FactorKind::exp: return "exp:" + std::to_string(cf.A);
  }
  return "?";
}

// Time-indexed sequence of curves on a uniform time grid.
struct CurvePath {
  std::vector<double> times;
  std::vector<DiscreteCurve> curves;

  CurvePath(std::vector<double> t, std::vector<DiscreteCurve> cs)
      : times(std::move(t)), curves(std::move(cs)) {
    if (times.size() != curves.size())
      throw std::invalid_argument("CurvePath: times/curves size mismatch");
    if (times.size() < 2)
      throw std::invalid_argument("CurvePath: need at least 2 steps");
    const double dt = times[1] - times[0];
    if (!(dt > 0.0)) throw std::invalid_argument("CurvePath: times not increasing");
    // tolerance covers grids round-tripped through 9-significant-digit files
    for (std::size_t i = 1; i < times.size(); ++i) {
      const double d = times[i] - times[i - 1];
      if (!(d > 0.0) || std::abs(d - dt) > 1e-6 * dt)
        throw std::invalid_argument("CurvePath: time grid must be uniform");
    }
    const std::size_t n = curves.front().size();
    for (const DiscreteCurve& c : curves)
      if (c.size() != n)
        throw std::invalid_argument("CurvePath: sample counts differ across steps");
  }

  std::size_t step_count() const { return times.size(); }  // T + 1
  std::size_t samples() const { return curves.front().size(); }
  double dt() const { return times[1] - times[0]; }
  double duration() const { return times.back() - times.front(); }
};

// Quadrature scheme for the per-step spatial integrals of path functionals.
//   smooth:   vertex values with spectral geometry (use on smooth paths)
//   polyline: edge-midpoint quadrature, exact line integrals on polygonal
//             curves (use on piecewise-linear constructions)
enum class PathScheme { smooth, polyline };

namespace detail {

// c_t at step i by second-order differences on the uniform time grid.
inline std::vector<Point2> time_derivative(const CurvePath& p, std::size_t i) {
  const std::size_t T = p.step_count() - 1;
  if (i > T) throw std::invalid_argument("time_derivative: step index out of range");
  const double dt = p.dt();
  const std::size_t n = p.samples();
  std::vector<Point2> v(n);
  const auto& cs = p.curves;
  if (T == 1) {  // two steps: first-order is all there is
    for (std::size_t j = 0; j < n; ++j)
      v[j] = (cs[1].points[j] - cs[0].points[j]) / dt;
    return v;
  }
  if (i == 0) {
    for (std::size_t j = 0; j < n; ++j)
      v[j] = (-3.0 * cs[0].points[j] + 4.0 * cs[1].points[j] - cs[2].points[j]) /
             (2.0 * dt);
  } else if (i == T) {
    for (std::size_t j = 0; j < n; ++j)
      v[j] = (3.0 * cs[T].points[j] - 4.0 * cs[T - 1].points[j] +
              cs[T - 2].points[j]) /
             (2.0 * dt);
  } else {
    for (std::size_t j = 0; j < n; ++j)
      v[j] = (cs[i + 1].points[j] - cs[i - 1].points[j]) / (2.0 * dt);
  }
  return v;
}

// Per-step spatial integrals shared by path length, energy and swept area.
struct StepIntegrals {
  double length = 0.0;        // l(t)
  double normal_sq = 0.0;     // integral a^2 |c_theta| dtheta
  double normal_abs = 0.0;    // integral |a| |c_theta| dtheta
  double full_sq = 0.0;       // integral |c_t|^2 |c_theta| dtheta
};

inline StepIntegrals step_integrals(const CurvePath& p, std::size_t i,
                                    PathScheme scheme) {
  const std::size_t n = p.samples();
  const std::vector<Point2> v = time_derivative(p, i);
  StepIntegrals s;
  if (scheme == PathScheme::smooth) {
    const CurveGeometry g = geometry(p.curves[i], DiffScheme::spectral);
    const double dth = two_pi / double(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double w = g.speed[j] * dth;
      const double a = dot(v[j], g.normal[j]);
      s.length += w;
      s.normal_sq += a * a * w;
      s.normal_abs += std::abs(a) * w;
      s.full_sq += norm2(v[j]) * w;
    }
  } else {
    const auto& pts = p.curves[i].points;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k = (j + 1) % n;
      const Point2 e = pts[k] - pts[j];
      const double w = norm(e);
      if (w == 0.0) throw immersion_error("step_integrals: degenerate edge");
      const Point2 ne = rot90(e / w);
      const Point2 vm = 0.5 * (v[j] + v[k]);
      const double a = dot(vm, ne);
      s.length += w;
      s.normal_sq += a * a * w;
      s.normal_abs += std::abs(a) * w;
      s.full_sq += norm2(vm) * w;
    }
  }
  return s;
}

inline double trapezoid(const std::vector<double>& t,
                        const std::vector<double>& f) {
  double acc = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i)
    acc += 0.5 * (f[i] + f[i - 1]) * (t[i] - t[i - 1]);
  return acc;
}

}  // namespace detail

// Scalar normal velocity a = c_t . n at step i.
inline ScalarField normal_velocity(const CurvePath& p, std::size_t i,
                                   DiffScheme scheme = DiffScheme::spectral) {
  if (i >= p.step_count())
    throw std::invalid_argument("normal_velocity: step index out of range");
  const std::vector<Point2> v = detail::time_derivative(p, i);
  const CurveGeometry g = geometry(p.curves[i], scheme);
  std::vector<double> a(p.samples());
  for (std::size_t j = 0; j < p.samples(); ++j) a[j] = dot(v[j], g.normal[j]);
  return ScalarField(std::move(a));
}

// G^phi_c(h, k) for scalar normal components h, k.
inline double inner(const ConformalFactor& cf, const DiscreteCurve& c,
                    const ScalarField& h, const ScalarField& k,
                    DiffScheme scheme = DiffScheme::spectral) {
  if (h.size() != c.size() || k.size() != c.size())
    throw std::invalid_argument("inner: field/curve sample count mismatch");
  const CurveGeometry g = geometry(c, scheme);
  const double dth = two_pi / double(c.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j)
    acc += h[j] * k[j] * g.speed[j] * dth;
  return factor_values(cf, g.length).phi * acc;
}

// L_{G^phi}(c) = integral over t of sqrt( phi(l) * integral a^2 |c_theta| dtheta ),
// built from the normal part of the velocity only.
inline double path_length(const ConformalFactor& cf, const CurvePath& p,
                          PathScheme scheme = PathScheme::smooth) {
  std::vector<double> g(p.step_count());
  for (std::size_t i = 0; i < p.step_count(); ++i) {
    const auto s = detail::step_integrals(p, i, scheme);
    g[i] = std::sqrt(factor_values(cf, s.length).phi * s.normal_sq);
  }
  return detail::trapezoid(p.times, g);
}

// E = 1/2 integral over t of phi(l) * integral |c_t|^2 |c_theta| dtheta,
// using the full velocity (normal and tangential parts).
inline double path_energy(const ConformalFactor& cf, const CurvePath& p,
                          PathScheme scheme = PathScheme::smooth) {
  std::vector<double> g(p.step_count());
  for (std::size_t i = 0; i < p.step_count(); ++i) {
    const auto s = detail::step_integrals(p, i, scheme);
    g[i] = 0.5 * factor_values(cf, s.length).phi * s.full_sq;
  }
  return detail::trapezoid(p.times, g);
}

}  // namespace shapemetrics
