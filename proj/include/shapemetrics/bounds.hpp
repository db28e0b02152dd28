#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "shapemetrics/metric.hpp"

// Distance bounds and constructive paths: the area alpha(c) swept by a path,
// the winding-number distance d_flat, lower/upper bounds on dist_{G^phi}
// (alpha-based for phi = l, sqrt(A e) alpha for phi = e^{Al}), the
// three-phase saw-tooth bump path with its cost bound, the straight-line
// interpolation check, and a first-variation check of the path energy.

namespace shapemetrics {

struct GridSpec {
  std::size_t resolution = 512;  // cells along the longer bounding-box side
  double padding = 0.1;          // absolute bounding-box margin
};

struct BoundsReport {
  double path_length_value = 0.0;
  double swept_area = 0.0;
  double lower_bound = 0.0;
  double ratio = 0.0;  // path length / lower bound (0 when lower vanishes)
  std::optional<double> upper_bound;
  std::optional<double> stated_upper_bound;  // d_inf * max(phi(l1), phi(l2))
  std::optional<double> sup_dist;
  std::optional<double> d_flat_lower;
  bool strict_gap_regime = false;  // exp factor with l(t) < 1/A throughout
};

// Area swept by the deforming curve, counted with multiplicity:
// integral of |c_t . n| |c_theta| over parameter space-time.
inline double swept_area(const CurvePath& p,
                         PathScheme scheme = PathScheme::smooth) {
  std::vector<double> g(p.step_count());
  for (std::size_t i = 0; i < p.step_count(); ++i)
    g[i] = detail::step_integrals(p, i, scheme).normal_abs;
  return detail::trapezoid(p.times, g);
}

// ---------------------------------------------------------------------------
// d_flat: L1 distance between winding-number functions

namespace detail {

struct Box {
  double xmin, ymin, xmax, ymax;
};

inline Box bounding_box(const DiscreteCurve& a, const DiscreteCurve& b,
                        double pad) {
  Box bb{std::numeric_limits<double>::infinity(),
         std::numeric_limits<double>::infinity(),
         -std::numeric_limits<double>::infinity(),
         -std::numeric_limits<double>::infinity()};
  for (const auto* c : {&a, &b}) {
    for (const Point2& p : c->points) {
      bb.xmin = std::min(bb.xmin, p.x);
      bb.ymin = std::min(bb.ymin, p.y);
      bb.xmax = std::max(bb.xmax, p.x);
      bb.ymax = std::max(bb.ymax, p.y);
    }
  }
  bb.xmin -= pad;
  bb.ymin -= pad;
  bb.xmax += pad;
  bb.ymax += pad;
  return bb;
}

// Winding numbers at all cell centers by one scan line per row: collect the
// signed upward/downward edge crossings of the row, sort by x, and sweep.
inline std::vector<int> winding_grid(const DiscreteCurve& c, const Box& bb,
                                     std::size_t nx, std::size_t ny,
                                     double cell) {
  std::vector<int> grid(nx * ny, 0);
  const std::size_t n = c.size();
  std::vector<std::pair<double, int>> crossings;
  for (std::size_t r = 0; r < ny; ++r) {
    const double y = bb.ymin + (double(r) + 0.5) * cell;
    crossings.clear();
    for (std::size_t j = 0; j < n; ++j) {
      const Point2 a = c.points[j];
      const Point2 b = c.points[(j + 1) % n];
      if (a.y <= y && b.y > y) {
        crossings.emplace_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y), +1);
      } else if (b.y <= y && a.y > y) {
        crossings.emplace_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y), -1);
      }
    }
    std::sort(crossings.begin(), crossings.end());
    int suffix = 0;
    for (const auto& cr : crossings) suffix += cr.second;
    std::size_t next = 0;
    for (std::size_t i = 0; i < nx; ++i) {
      const double x = bb.xmin + (double(i) + 0.5) * cell;
      while (next < crossings.size() && crossings[next].first <= x)
        suffix -= crossings[next++].second;
      grid[r * nx + i] = suffix;
    }
  }
  return grid;
}

// Cells whose center lies within tol of the trace (candidates for one level
// of subdivision). tol is tiny, so only near-exact hits are collected.
inline std::vector<std::size_t> cells_near_trace(const DiscreteCurve& c,
                                                 const Box& bb, std::size_t nx,
                                                 std::size_t ny, double cell,
                                                 double tol) {
  std::vector<std::size_t> out;
  const std::size_t n = c.size();
  for (std::size_t j = 0; j < n; ++j) {
    const Point2 a = c.points[j];
    const Point2 b = c.points[(j + 1) % n];
    const double len = norm(b - a);
    const int substeps = std::max(1, int(std::ceil(len / (0.5 * cell))));
    for (int q = 0; q <= substeps; ++q) {
      const Point2 s = a + (double(q) / substeps) * (b - a);
      const long ci = std::lround(std::floor((s.x - bb.xmin) / cell));
      const long ri = std::lround(std::floor((s.y - bb.ymin) / cell));
      for (long dr = -1; dr <= 1; ++dr) {
        for (long dc = -1; dc <= 1; ++dc) {
          const long rr = ri + dr, cc = ci + dc;
          if (rr < 0 || cc < 0 || rr >= long(ny) || cc >= long(nx)) continue;
          const Point2 center{bb.xmin + (double(cc) + 0.5) * cell,
                              bb.ymin + (double(rr) + 0.5) * cell};
          if (dist_point_segment(center, a, b) <= tol)
            out.push_back(std::size_t(rr) * nx + std::size_t(cc));
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Nudge a point off both traces along the normal of the closest segment.
inline Point2 clamp_off_trace(Point2 p, const DiscreteCurve& c1,
                              const DiscreteCurve& c2, double tol) {
  for (int attempt = 0; attempt < 4; ++attempt) {
    if (dist_to_trace(c1, p) > tol && dist_to_trace(c2, p) > tol) return p;
    const DiscreteCurve& c = (dist_to_trace(c1, p) <= tol) ? c1 : c2;
    double best = std::numeric_limits<double>::infinity();
    Point2 dir{1.0, 0.0};
    for (std::size_t j = 0; j < c.size(); ++j) {
      const Point2 a = c.points[j];
      const Point2 b = c.points[(j + 1) % c.size()];
      const double d = dist_point_segment(p, a, b);
      if (d < best) {
        best = d;
        const Point2 e = b - a;
        dir = rot90(e / std::max(norm(e), 1e-300));
      }
    }
    p += (2.0 * tol) * dir;
  }
  return p;
}

}  // namespace detail

// d_flat = integral over the plane of |w_{C1} - w_{C2}|, by midpoint
// quadrature on a padded joint bounding box. Cells whose center falls on a
// trace (within the point-on-curve tolerance) are subdivided once and their
// sub-centers clamped off-curve.
inline double d_flat(const DiscreteCurve& c1, const DiscreteCurve& c2,
                     const GridSpec& g = {}) {
  if (g.resolution < 32)
    throw std::invalid_argument("d_flat: grid resolution must be >= 32");
  if (!(g.padding > 0.0))
    throw std::invalid_argument("d_flat: padding must be positive");

  const detail::Box bb = detail::bounding_box(c1, c2, g.padding);
  const double w = bb.xmax - bb.xmin, h = bb.ymax - bb.ymin;
  const double cell = std::max(w, h) / double(g.resolution);
  const std::size_t nx = std::size_t(std::ceil(w / cell));
  const std::size_t ny = std::size_t(std::ceil(h / cell));

  const std::vector<int> w1 = detail::winding_grid(c1, bb, nx, ny, cell);
  const std::vector<int> w2 = detail::winding_grid(c2, bb, nx, ny, cell);

  double total = 0.0;
  for (std::size_t i = 0; i < w1.size(); ++i)
    total += std::abs(w1[i] - w2[i]);
  total *= cell * cell;

  const double tol1 = 1e-9 * detail::polyline_length(c1);
  const double tol2 = 1e-9 * detail::polyline_length(c2);
  const double tol = std::max(tol1, tol2);
  std::vector<std::size_t> near = detail::cells_near_trace(c1, bb, nx, ny, cell, tol);
  const std::vector<std::size_t> near2 =
      detail::cells_near_trace(c2, bb, nx, ny, cell, tol);
  near.insert(near.end(), near2.begin(), near2.end());
  std::sort(near.begin(), near.end());
  near.erase(std::unique(near.begin(), near.end()), near.end());

  for (std::size_t idx : near) {
    const std::size_t r = idx / nx, i = idx % nx;
    const double x0 = bb.xmin + double(i) * cell;
    const double y0 = bb.ymin + double(r) * cell;
    double sub = 0.0;
    for (int qy = 0; qy < 2; ++qy) {
      for (int qx = 0; qx < 2; ++qx) {
        Point2 p{x0 + (0.25 + 0.5 * qx) * cell, y0 + (0.25 + 0.5 * qy) * cell};
        p = detail::clamp_off_trace(p, c1, c2, tol);
        sub += std::abs(detail::winding_crossing(c1, p) -
                        detail::winding_crossing(c2, p));
      }
    }
    total += (sub / 4.0 - std::abs(w1[idx] - w2[idx])) * cell * cell;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Swept-area bound report for a path

inline BoundsReport swept_area_bounds(const ConformalFactor& cf,
                                    const CurvePath& p,
                                    PathScheme scheme = PathScheme::smooth,
                                    const GridSpec& grid = {}) {
  if (cf.kind == FactorKind::one)
    throw std::invalid_argument(
        "swept_area_bounds: no nontrivial bound for phi = 1 (the distance vanishes)");

  std::vector<double> len_integrand(p.step_count()), area_integrand(p.step_count());
  double ell_max = 0.0;
  for (std::size_t i = 0; i < p.step_count(); ++i) {
    const auto s = detail::step_integrals(p, i, scheme);
    len_integrand[i] = std::sqrt(factor_values(cf, s.length).phi * s.normal_sq);
    area_integrand[i] = s.normal_abs;
    ell_max = std::max(ell_max, s.length);
  }

  BoundsReport rep;
  rep.path_length_value = detail::trapezoid(p.times, len_integrand);
  rep.swept_area = detail::trapezoid(p.times, area_integrand);

  const double dfl = d_flat(p.curves.front(), p.curves.back(), grid);
  if (cf.kind == FactorKind::length) {
    rep.lower_bound = rep.swept_area;
    rep.upper_bound = rep.swept_area;
    rep.d_flat_lower = dfl;
  } else {
    const double scale = std::sqrt(cf.A * std::numbers::e);
    rep.lower_bound = scale * rep.swept_area;
    rep.upper_bound = scale * std::exp(cf.A * ell_max / 2.0) * rep.swept_area;
    rep.d_flat_lower = scale * dfl;
    rep.strict_gap_regime = ell_max < 1.0 / cf.A;
  }
  rep.ratio = rep.lower_bound > 0.0 ? rep.path_length_value / rep.lower_bound : 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Saw-tooth bump construction

struct BumpSpec {
  double theta_start = 0.0;     // arclength position of the support start
  double delta = 0.0;           // support length (arclength units)
  double epsilon = 0.0;         // bump height
  std::size_t teeth = 1;        // saw-tooth count over the support
  std::size_t phase_steps = 40; // time steps per construction phase
};

struct BumpConstruction {
  CurvePath path;
  double eta;           // solved tooth height
  double saw_target_a;  // the A whose 1/A is the saw-tooth length target
  std::size_t samples;  // fine-grid sample count actually used
};

namespace detail {

struct BumpFrame {
  DiscreteCurve fine;
  std::vector<Point2> normal;
  std::vector<double> kappa;
  std::vector<double> u;  // arclength offset from theta_start in [0, l0)
  double ell0 = 0.0;
  double ds = 0.0;
  double max_kappa_support = 0.0;
};

inline BumpFrame make_bump_frame(const DiscreteCurve& base,
                                 const BumpSpec& spec, std::size_t min_n) {
  if (!(spec.delta > 0.0) || !(spec.epsilon > 0.0))
    throw std::invalid_argument("bump: delta and epsilon must be positive");
  if (spec.teeth < 1) throw std::invalid_argument("bump: teeth >= 1");
  if (spec.phase_steps < 1) throw std::invalid_argument("bump: phase_steps >= 1");

  const double ell0 = geometry(base, DiffScheme::spectral).length;
  if (!(spec.delta < ell0))
    throw std::invalid_argument("bump: support longer than the curve");

  // at least 8 samples per tooth across the support
  const double per_tooth = 8.0 * double(spec.teeth) * ell0 / spec.delta;
  const std::size_t n =
      std::max({base.size(), std::size_t(std::ceil(per_tooth)), min_n});

  BumpFrame fr{resample_arclength(base, n), {}, {}, {}, 0.0, 0.0, 0.0};
  const CurveGeometry g = geometry(fr.fine, DiffScheme::spectral);
  fr.normal = g.normal;
  fr.kappa = g.curvature.values;
  fr.ell0 = g.length;
  fr.ds = g.length / double(n);
  fr.u.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    double u = std::fmod(fr.ds * double(j) - spec.theta_start, fr.ell0);
    if (u < 0.0) u += fr.ell0;
    fr.u[j] = u;
  }
  for (std::size_t j = 0; j < n; ++j)
    if (fr.u[j] <= spec.delta)
      fr.max_kappa_support = std::max(fr.max_kappa_support, std::abs(fr.kappa[j]));
  if (spec.epsilon * fr.max_kappa_support >= 1.0)
    throw std::invalid_argument("bump: chart violation, epsilon * max |kappa| >= 1");
  return fr;
}

// Unit triangle wave with m teeth on [0, 1].
inline double saw_profile(double x, std::size_t m) {
  const double w = 2.0 * double(m) * x;
  const double frac = w - 2.0 * std::floor(0.5 * w);
  return frac <= 1.0 ? frac : 2.0 - frac;
}

// Length of the deformed support at tooth height eta (the phase-1 shape).
inline double saw_length(const BumpFrame& fr, const BumpSpec& spec, double eta) {
  const std::size_t n = fr.fine.size();
  double len = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (fr.u[j] > spec.delta) continue;
    const std::size_t k = (j + 1) % n;
    const double pj = saw_profile(fr.u[j] / spec.delta, spec.teeth);
    const double pk =
        fr.u[k] <= spec.delta ? saw_profile(fr.u[k] / spec.delta, spec.teeth) : 0.0;
    const Point2 qj = fr.fine.points[j] + (eta * pj) * fr.normal[j];
    const Point2 qk = fr.fine.points[k] + (eta * pk) * fr.normal[k];
    len += norm(qk - qj);
  }
  return len;
}

// The three-phase normal offset f(t, x) with x = u/delta in [0, 1]:
// teeth grow to height eta on [0, eta], translate at near-unit speed with
// pinned end ramps on [eta, eps - eta], and retract on [eps - eta, eps].
inline double bump_offset(double t, double x, double eps, double eta,
                          std::size_t m) {
  const double half = 1.0 / (2.0 * double(m));
  const double p = saw_profile(x, m);
  if (t <= eta) return t * p;
  if (t <= eps - eta) {
    const double ramp = (eps * (t - eta) + eta * (eps - eta - t)) / (eps - 2.0 * eta);
    if (x <= half) return ramp * (x / half);
    if (x >= 1.0 - half) return ramp * ((1.0 - x) / half);
    return (eps - eta) / (eps - 2.0 * eta) * (t - eta) + eta * p;
  }
  if (x <= half) return eps * (x / half);
  if (x >= 1.0 - half) return eps * ((1.0 - x) / half);
  return (eps * (t - (eps - eta)) + (eps - t) * ((eps - eta) + eta * p)) / eta;
}

}  // namespace detail

inline BumpConstruction bump_path_detailed(const DiscreteCurve& base,
                                           const BumpSpec& spec,
                                           const ConformalFactor& cf) {
  const detail::BumpFrame fr = detail::make_bump_frame(base, spec, 0);
  const double eps = spec.epsilon;

  double target_a;
  if (cf.kind == FactorKind::exp) {
    target_a = cf.A;
    if (!(spec.delta < 1.0 / target_a))
      throw std::invalid_argument("bump: requires delta < 1/A for the exp factor");
  } else {
    // Free choice for phi = l (and phi = 1): target the saw-tooth length of
    // teeth grown to 45% of the bump height, the longest saw reachable with
    // a comfortable bisection bracket. The support-spreading gain scales
    // with the tooth slope 2 * teeth * eta / delta, so the tallest teeth
    // give the construction its best cost at a fixed tooth count.
    target_a = 1.0 / detail::saw_length(fr, spec, 0.45 * eps);
  }

  double lo = 1e-12, hi = 0.5 * eps * (1.0 - 1e-9);
  const double target_len = 1.0 / target_a;
  if (detail::saw_length(fr, spec, lo) > target_len ||
      detail::saw_length(fr, spec, hi) < target_len)
    throw std::invalid_argument(
        "bump: saw-tooth length target 1/A unreachable; too few teeth");
  double eta = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    eta = 0.5 * (lo + hi);
    const double err = detail::saw_length(fr, spec, eta) - target_len;
    if (std::abs(err) <= 1e-10) break;
    if (err > 0.0)
      hi = eta;
    else
      lo = eta;
  }

  const std::size_t nt = 3 * spec.phase_steps;
  std::vector<double> times(nt + 1);
  std::vector<DiscreteCurve> curves;
  curves.reserve(nt + 1);
  const std::size_t n = fr.fine.size();
  for (std::size_t i = 0; i <= nt; ++i) {
    const double t = eps * double(i) / double(nt);
    times[i] = t;
    std::vector<Point2> pts = fr.fine.points;
    for (std::size_t j = 0; j < n; ++j) {
      if (fr.u[j] > spec.delta) continue;
      const double f =
          detail::bump_offset(t, fr.u[j] / spec.delta, eps, eta, spec.teeth);
      pts[j] += f * fr.normal[j];
    }
    curves.emplace_back(std::move(pts));
  }
  return BumpConstruction{CurvePath(std::move(times), std::move(curves)), eta,
                          target_a, n};
}

inline CurvePath bump_path(const DiscreteCurve& base, const BumpSpec& spec,
                           const ConformalFactor& cf) {
  return bump_path_detailed(base, spec, cf).path;
}

// Cost bound for creating the rectangular bump:
//   phi = l:      ((1+eK)/(1-eK))^2 * bump area
//   phi = e^{Al}: ((1+eK)/(1-eK))^{3/2} e^{A(l0+2e-d)/2} sqrt(A e^{(1+eK)/(1-eK)})
//                 * bump area
// with K = max |kappa| over the support and
// bump area = integral over the support and [0, eps] of (1 - t kappa).
inline double bump_bound(const DiscreteCurve& base, const BumpSpec& spec,
                         const ConformalFactor& cf) {
  if (cf.kind == FactorKind::one)
    throw std::invalid_argument("bump_bound: stated for phi = l and phi = e^{Al} only");
  const detail::BumpFrame fr = detail::make_bump_frame(base, spec, 2048);

  double kappa_int = 0.0;  // integral of kappa over the support
  for (std::size_t j = 0; j < fr.fine.size(); ++j)
    if (fr.u[j] <= spec.delta) kappa_int += fr.kappa[j] * fr.ds;
  const double eps = spec.epsilon;
  const double area = eps * spec.delta - 0.5 * eps * eps * kappa_int;

  const double ek = eps * fr.max_kappa_support;
  const double ratio = (1.0 + ek) / (1.0 - ek);
  if (cf.kind == FactorKind::length) return ratio * ratio * area;

  const double a = cf.A;
  return std::pow(ratio, 1.5) *
         std::exp(a * (fr.ell0 + 2.0 * eps - spec.delta) / 2.0) *
         std::sqrt(a * std::exp(ratio)) * area;
}

// ---------------------------------------------------------------------------
// Straight-line interpolation path check

inline BoundsReport linear_path_check(const ConformalFactor& cf,
                                      const DiscreteCurve& c1,
                                      const DiscreteCurve& c2, std::size_t T) {
  if (T < 2) throw std::invalid_argument("linear_path_check: need T >= 2");
  const double d_inf = sup_distance(c1, c2);

  std::vector<double> times(T + 1);
  std::vector<DiscreteCurve> curves;
  curves.reserve(T + 1);
  for (std::size_t i = 0; i <= T; ++i) {
    const double t = double(i) / double(T);
    times[i] = t;
    std::vector<Point2> pts(c1.size());
    for (std::size_t j = 0; j < c1.size(); ++j)
      pts[j] = (1.0 - t) * c1.points[j] + t * c2.points[j];
    curves.emplace_back(std::move(pts));
  }
  const CurvePath path(std::move(times), std::move(curves));

  double phi_max = 0.0, ell_max = 0.0;
  for (std::size_t i = 0; i <= T; ++i) {
    const double ell = geometry(path.curves[i], DiffScheme::spectral).length;
    ell_max = std::max(ell_max, ell);
    phi_max = std::max(phi_max, factor_values(cf, ell).phi);
  }

  BoundsReport rep;
  rep.path_length_value = path_length(cf, path);
  rep.swept_area = swept_area(path);
  rep.sup_dist = d_inf;
  rep.upper_bound = d_inf * std::sqrt(phi_max * ell_max);  // what the proof gives
  const double ell1 = geometry(c1).length, ell2 = geometry(c2).length;
  rep.stated_upper_bound =
      d_inf * std::max(factor_values(cf, ell1).phi, factor_values(cf, ell2).phi);
  switch (cf.kind) {
    case FactorKind::length:
      rep.lower_bound = rep.swept_area;
      break;
    case FactorKind::exp:
      rep.lower_bound = std::sqrt(cf.A * std::numbers::e) * rep.swept_area;
      break;
    case FactorKind::one:
      rep.lower_bound = 0.0;
      break;
  }
  rep.ratio = rep.lower_bound > 0.0 ? rep.path_length_value / rep.lower_bound : 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// First variation of the path energy

struct VariationCheck {
  double fd_derivative = 0.0;       // central finite difference of E, Richardson
  double formula_derivative = 0.0;  // -(integral of c_s . F)
  double relative_error = 0.0;
};

// F = (phi |c_theta| c_t)_t + (i phi' kappa c_theta / 2) * integral |c_t|^2 |c_theta| dtheta
//     + (phi/2) (|c_t|^2 c_theta / |c_theta|)_theta
inline VariationCheck first_variation_check(
    const ConformalFactor& cf, const CurvePath& p,
    const std::vector<std::vector<Point2>>& perturbation, double fd_step = 1e-3) {
  const std::size_t nt = p.step_count();
  const std::size_t n = p.samples();
  if (perturbation.size() != nt)
    throw std::invalid_argument("first_variation_check: perturbation step count mismatch");
  double vmax = 0.0;
  for (const auto& v : perturbation) {
    if (v.size() != n)
      throw std::invalid_argument("first_variation_check: perturbation sample mismatch");
    for (const Point2& q : v) vmax = std::max(vmax, norm(q));
  }
  for (const auto* endpoint : {&perturbation.front(), &perturbation.back()})
    for (const Point2& q : *endpoint)
      if (norm(q) > 1e-12 * std::max(vmax, 1.0))
        throw std::invalid_argument(
            "first_variation_check: perturbation must vanish at the endpoint times");

  auto energy_at = [&](double s) {
    std::vector<DiscreteCurve> curves;
    curves.reserve(nt);
    for (std::size_t i = 0; i < nt; ++i) {
      std::vector<Point2> pts = p.curves[i].points;
      for (std::size_t j = 0; j < n; ++j) pts[j] += s * perturbation[i][j];
      curves.emplace_back(std::move(pts));
    }
    return path_energy(cf, CurvePath(std::vector<double>(p.times), std::move(curves)));
  };

  const double s = fd_step;
  const double d1 = (energy_at(s) - energy_at(-s)) / (2.0 * s);
  const double d2 = (energy_at(0.5 * s) - energy_at(-0.5 * s)) / s;
  const double fd = (4.0 * d2 - d1) / 3.0;

  // Per-step fields entering F.
  const double dth = two_pi / double(n);
  std::vector<std::vector<Point2>> momentum(nt);  // phi |c_theta| c_t
  std::vector<std::vector<Point2>> local(nt);     // the two non-time-derivative terms
  for (std::size_t i = 0; i < nt; ++i) {
    const CurveGeometry g = geometry(p.curves[i], DiffScheme::spectral);
    const std::vector<Point2> ct = detail::time_derivative(p, i);
    const FactorValues fv = factor_values(cf, g.length);
    double q = 0.0;
    for (std::size_t j = 0; j < n; ++j) q += norm2(ct[j]) * g.speed[j] * dth;

    momentum[i].resize(n);
    for (std::size_t j = 0; j < n; ++j)
      momentum[i][j] = (fv.phi * g.speed[j]) * ct[j];

    std::vector<double> wx(n), wy(n);
    for (std::size_t j = 0; j < n; ++j) {
      const Point2 w = norm2(ct[j]) * g.tangent[j];  // |c_t|^2 c_theta / |c_theta|
      wx[j] = w.x;
      wy[j] = w.y;
    }
    const auto dwx = fourier::derivative(wx, 1, two_pi);
    const auto dwy = fourier::derivative(wy, 1, two_pi);

    local[i].resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const Point2 ctheta = g.speed[j] * g.tangent[j];
      local[i][j] = 0.5 * fv.dphi * g.curvature[j] * q * rot90(ctheta) +
                    0.5 * fv.phi * Point2{dwx[j], dwy[j]};
    }
  }

  const double dt = p.dt();
  double formula = 0.0;
  for (std::size_t i = 0; i < nt; ++i) {
    const double wt = (i == 0 || i == nt - 1) ? 0.5 * dt : dt;
    for (std::size_t j = 0; j < n; ++j) {
      Point2 dmom;
      if (i == 0)
        dmom = (-3.0 * momentum[0][j] + 4.0 * momentum[1][j] - momentum[2][j]) /
               (2.0 * dt);
      else if (i == nt - 1)
        dmom = (3.0 * momentum[nt - 1][j] - 4.0 * momentum[nt - 2][j] +
                momentum[nt - 3][j]) /
               (2.0 * dt);
      else
        dmom = (momentum[i + 1][j] - momentum[i - 1][j]) / (2.0 * dt);
      const Point2 F = dmom + local[i][j];
      formula -= wt * dot(perturbation[i][j], F) * dth;
    }
  }

  VariationCheck out;
  out.fd_derivative = fd;
  out.formula_derivative = formula;
  const double scale = std::max({std::abs(fd), std::abs(formula), 1e-300});
  out.relative_error = std::abs(fd - formula) / scale;
  return out;
}

// Arclength measure of { |a| > 1e-8 * max |a| }.
inline double support_measure(const ScalarField& a, const DiscreteCurve& c,
                              DiffScheme scheme = DiffScheme::spectral) {
  if (a.size() != c.size())
    throw std::invalid_argument("support_measure: field/curve size mismatch");
  const CurveGeometry g = geometry(c, scheme);
  double amax = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j)
    amax = std::max(amax, std::abs(a[j]));
  const double thresh = 1e-8 * amax;
  const double dth = two_pi / double(c.size());
  double measure = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j)
    if (std::abs(a[j]) > thresh) measure += g.speed[j] * dth;
  return measure;
}

}  // namespace shapemetrics
