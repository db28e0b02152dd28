#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "shapemetrics/fourier.hpp"

// Closed immersed planar curves sampled at N uniformly spaced parameter
// values theta_j = 2*pi*j/N, implicitly closed, with derived differential
// geometry (tangent, normal, curvature, length, winding and rotation numbers).
//
// Conventions (fixed throughout the library):
//   n = i * c_theta / |c_theta|   (90 degree CCW rotation of the unit tangent,
//                                  which points inward for a CCW circle)
//   kappa = det(c_theta, c_theta_theta) / |c_theta|^3  (positive for a CCW circle)
//   a > 0 in c_t = a * n shrinks a CCW circle.

namespace shapemetrics {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
inline Point2 operator/(Point2 a, double s) { return {a.x / s, a.y / s}; }
inline Point2& operator+=(Point2& a, Point2 b) { a.x += b.x; a.y += b.y; return a; }
inline Point2& operator-=(Point2& a, Point2 b) { a.x -= b.x; a.y -= b.y; return a; }

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm2(Point2 a) { return a.x * a.x + a.y * a.y; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }

// Multiplication by i when the plane is read as the complex numbers.
inline Point2 rot90(Point2 v) { return {-v.y, v.x}; }

inline bool finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

// Thrown when a discrete tangent vanishes or an evolution breaks the
// immersion invariant; carries the failure time for mid-integration aborts.
class immersion_error : public std::runtime_error {
 public:
  explicit immersion_error(const std::string& what)
      : std::runtime_error(what) {}
  immersion_error(const std::string& what, double t)
      : std::runtime_error(what + " (t = " + std::to_string(t) + ")"),
        failure_time(t) {}
  std::optional<double> failure_time;
};

// Real-valued function on a curve's samples (normal speeds, tangent-plane
// directions, chart offsets).
struct ScalarField {
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(std::vector<double> v) : values(std::move(v)) {}
  ScalarField(std::size_t n, double fill) : values(n, fill) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

// Closed curve through N >= 8 points at uniform parameter spacing; the
// successor of the last point is the first.
struct DiscreteCurve {
  std::vector<Point2> points;

  explicit DiscreteCurve(std::vector<Point2> pts) : points(std::move(pts)) {
    if (points.size() < 8)
      throw std::invalid_argument("DiscreteCurve: need at least 8 samples");
    for (const Point2& p : points)
      if (!finite(p))
        throw std::invalid_argument("DiscreteCurve: non-finite coordinate");
  }

  std::size_t size() const { return points.size(); }
};

enum class DiffScheme { spectral, central };

struct CurveGeometry {
  std::vector<Point2> tangent;  // unit
  std::vector<Point2> normal;   // i * tangent
  ScalarField curvature;
  ScalarField speed;  // |c_theta|
  double length = 0.0;
  int rotation_index = 0;
};

// ---------------------------------------------------------------------------
// Constructors

inline DiscreteCurve make_circle(Point2 center, double radius, std::size_t n) {
  if (!(radius > 0.0))
    throw std::invalid_argument("make_circle: radius must be positive");
  if (n < 8) throw std::invalid_argument("make_circle: need at least 8 samples");
  std::vector<Point2> pts(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double th = two_pi * double(j) / double(n);
    pts[j] = {center.x + radius * std::cos(th), center.y + radius * std::sin(th)};
  }
  return DiscreteCurve(std::move(pts));
}

inline DiscreteCurve make_ellipse(Point2 center, double a, double b,
                                  std::size_t n) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("make_ellipse: semi-axes must be positive");
  if (n < 8) throw std::invalid_argument("make_ellipse: need at least 8 samples");
  std::vector<Point2> pts(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double th = two_pi * double(j) / double(n);
    pts[j] = {center.x + a * std::cos(th), center.y + b * std::sin(th)};
  }
  return DiscreteCurve(std::move(pts));
}

// Gerono lemniscate: a smooth figure-eight immersion with rotation index 0.
inline DiscreteCurve make_figure_eight(double scale, std::size_t n) {
  if (!(scale > 0.0))
    throw std::invalid_argument("make_figure_eight: scale must be positive");
  if (n < 8)
    throw std::invalid_argument("make_figure_eight: need at least 8 samples");
  std::vector<Point2> pts(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double th = two_pi * double(j) / double(n);
    pts[j] = {scale * std::sin(th), scale * std::sin(th) * std::cos(th)};
  }
  return DiscreteCurve(std::move(pts));
}

// Axis-aligned square with circular corner fillets, sampled uniformly by
// arclength, counterclockwise, starting at the bottom edge midpoint. C^1,1:
// the curvature is a step function (0 on edges, 1/corner_radius on fillets),
// so pair it with DiffScheme::central.
inline DiscreteCurve make_rounded_square(Point2 center, double side,
                                         double corner_radius, std::size_t n) {
  if (!(side > 0.0) || !(corner_radius > 0.0) || !(corner_radius < side / 2.0))
    throw std::invalid_argument(
        "make_rounded_square: need 0 < corner_radius < side/2");
  if (n < 8)
    throw std::invalid_argument("make_rounded_square: need at least 8 samples");
  const double h = side / 2.0;
  const double r = corner_radius;
  const double straight = side - 2.0 * r;
  const double arc = 0.5 * pi * r;
  const double perimeter = 4.0 * straight + 4.0 * arc;

  // Walk pieces CCW from the bottom midpoint: half edge, then four corners
  // with full edges between, then the remaining half edge.
  struct Piece {
    bool is_arc;
    double len;
    Point2 p0;      // segment start (straight pieces)
    Point2 dir;     // unit direction (straight pieces)
    Point2 ctr;     // arc center
    double ang0;    // arc start angle
  };
  std::vector<Piece> pieces;
  const Point2 corners[4] = {{center.x + h - r, center.y - h + r},
                             {center.x + h - r, center.y + h - r},
                             {center.x - h + r, center.y + h - r},
                             {center.x - h + r, center.y - h + r}};
  const Point2 dirs[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const double arc_starts[4] = {-0.5 * pi, 0.0, 0.5 * pi, pi};

  Point2 start = {center.x, center.y - h};
  pieces.push_back({false, straight / 2.0, start, dirs[0], {}, 0.0});
  for (int k = 0; k < 4; ++k) {
    pieces.push_back({true, arc, {}, {}, corners[k], arc_starts[k]});
    const double seg = (k == 3) ? straight / 2.0 : straight;
    const Point2 from = {corners[k].x + r * std::cos(arc_starts[k] + 0.5 * pi),
                         corners[k].y + r * std::sin(arc_starts[k] + 0.5 * pi)};
    pieces.push_back({false, seg, from, dirs[(k + 1) % 4], {}, 0.0});
  }

  std::vector<Point2> pts(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = perimeter * double(j) / double(n);
    for (const Piece& pc : pieces) {
      if (s <= pc.len || &pc == &pieces.back()) {
        if (pc.is_arc) {
          const double ang = pc.ang0 + s / r;
          pts[j] = {pc.ctr.x + r * std::cos(ang), pc.ctr.y + r * std::sin(ang)};
        } else {
          pts[j] = pc.p0 + s * pc.dir;
        }
        break;
      }
      s -= pc.len;
    }
  }
  return DiscreteCurve(std::move(pts));
}

// ---------------------------------------------------------------------------
// Geometry

namespace detail {

inline void curve_derivatives(const DiscreteCurve& c, DiffScheme scheme,
                              std::vector<Point2>& d1,
                              std::vector<Point2>& d2) {
  const std::size_t n = c.size();
  d1.resize(n);
  d2.resize(n);
  if (scheme == DiffScheme::spectral) {
    std::vector<double> xs(n), ys(n);
    for (std::size_t j = 0; j < n; ++j) {
      xs[j] = c.points[j].x;
      ys[j] = c.points[j].y;
    }
    const auto x1 = fourier::derivative(xs, 1, two_pi);
    const auto y1 = fourier::derivative(ys, 1, two_pi);
    const auto x2 = fourier::derivative(xs, 2, two_pi);
    const auto y2 = fourier::derivative(ys, 2, two_pi);
    for (std::size_t j = 0; j < n; ++j) {
      d1[j] = {x1[j], y1[j]};
      d2[j] = {x2[j], y2[j]};
    }
  } else {
    const double dth = two_pi / double(n);
    for (std::size_t j = 0; j < n; ++j) {
      const Point2 prev = c.points[(j + n - 1) % n];
      const Point2 next = c.points[(j + 1) % n];
      const Point2 cur = c.points[j];
      d1[j] = (next - prev) / (2.0 * dth);
      d2[j] = (next - 2.0 * cur + prev) / (dth * dth);
    }
  }
}

inline double polyline_length(const DiscreteCurve& c) {
  double len = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j)
    len += norm(c.points[(j + 1) % c.size()] - c.points[j]);
  return len;
}

}  // namespace detail

inline CurveGeometry geometry(const DiscreteCurve& c,
                              DiffScheme scheme = DiffScheme::spectral) {
  const std::size_t n = c.size();
  const double dth = two_pi / double(n);

  // Scheme-independent part of the immersion invariant: no repeated
  // adjacent points (chord length measured against the curve scale).
  const double chord_tol =
      1e-10 * (detail::polyline_length(c) / two_pi) * dth;
  for (std::size_t j = 0; j < n; ++j)
    if (!(norm(c.points[(j + 1) % n] - c.points[j]) > chord_tol))
      throw immersion_error("geometry: repeated adjacent points at sample " +
                            std::to_string(j));

  std::vector<Point2> d1, d2;
  detail::curve_derivatives(c, scheme, d1, d2);

  CurveGeometry g;
  g.tangent.resize(n);
  g.normal.resize(n);
  g.curvature.values.resize(n);
  g.speed.values.resize(n);

  double length = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    g.speed[j] = norm(d1[j]);
    length += g.speed[j] * dth;
  }
  g.length = length;

  const double tol = 1e-10 * (length / two_pi);
  for (std::size_t j = 0; j < n; ++j) {
    if (!(g.speed[j] > tol))
      throw immersion_error("geometry: vanishing discrete tangent at sample " +
                            std::to_string(j));
  }

  double turning = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    g.tangent[j] = d1[j] / g.speed[j];
    g.normal[j] = rot90(g.tangent[j]);
    g.curvature[j] = cross(d1[j], d2[j]) / (g.speed[j] * g.speed[j] * g.speed[j]);
    turning += g.curvature[j] * g.speed[j] * dth;
  }
  g.rotation_index = static_cast<int>(std::lround(turning / two_pi));
  return g;
}

// ---------------------------------------------------------------------------
// Arclength resampling

namespace detail {

struct CurveSeries {
  fourier::TrigSeries x, y, speed;
  double length;

  explicit CurveSeries(const DiscreteCurve& c)
      : x(extract(c, true), two_pi),
        y(extract(c, false), two_pi),
        speed(speeds(c), two_pi),
        length(speed.mean() * two_pi) {}

  static std::vector<double> extract(const DiscreteCurve& c, bool want_x) {
    std::vector<double> v(c.size());
    for (std::size_t j = 0; j < c.size(); ++j)
      v[j] = want_x ? c.points[j].x : c.points[j].y;
    return v;
  }

  static std::vector<double> speeds(const DiscreteCurve& c) {
    std::vector<Point2> d1, d2;
    curve_derivatives(c, DiffScheme::spectral, d1, d2);
    std::vector<double> s(c.size());
    double mean = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
      s[j] = norm(d1[j]);
      mean += s[j] / double(c.size());
    }
    const double tol = 1e-10 * mean;  // |c_theta| > 1e-10 * (l / 2 pi)
    for (double v : s)
      if (!(v > tol))
        throw immersion_error("resample: vanishing discrete tangent");
    return s;
  }
};

// Solve arclength(theta) = target by safeguarded Newton on a known bracket.
inline double invert_arclength(const CurveSeries& cs, double target, double lo,
                               double hi) {
  const double tol = 1e-13 * cs.length;
  double theta = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double err = cs.speed.integral0(theta) - target;
    if (std::abs(err) < tol) return theta;
    if (err > 0.0)
      hi = theta;
    else
      lo = theta;
    const double sp = cs.speed(theta);
    double next = theta - err / sp;
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    theta = next;
  }
  return theta;
}

}  // namespace detail

struct ResampledCurve {
  DiscreteCurve curve;
  std::vector<double> source_params;  // parameter of each new sample on the input curve
};

// M samples at equal arclength spacing along the same trace, keeping sample 0
// at the input's sample 0.
inline ResampledCurve resample_arclength_detail(const DiscreteCurve& c,
                                                std::size_t m) {
  if (m < 8)
    throw std::invalid_argument("resample_arclength: need at least 8 samples");
  detail::CurveSeries cs(c);
  std::vector<double> params(m);
  std::vector<Point2> pts(m);
  params[0] = 0.0;
  pts[0] = c.points[0];
  double lo = 0.0;
  for (std::size_t k = 1; k < m; ++k) {
    const double target = cs.length * double(k) / double(m);
    // The next solution lies above the previous one; grow the bracket upward.
    double hi = std::min(params[k - 1] + 4.0 * two_pi / double(m), two_pi);
    while (cs.speed.integral0(hi) < target && hi < two_pi) {
      hi = std::min(hi + two_pi / double(m), two_pi);
    }
    params[k] = detail::invert_arclength(cs, target, lo, hi);
    lo = params[k];
    pts[k] = {cs.x(params[k]), cs.y(params[k])};
  }
  return {DiscreteCurve(std::move(pts)), std::move(params)};
}

inline DiscreteCurve resample_arclength(const DiscreteCurve& c, std::size_t m) {
  return resample_arclength_detail(c, m).curve;
}

// Evaluate a field given on uniform samples (period 2*pi) at new parameters.
inline ScalarField sample_field_at_params(const ScalarField& f,
                                          const std::vector<double>& params) {
  fourier::TrigSeries series(f.values, two_pi);
  std::vector<double> out(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) out[k] = series(params[k]);
  return ScalarField(std::move(out));
}

// ---------------------------------------------------------------------------
// Winding numbers and aligned sup distance

namespace detail {

inline double dist_point_segment(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = norm2(ab);
  if (len2 == 0.0) return norm(p - a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

inline double dist_to_trace(const DiscreteCurve& c, Point2 p) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < c.size(); ++j)
    d = std::min(d, dist_point_segment(p, c.points[j],
                                       c.points[(j + 1) % c.size()]));
  return d;
}

// Crossing-rule winding number for off-trace points; agrees with the
// turning-angle definition away from the trace and costs O(N) comparisons.
inline int winding_crossing(const DiscreteCurve& c, Point2 p) {
  int w = 0;
  const std::size_t n = c.size();
  for (std::size_t j = 0; j < n; ++j) {
    const Point2 a = c.points[j];
    const Point2 b = c.points[(j + 1) % n];
    if (a.y <= p.y) {
      if (b.y > p.y && cross(b - a, p - a) > 0.0) ++w;
    } else {
      if (b.y <= p.y && cross(b - a, p - a) < 0.0) --w;
    }
  }
  return w;
}

}  // namespace detail

// Sum of signed turning angles of c - p, divided by 2*pi.
inline int winding_number(const DiscreteCurve& c, Point2 p) {
  const double tol = 1e-9 * detail::polyline_length(c);
  if (detail::dist_to_trace(c, p) <= tol)
    throw std::invalid_argument("winding_number: point lies on the curve trace");
  double total = 0.0;
  const std::size_t n = c.size();
  for (std::size_t j = 0; j < n; ++j) {
    const Point2 u = c.points[j] - p;
    const Point2 v = c.points[(j + 1) % n] - p;
    total += std::atan2(cross(u, v), dot(u, v));
  }
  return static_cast<int>(std::lround(total / two_pi));
}

// Pointwise-aligned sup distance (no infimum over reparametrizations).
inline double sup_distance(const DiscreteCurve& c1, const DiscreteCurve& c2) {
  if (c1.size() != c2.size())
    throw std::invalid_argument("sup_distance: sample counts differ");
  double d = 0.0;
  for (std::size_t j = 0; j < c1.size(); ++j)
    d = std::max(d, norm(c1.points[j] - c2.points[j]));
  return d;
}

}  // namespace shapemetrics
