#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "shapemetrics/metric.hpp"

// Sectional curvature of G^phi on the shape space, evaluated at an
// arclength-parametrized curve in the plane P(m, h) spanned by two scalar
// normal fields. Inner products live on the arclength-scaled circle:
// <u, v> = integral u v ds over [0, l], field derivatives are d/ds.
//
//   k_c(P(m,h)) = (phi/2) |m'h - mh'|^2
//               - (phi'/2phi) (|m'|^2 + |h'|^2)
//               + (phi'/4phi) (|m kappa|^2 + |h kappa|^2)
//               + ((3phi'^2 - 2 phi phi'') / 4phi^2) (<m,kappa>^2 + <h,kappa>^2)
//               - (phi'^2 / 4phi^3) |kappa|^2
//
// Boundedness criterion: for fixed m, k_c(P(m, .)) is bounded above iff
// max m^2 <= phi'/phi^2.

namespace shapemetrics {

struct TangentPlane {
  DiscreteCurve curve;  // arclength-parametrized
  ScalarField m;
  ScalarField h;
};

struct BoundednessReport {
  bool bounded = false;
  double margin = 0.0;  // phi'/phi^2 - max m^2
};

struct ProbeResult {
  std::vector<double> values;     // k_c(P(m, h_f)) per requested frequency
  bool used_full_circle = false;  // the excess set was empty or everything
};

namespace detail {

// Sanity guard: the arclength inner products below assume equispaced
// samples. Chord lengths of legitimate arclength parametrizations agree to
// O((ds * kappa)^2), so the tolerance is loose.
inline void require_arclength(const DiscreteCurve& c) {
  const std::size_t n = c.size();
  double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = norm(c.points[(j + 1) % n] - c.points[j]);
    mn = std::min(mn, d);
    mx = std::max(mx, d);
  }
  if (!(mn > 0.0) || (mx - mn) > 1e-3 * mx)
    throw std::invalid_argument("expected an arclength-parametrized curve");
}

struct ArcFrame {
  double ell;         // curve length
  double ds;          // ell / N
  ScalarField kappa;  // curvature per sample
};

inline ArcFrame arc_frame(const DiscreteCurve& c, DiffScheme scheme) {
  require_arclength(c);
  const CurveGeometry g = geometry(c, scheme);
  return {g.length, g.length / double(c.size()), g.curvature};
}

inline double dot_s(const ArcFrame& fr, const ScalarField& u,
                    const ScalarField& v) {
  double acc = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) acc += u[j] * v[j];
  return acc * fr.ds;
}

inline ScalarField deriv_s(const ArcFrame& fr, const ScalarField& u) {
  return ScalarField(fourier::derivative(u.values, 1, fr.ell));
}

// C2 bump window: smootherstep ramps at both ends of [0, width].
inline double smootherstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * x * (x * (6.0 * x - 15.0) + 10.0);
}

}  // namespace detail

// Gram-Schmidt in the arclength inner product, then scaling to
// phi |m|^2 = phi |h|^2 = 1.
inline TangentPlane orthonormalize(const ConformalFactor& cf,
                                   const DiscreteCurve& c,
                                   const ScalarField& m_raw,
                                   const ScalarField& h_raw,
                                   DiffScheme scheme = DiffScheme::spectral) {
  if (m_raw.size() != c.size() || h_raw.size() != c.size())
    throw std::invalid_argument("orthonormalize: field/curve size mismatch");
  const detail::ArcFrame fr = detail::arc_frame(c, scheme);
  const double phi = factor_values(cf, fr.ell).phi;

  const double mm = detail::dot_s(fr, m_raw, m_raw);
  const double hh = detail::dot_s(fr, h_raw, h_raw);
  const double mh = detail::dot_s(fr, m_raw, h_raw);
  if (!(mm > 0.0) || !(hh > 0.0))
    throw std::invalid_argument("orthonormalize: zero input field");
  // Gram determinant of the unit-scaled pair: 1 - cos^2(angle).
  if (1.0 - (mh * mh) / (mm * hh) <= 1e-12)
    throw std::invalid_argument("orthonormalize: inputs are linearly dependent");

  const std::size_t n = c.size();
  ScalarField m(n, 0.0), h(n, 0.0);
  const double ms = 1.0 / std::sqrt(phi * mm);
  for (std::size_t j = 0; j < n; ++j) m[j] = ms * m_raw[j];

  const double proj = detail::dot_s(fr, h_raw, m) / detail::dot_s(fr, m, m);
  for (std::size_t j = 0; j < n; ++j) h[j] = h_raw[j] - proj * m[j];
  const double hs = 1.0 / std::sqrt(phi * detail::dot_s(fr, h, h));
  for (std::size_t j = 0; j < n; ++j) h[j] *= hs;

  return TangentPlane{c, std::move(m), std::move(h)};
}

// Gamma_0(h, k) = (1/2) kappa h k
//              + (phi'/2phi) [ <kappa,h> k + <kappa,k> h - <h,k> kappa ].
inline ScalarField christoffel(const ConformalFactor& cf,
                               const DiscreteCurve& c, const ScalarField& h,
                               const ScalarField& k,
                               DiffScheme scheme = DiffScheme::spectral) {
  if (h.size() != c.size() || k.size() != c.size())
    throw std::invalid_argument("christoffel: field/curve size mismatch");
  const detail::ArcFrame fr = detail::arc_frame(c, scheme);
  const FactorValues fv = factor_values(cf, fr.ell);
  const double ratio = fv.dphi / (2.0 * fv.phi);
  const double kh = detail::dot_s(fr, fr.kappa, h);
  const double kk = detail::dot_s(fr, fr.kappa, k);
  const double hk = detail::dot_s(fr, h, k);
  std::vector<double> out(c.size());
  for (std::size_t j = 0; j < c.size(); ++j)
    out[j] = 0.5 * fr.kappa[j] * (h[j] * k[j]) +
             ratio * (kh * k[j] + kk * h[j] - hk * fr.kappa[j]);
  return ScalarField(std::move(out));
}

inline double sectional_curvature(const ConformalFactor& cf,
                                  const TangentPlane& plane,
                                  DiffScheme scheme = DiffScheme::spectral) {
  const DiscreteCurve& c = plane.curve;
  const ScalarField& m = plane.m;
  const ScalarField& h = plane.h;
  if (m.size() != c.size() || h.size() != c.size())
    throw std::invalid_argument("sectional_curvature: size mismatch");
  const detail::ArcFrame fr = detail::arc_frame(c, scheme);
  const FactorValues fv = factor_values(cf, fr.ell);

  if (std::abs(fv.phi * detail::dot_s(fr, m, m) - 1.0) > 1e-8 ||
      std::abs(fv.phi * detail::dot_s(fr, h, h) - 1.0) > 1e-8 ||
      std::abs(fv.phi * detail::dot_s(fr, m, h)) > 1e-8)
    throw std::invalid_argument(
        "sectional_curvature: plane is not orthonormalized");

  const std::size_t n = c.size();
  const ScalarField dm = detail::deriv_s(fr, m);
  const ScalarField dh = detail::deriv_s(fr, h);

  ScalarField wronsk(n, 0.0), mk(n, 0.0), hk(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    wronsk[j] = dm[j] * h[j] - m[j] * dh[j];
    mk[j] = m[j] * fr.kappa[j];
    hk[j] = h[j] * fr.kappa[j];
  }

  const double phi = fv.phi, dphi = fv.dphi, ddphi = fv.ddphi;
  const double t1 = 0.5 * phi * detail::dot_s(fr, wronsk, wronsk);
  const double t2 = -0.5 * (dphi / phi) *
                    (detail::dot_s(fr, dm, dm) + detail::dot_s(fr, dh, dh));
  const double t3 = 0.25 * (dphi / phi) *
                    (detail::dot_s(fr, mk, mk) + detail::dot_s(fr, hk, hk));
  const double cm = detail::dot_s(fr, m, fr.kappa);
  const double ch = detail::dot_s(fr, h, fr.kappa);
  const double t4 =
      (3.0 * dphi * dphi - 2.0 * phi * ddphi) / (4.0 * phi * phi) *
      (cm * cm + ch * ch);
  const double t5 = -(dphi * dphi) / (4.0 * phi * phi * phi) *
                    detail::dot_s(fr, fr.kappa, fr.kappa);
  return t1 + t2 + t3 + t4 + t5;
}

// For a fixed normalized direction m: k_c(P(m, .)) is bounded from above iff
// max m^2 <= phi'/phi^2. margin = phi'/phi^2 - max m^2.
inline BoundednessReport boundedness(const ConformalFactor& cf,
                                     const DiscreteCurve& c,
                                     const ScalarField& m,
                                     DiffScheme scheme = DiffScheme::spectral) {
  if (m.size() != c.size())
    throw std::invalid_argument("boundedness: field/curve size mismatch");
  const detail::ArcFrame fr = detail::arc_frame(c, scheme);
  const FactorValues fv = factor_values(cf, fr.ell);
  if (std::abs(fv.phi * detail::dot_s(fr, m, m) - 1.0) > 1e-8)
    throw std::invalid_argument("boundedness: m is not normalized");
  double maxsq = 0.0;
  for (std::size_t j = 0; j < m.size(); ++j)
    maxsq = std::max(maxsq, m[j] * m[j]);
  const double thresh = fv.dphi / (fv.phi * fv.phi);
  return {maxsq <= thresh + 1e-12, thresh - maxsq};
}

// Probe the unboundedness mechanism: h_f is a frequency-f wave under a C2
// bump window supported on the excess set U = { m^2 > phi'/phi^2 + eps },
// orthonormalized against m. Under the unbounded condition k_c grows ~ f^2;
// in the bounded case U is empty, the whole circle is used, and the values
// stay flat. Frequencies above N/4 are rejected (aliasing guard).
inline ProbeResult curvature_blowup_probe(const ConformalFactor& cf,
                                          const DiscreteCurve& c,
                                          const ScalarField& m,
                                          const std::vector<std::size_t>& freqs,
                                          DiffScheme scheme = DiffScheme::spectral) {
  if (m.size() != c.size())
    throw std::invalid_argument("curvature_blowup_probe: size mismatch");
  const std::size_t n = c.size();
  for (std::size_t f : freqs)
    if (f == 0 || f > n / 4)
      throw std::invalid_argument(
          "curvature_blowup_probe: frequency outside [1, N/4]");

  const detail::ArcFrame fr = detail::arc_frame(c, scheme);
  const FactorValues fv = factor_values(cf, fr.ell);
  if (std::abs(fv.phi * detail::dot_s(fr, m, m) - 1.0) > 1e-8)
    throw std::invalid_argument("curvature_blowup_probe: m is not normalized");

  double maxsq = 0.0;
  for (std::size_t j = 0; j < n; ++j) maxsq = std::max(maxsq, m[j] * m[j]);
  const double base = fv.dphi / (fv.phi * fv.phi);
  const double thresh = base + 1e-8 * std::max(base, maxsq);

  std::vector<bool> in_u(n);
  std::size_t count = 0;
  for (std::size_t j = 0; j < n; ++j) {
    in_u[j] = m[j] * m[j] > thresh;
    if (in_u[j]) ++count;
  }

  ProbeResult result;
  std::size_t run_start = 0, run_len = n;
  if (count == 0 || count == n) {
    result.used_full_circle = true;
  } else {
    // longest circular run of members
    std::size_t best_len = 0, best_start = 0, cur_len = 0, cur_start = 0;
    for (std::size_t j = 0; j < 2 * n; ++j) {
      if (in_u[j % n]) {
        if (cur_len == 0) cur_start = j;
        if (++cur_len > best_len && cur_len <= n) {
          best_len = cur_len;
          best_start = cur_start;
        }
      } else {
        cur_len = 0;
      }
    }
    run_start = best_start % n;
    run_len = best_len;
  }

  std::vector<double> window(n, 1.0);
  if (!result.used_full_circle) {
    window.assign(n, 0.0);
    const double ramp = 0.1 * double(run_len);
    for (std::size_t q = 0; q < run_len; ++q) {
      const double up = detail::smootherstep(double(q) / ramp);
      const double down = detail::smootherstep(double(run_len - 1 - q) / ramp);
      window[(run_start + q) % n] = std::min(up, down);
    }
  }

  for (std::size_t f : freqs) {
    std::vector<double> hr(n);
    for (std::size_t q = 0; q < n; ++q) {
      const std::size_t j = (run_start + q) % n;
      const double s = fr.ds * double(q);
      hr[j] = window[j] * std::sin(two_pi * double(f) * s / fr.ell);
    }
    const TangentPlane plane =
        orthonormalize(cf, c, m, ScalarField(std::move(hr)), scheme);
    result.values.push_back(sectional_curvature(cf, plane, scheme));
  }
  return result;
}

}  // namespace shapemetrics
