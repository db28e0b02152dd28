#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

// Periodic spectral machinery: FFT for arbitrary sizes (radix-2 core with a
// Bluestein fallback), spectral differentiation of uniformly sampled periodic
// data, and evaluation of the trigonometric interpolant at arbitrary points.

namespace shapemetrics::fourier {

using cplx = std::complex<double>;

namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative Cooley-Tukey, in place, size must be a power of two.
// sign = -1: forward, sign = +1: inverse (unscaled).
inline void fft_pow2(std::vector<cplx>& a, int sign) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = double(sign) * 2.0 * std::numbers::pi / double(len);
    const cplx wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cplx w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const cplx u = a[i + k];
        const cplx v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// Bluestein chirp-z: DFT of arbitrary size via one power-of-two convolution.
inline void fft_bluestein(std::vector<cplx>& a, int sign) {
  const std::size_t n = a.size();
  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;

  // chirp(j) = exp(sign * i * pi * j^2 / n); j^2 taken mod 2n keeps angles small
  std::vector<cplx> chirp(n);
  for (std::size_t j = 0; j < n; ++j) {
    const unsigned long long q =
        (static_cast<unsigned long long>(j) * j) % (2ull * n);
    const double ang = double(sign) * std::numbers::pi * double(q) / double(n);
    chirp[j] = cplx(std::cos(ang), std::sin(ang));
  }

  std::vector<cplx> x(m, cplx(0.0, 0.0)), y(m, cplx(0.0, 0.0));
  for (std::size_t j = 0; j < n; ++j) x[j] = a[j] * chirp[j];
  y[0] = std::conj(chirp[0]);
  for (std::size_t j = 1; j < n; ++j) {
    y[j] = std::conj(chirp[j]);
    y[m - j] = std::conj(chirp[j]);
  }
  fft_pow2(x, -1);
  fft_pow2(y, -1);
  for (std::size_t j = 0; j < m; ++j) x[j] *= y[j];
  fft_pow2(x, +1);
  for (std::size_t j = 0; j < n; ++j) a[j] = x[j] * chirp[j] / double(m);
}

}  // namespace detail

// In-place DFT, any size. sign = -1 forward, +1 inverse (unscaled).
inline void fft(std::vector<cplx>& a, int sign) {
  if (a.size() < 2) return;
  if (detail::is_pow2(a.size()))
    detail::fft_pow2(a, sign);
  else
    detail::fft_bluestein(a, sign);
}

// Forward spectrum of real samples: F_k = sum_j f_j exp(-2*pi*i*j*k/n).
inline std::vector<cplx> spectrum(const std::vector<double>& f) {
  std::vector<cplx> a(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) a[j] = cplx(f[j], 0.0);
  fft(a, -1);
  return a;
}

// Zero coefficients at the rounding-noise floor. Smooth data has an
// exponentially decaying tail, so this changes values by O(1e-13 * scale)
// at most; it keeps noise from being amplified by differentiation inside
// evolution loops, where unfiltered mode-k errors grow like exp(k t / r).
inline void noise_floor_filter(std::vector<cplx>& spec,
                               double rel_threshold = 1e-13) {
  double peak = 0.0;
  for (const cplx& c : spec) peak = std::max(peak, std::abs(c));
  const double cut = rel_threshold * peak;
  for (cplx& c : spec)
    if (std::abs(c) < cut) c = cplx(0.0, 0.0);
}

// Spectral derivative of order 1 or 2 of periodic samples on a uniform grid
// covering one period. Order 1 zeroes the Nyquist mode; order 2 keeps it.
inline std::vector<double> derivative(const std::vector<double>& f, int order,
                                      double period) {
  if (order != 1 && order != 2)
    throw std::invalid_argument("derivative: order must be 1 or 2");
  if (!(period > 0.0))
    throw std::invalid_argument("derivative: period must be positive");
  const std::size_t n = f.size();
  std::vector<cplx> a = spectrum(f);
  noise_floor_filter(a);
  const double w0 = 2.0 * std::numbers::pi / period;
  for (std::size_t k = 0; k < n; ++k) {
    const bool nyquist = (n % 2 == 0 && k == n / 2);
    const double s = (k <= n / 2) ? double(k) : double(k) - double(n);
    const double w = w0 * s;
    if (order == 1) {
      a[k] = nyquist ? cplx(0.0, 0.0) : a[k] * cplx(0.0, w);
    } else {
      a[k] *= -w * w;
    }
  }
  fft(a, +1);
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = a[j].real() / double(n);
  return out;
}

// Trigonometric interpolant of real periodic samples; evaluates the band
// limited interpolant and its running integral at arbitrary points.
class TrigSeries {
 public:
  TrigSeries(const std::vector<double>& samples, double period)
      : n_(samples.size()), period_(period) {
    if (n_ < 2) throw std::invalid_argument("TrigSeries: need >= 2 samples");
    if (!(period > 0.0))
      throw std::invalid_argument("TrigSeries: period must be positive");
    coeff_ = spectrum(samples);
    noise_floor_filter(coeff_);
    for (auto& c : coeff_) c /= double(n_);
  }

  double period() const { return period_; }
  double mean() const { return coeff_[0].real(); }

  // Interpolant value at x (any real; periodic continuation).
  double operator()(double x) const {
    const double w0 = 2.0 * std::numbers::pi / period_;
    const std::size_t half = n_ / 2;
    const cplx z = std::polar(1.0, w0 * x);
    cplx zk = z;
    double acc = coeff_[0].real();
    for (std::size_t k = 1; k < half + (n_ % 2); ++k) {
      acc += 2.0 * (coeff_[k] * zk).real();
      zk *= z;
    }
    if (n_ % 2 == 0)
      acc += coeff_[half].real() * std::cos(w0 * double(half) * x);
    return acc;
  }

  // Integral of the interpolant from 0 to x.
  double integral0(double x) const {
    const double w0 = 2.0 * std::numbers::pi / period_;
    const std::size_t half = n_ / 2;
    const cplx z = std::polar(1.0, w0 * x);
    cplx zk = z;
    double acc = coeff_[0].real() * x;
    for (std::size_t k = 1; k < half + (n_ % 2); ++k) {
      const cplx iw(0.0, w0 * double(k));
      acc += 2.0 * (coeff_[k] * (zk - 1.0) / iw).real();
      zk *= z;
    }
    if (n_ % 2 == 0) {
      const double w = w0 * double(half);
      acc += coeff_[half].real() * std::sin(w * x) / w;
    }
    return acc;
  }

 private:
  std::size_t n_;
  double period_;
  std::vector<cplx> coeff_;
};

}  // namespace shapemetrics::fourier
