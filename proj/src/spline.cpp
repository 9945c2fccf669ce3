#include "bzwalk/spline.hpp"

#include <cmath>

#include "bzwalk/error.hpp"
#include "bzwalk/fft.hpp"

namespace bzwalk {

PeriodicCubicSpline::PeriodicCubicSpline(double x0, double period, std::span<const double> samples)
    : x0_(x0), period_(period), y_(samples.begin(), samples.end()) {
  const std::size_t n = y_.size();
  if (n < 4) throw InvalidParameter("periodic spline needs at least 4 samples");
  if (!(period > 0.0)) throw InvalidParameter("spline period must be positive");
  h_ = period / static_cast<double>(n);

  // m_{i-1} + 4 m_i + m_{i+1} = 6 (y_{i+1} - 2 y_i + y_{i-1}) / h^2 is circulant,
  // so it diagonalizes in the Fourier basis.
  std::vector<cplx> rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double yp = y_[(i + 1) % n];
    const double ym = y_[(i + n - 1) % n];
    rhs[i] = 6.0 * (yp - 2.0 * y_[i] + ym) / (h_ * h_);
  }
  Fft fft(n);
  fft.forward(rhs);
  for (std::size_t j = 0; j < n; ++j) {
    const double c = std::cos(2.0 * std::numbers::pi * static_cast<double>(j) / n);
    rhs[j] /= (4.0 + 2.0 * c) * static_cast<double>(n);
  }
  fft.backward(rhs);
  m_.resize(n);
  for (std::size_t i = 0; i < n; ++i) m_[i] = rhs[i].real();

  full_ = 0.0;
  for (std::size_t i = 0; i < n; ++i) full_ += segment_integral(static_cast<int>(i), 0.0, 1.0);
}

double PeriodicCubicSpline::operator()(double x) const {
  const int n = static_cast<int>(y_.size());
  double u = (x - x0_) / h_;
  u -= n * std::floor(u / n);
  int i = static_cast<int>(std::floor(u));
  if (i >= n) i = n - 1;
  const double t = u - i;
  const int j = (i + 1) % n;
  const double a = 1.0 - t;
  return a * y_[i] + t * y_[j] +
         h_ * h_ / 6.0 * ((a * a * a - a) * m_[i] + (t * t * t - t) * m_[j]);
}

double PeriodicCubicSpline::segment_integral(int i, double t0, double t1) const {
  const int n = static_cast<int>(y_.size());
  const int j = (i + 1) % n;
  // antiderivative in t of a y_i + t y_j + h^2/6 ((a^3-a) m_i + (t^3-t) m_j), a = 1-t
  auto prim = [&](double t) {
    const double a = 1.0 - t;
    return -a * a / 2.0 * y_[i] + t * t / 2.0 * y_[j] +
           h_ * h_ / 6.0 * ((-a * a * a * a / 4.0 + a * a / 2.0) * m_[i] +
                            (t * t * t * t / 4.0 - t * t / 2.0) * m_[j]);
  };
  return h_ * (prim(t1) - prim(t0));
}

double PeriodicCubicSpline::cumulative(double x) const {
  const int n = static_cast<int>(y_.size());
  const double u = (x - x0_) / h_;
  const double wraps = std::floor(u / n);
  double r = u - wraps * n;
  int i = static_cast<int>(std::floor(r));
  if (i >= n) i = n - 1;
  double s = wraps * full_;
  for (int k = 0; k < i; ++k) s += segment_integral(k, 0.0, 1.0);
  return s + segment_integral(i, 0.0, r - i);
}

double PeriodicCubicSpline::integrate(double a, double b) const {
  return cumulative(b) - cumulative(a);
}

}  // namespace bzwalk
