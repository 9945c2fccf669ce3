#pragma once

#include <span>
#include <vector>

namespace bzwalk {

/// Periodic cubic spline through uniformly spaced samples
/// y_i = f(x0 + i h), i = 0..n-1, with f(x + n h) = f(x).
class PeriodicCubicSpline {
 public:
  PeriodicCubicSpline() = default;
  PeriodicCubicSpline(double x0, double period, std::span<const double> samples);

  double operator()(double x) const;
  double period() const { return period_; }
  /// Exact integral of the spline over [a, b]; any a, b (wraps periodically).
  double integrate(double a, double b) const;

 private:
  double segment_integral(int i, double t0, double t1) const;
  double cumulative(double x) const;

  double x0_ = 0.0;
  double period_ = 1.0;
  double h_ = 1.0;
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives at the knots
  double full_ = 0.0;      // integral over one period
};

/// Composite Simpson rule with `intervals` (rounded up to even) panels.
template <class F>
double simpson(F&& f, double a, double b, int intervals) {
  if (intervals < 2) intervals = 2;
  if (intervals % 2) ++intervals;
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

}  // namespace bzwalk
