#include "beamstab/reference.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace beamstab {

namespace {

// Characteristic determinant for mode shapes
//   Y = A (cosh bx - cos bx) + B (sinh bx - sin bx),
// which already satisfy Y(0) = Y'(0) = 0. The tip conditions
//   c Y'''(l) + w^2 m Y(l) = 0,   c Y''(l) - w^2 J Y'(l) = 0
// with w^2 = c b^4 / rho give a 2x2 system; its determinant is scaled by
// cosh^2(bl) to stay bounded for large arguments.
double char_det(double b, double l, double rho, double c, double m, double J) {
  const double s = b * l;
  const double ch = std::cosh(s), sh = std::sinh(s);
  const double co = std::cos(s), si = std::sin(s);

  const double f1 = ch - co, f2 = sh - si;
  const double d1 = sh + si, d2 = ch - co;
  const double dd1 = ch + co, dd2 = sh + si;
  const double ddd1 = sh - si, ddd2 = ch + co;

  const double w2 = c * b * b * b * b / rho;
  const double b2 = b * b, b3 = b2 * b;

  const double a11 = c * b3 * ddd1 + w2 * m * f1;
  const double a12 = c * b3 * ddd2 + w2 * m * f2;
  const double a21 = c * b2 * dd1 - w2 * J * b * d1;
  const double a22 = c * b2 * dd2 - w2 * J * b * d2;

  return (a11 * a22 - a12 * a21) / (ch * ch);
}

}  // namespace

std::vector<double> reference_frequencies(double l, double rho, double c, double m,
                                          double J, int count) {
  if (!(l > 0.0) || !(rho > 0.0) || !(c > 0.0))
    throw std::invalid_argument("reference_frequencies: need l, rho, c > 0");
  if (m < 0.0 || J < 0.0)
    throw std::invalid_argument("reference_frequencies: m and J must be >= 0");
  if (count < 1) throw std::invalid_argument("reference_frequencies: count < 1");

  auto det = [&](double b) { return char_det(b, l, rho, c, m, J); };

  std::vector<double> roots;
  const double step = std::numbers::pi / (400.0 * l);
  double b_prev = 1e-3 / l;
  double v_prev = det(b_prev);
  // roots are asymptotically pi/l apart; scan generously past the requested count
  const double b_max = (count + 3) * std::numbers::pi / l + 1.0 / l;
  for (double b = b_prev + step; b <= b_max && static_cast<int>(roots.size()) < count;
       b += step) {
    const double v = det(b);
    if (v == 0.0) {
      roots.push_back(b);
    } else if (v_prev * v < 0.0) {
      double lo = b_prev, hi = b;
      double vlo = v_prev;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double vm = det(mid);
        if (vm == 0.0) {
          lo = hi = mid;
          break;
        }
        if (vlo * vm < 0.0) {
          hi = mid;
        } else {
          lo = mid;
          vlo = vm;
        }
        if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    b_prev = b;
    v_prev = v;
  }
  if (static_cast<int>(roots.size()) < count)
    throw std::runtime_error("reference_frequencies: root scan exhausted");

  std::vector<double> freq(roots.size());
  for (std::size_t i = 0; i < roots.size(); ++i)
    freq[i] = roots[i] * roots[i] * std::sqrt(c / rho);
  return freq;
}

}  // namespace beamstab
