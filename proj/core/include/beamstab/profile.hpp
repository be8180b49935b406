#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace beamstab {

// Piecewise-cubic coefficient function on [0, l].  Interval k covers
// [breakpoints[k], breakpoints[k+1]] and evaluates as
//
//   f(x) = c0 + c1*u + c2*u^2 + c3*u^3,   u = x - breakpoints[k],
//
// i.e. coefficients are local to the interval start.  Construction enforces a
// strictly increasing breakpoint list starting at 0 and C0 continuity across
// interior breakpoints; C1/C2 can be queried where a caller requires more.
class Profile {
public:
  using Coeffs = std::array<double, 4>;

  Profile(std::vector<double> breakpoints, std::vector<Coeffs> coeffs);

  static Profile constant(double value, double length);
  static Profile linear(double v0, double v1, double length);
  // single cubic c0 + c1 x + c2 x^2 + c3 x^3 over [0, length]
  static Profile cubic(const Coeffs& global_coeffs, double length);
  static Profile zero(double length) { return constant(0.0, length); }

  double length() const { return breakpoints_.back(); }
  std::size_t intervals() const { return coeffs_.size(); }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const Coeffs& interval_coeffs(std::size_t k) const { return coeffs_[k]; }

  double operator()(double x) const { return eval_deriv(x, 0); }
  double derivative(double x) const { return eval_deriv(x, 1); }
  double second_derivative(double x) const { return eval_deriv(x, 2); }

  // largest |jump| of the given derivative (0, 1 or 2) over interior breakpoints
  double max_interior_jump(int deriv) const;
  bool is_c2(double rel_tol = 1e-9) const;

  // exact extrema over [0, l] via the per-interval cubic stationary points
  double min_value() const;
  double max_value() const;

  // actual polynomial degree (0..3), maximised over intervals
  int degree() const;

  // pointwise algebra; operands must share the domain [0, l]
  Profile scaled(double s) const;
  Profile plus(const Profile& other) const;     // breakpoints are merged
  Profile plus_affine(double a, double b) const; // adds a + b*x (global x)

private:
  double eval_deriv(double x, int deriv) const;
  std::size_t locate(double x) const;

  std::vector<double> breakpoints_;
  std::vector<Coeffs> coeffs_;
};

// Parse/serialize the JSON array-of-records form
//   [{"x_start":0.0,"x_end":0.5,"coeffs":[c0,c1,c2,c3]}, ...]
// with coefficients local to x_start, matching Profile's convention.
Profile profile_from_json(const std::string& text);
std::string profile_to_json(const Profile& p);

// ---------------------------------------------------------------------------
// quadrature
// ---------------------------------------------------------------------------

struct GaussRule {
  std::vector<double> nodes;   // on [-1, 1]
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule (exact through degree 2n-1), cached per n
const GaussRule& gauss_rule(int n_points);

// integral over [a, b] of fn, with the interval split at any of the supplied
// profiles' interior breakpoints so piecewise integrands stay polynomial
double integrate_piecewise(double a, double b, int gauss_points,
                           const std::vector<const Profile*>& split_at,
                           const std::function<double(double)>& fn);

// exact integral of f * weight * x^moment over the shared domain.
// weight may be null (treated as 1); moment must be 0, 1 or 2.
double integrate_profile(const Profile& f, const Profile* weight, int moment);

}  // namespace beamstab
