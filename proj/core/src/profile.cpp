#include "beamstab/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace beamstab {

namespace {

double poly_eval(const Profile::Coeffs& c, double u, int deriv) {
  switch (deriv) {
    case 0: return c[0] + u * (c[1] + u * (c[2] + u * c[3]));
    case 1: return c[1] + u * (2.0 * c[2] + u * 3.0 * c[3]);
    case 2: return 2.0 * c[2] + u * 6.0 * c[3];
    case 3: return 6.0 * c[3];
    default: throw std::invalid_argument("profile: derivative order out of range");
  }
}

double scale_of(const Profile::Coeffs& c, double len) {
  double s = 0.0;
  double p = 1.0;
  for (int k = 0; k < 4; ++k) {
    s = std::max(s, std::abs(c[k]) * p);
    p *= len;
  }
  return s;
}

}  // namespace

Profile::Profile(std::vector<double> breakpoints, std::vector<Coeffs> coeffs)
    : breakpoints_(std::move(breakpoints)), coeffs_(std::move(coeffs)) {
  if (breakpoints_.size() < 2 || coeffs_.size() + 1 != breakpoints_.size())
    throw std::invalid_argument("profile: breakpoint/coefficient counts mismatch");
  if (breakpoints_.front() != 0.0)
    throw std::invalid_argument("profile: domain must start at x = 0");
  for (std::size_t k = 0; k + 1 < breakpoints_.size(); ++k)
    if (!(breakpoints_[k + 1] > breakpoints_[k]))
      throw std::invalid_argument("profile: breakpoints must be strictly increasing");
  if (!std::isfinite(breakpoints_.back()))
    throw std::invalid_argument("profile: non-finite breakpoint");
  // C0 across interior breakpoints, relative to the local coefficient scale
  for (std::size_t k = 0; k + 1 < coeffs_.size(); ++k) {
    const double len = breakpoints_[k + 1] - breakpoints_[k];
    const double left = poly_eval(coeffs_[k], len, 0);
    const double right = coeffs_[k + 1][0];
    const double scale = std::max({1.0, scale_of(coeffs_[k], len),
                                   scale_of(coeffs_[k + 1], len)});
    if (std::abs(left - right) > 1e-9 * scale)
      throw std::invalid_argument("profile: discontinuous at interior breakpoint");
  }
}

Profile Profile::constant(double value, double length) {
  return Profile({0.0, length}, {Coeffs{value, 0.0, 0.0, 0.0}});
}

Profile Profile::linear(double v0, double v1, double length) {
  return Profile({0.0, length}, {Coeffs{v0, (v1 - v0) / length, 0.0, 0.0}});
}

Profile Profile::cubic(const Coeffs& g, double length) {
  return Profile({0.0, length}, {g});
}

std::size_t Profile::locate(double x) const {
  const double l = length();
  const double eps = 1e-12 * std::max(1.0, l);
  if (x < -eps || x > l + eps)
    throw std::invalid_argument("profile: evaluation outside [0, l]");
  x = std::clamp(x, 0.0, l);
  // last interval is closed on the right; all others half-open
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  std::size_t k = static_cast<std::size_t>(it - breakpoints_.begin());
  if (k == 0) return 0;
  if (k >= breakpoints_.size()) return coeffs_.size() - 1;
  return k - 1;
}

double Profile::eval_deriv(double x, int deriv) const {
  const std::size_t k = locate(x);
  return poly_eval(coeffs_[k], x - breakpoints_[k], deriv);
}

double Profile::max_interior_jump(int deriv) const {
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < coeffs_.size(); ++k) {
    const double len = breakpoints_[k + 1] - breakpoints_[k];
    const double left = poly_eval(coeffs_[k], len, deriv);
    const double right = poly_eval(coeffs_[k + 1], 0.0, deriv);
    worst = std::max(worst, std::abs(left - right));
  }
  return worst;
}

bool Profile::is_c2(double rel_tol) const {
  for (int d = 0; d <= 2; ++d) {
    double scale = 1.0;
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
      const double len = breakpoints_[k + 1] - breakpoints_[k];
      for (double u : {0.0, len})
        scale = std::max(scale, std::abs(poly_eval(coeffs_[k], u, d)));
    }
    if (max_interior_jump(d) > rel_tol * scale) return false;
  }
  return true;
}

namespace {

// exact extrema of one cubic piece over [0, len]: endpoints plus the real
// stationary points of the derivative quadratic
void piece_extrema(const Profile::Coeffs& c, double len, double& lo, double& hi) {
  auto consider = [&](double u) {
    const double v = poly_eval(c, u, 0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };
  consider(0.0);
  consider(len);
  const double a = 3.0 * c[3], b = 2.0 * c[2], d = c[1];
  if (a == 0.0) {
    if (b != 0.0) {
      const double u = -d / b;
      if (u > 0.0 && u < len) consider(u);
    }
  } else {
    const double disc = b * b - 4.0 * a * d;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (double u : {(-b + sq) / (2.0 * a), (-b - sq) / (2.0 * a)})
        if (u > 0.0 && u < len) consider(u);
    }
  }
}

}  // namespace

double Profile::min_value() const {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t k = 0; k < coeffs_.size(); ++k)
    piece_extrema(coeffs_[k], breakpoints_[k + 1] - breakpoints_[k], lo, hi);
  return lo;
}

double Profile::max_value() const {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t k = 0; k < coeffs_.size(); ++k)
    piece_extrema(coeffs_[k], breakpoints_[k + 1] - breakpoints_[k], lo, hi);
  return hi;
}

int Profile::degree() const {
  int deg = 0;
  for (const auto& c : coeffs_)
    for (int k = 3; k > deg; --k)
      if (c[k] != 0.0) { deg = k; break; }
  return deg;
}

Profile Profile::scaled(double s) const {
  std::vector<Coeffs> cs = coeffs_;
  for (auto& c : cs)
    for (double& v : c) v *= s;
  return Profile(breakpoints_, std::move(cs));
}

Profile Profile::plus_affine(double a, double b) const {
  std::vector<Coeffs> cs = coeffs_;
  for (std::size_t k = 0; k < cs.size(); ++k) {
    // a + b*x = (a + b*xs) + b*u in interval-local coordinates
    cs[k][0] += a + b * breakpoints_[k];
    cs[k][1] += b;
  }
  return Profile(breakpoints_, std::move(cs));
}

Profile Profile::plus(const Profile& other) const {
  const double l = length();
  if (std::abs(other.length() - l) > 1e-12 * std::max(1.0, l))
    throw std::invalid_argument("profile: mismatched domains in plus()");
  std::set<double> bp(breakpoints_.begin(), breakpoints_.end());
  bp.insert(other.breakpoints_.begin(), other.breakpoints_.end());
  std::vector<double> merged(bp.begin(), bp.end());
  merged.back() = l;  // guard against representation noise at the far end
  std::vector<Coeffs> cs;
  cs.reserve(merged.size() - 1);
  for (std::size_t k = 0; k + 1 < merged.size(); ++k) {
    const double xs = merged[k];
    auto local = [&](const Profile& p) {
      const std::size_t j = p.locate(std::min(xs + 0.5 * (merged[k + 1] - xs), l));
      const double shift = xs - p.breakpoints_[j];
      const Coeffs& c = p.coeffs_[j];
      // re-center the cubic at xs: evaluate value/derivatives at the shift
      return Coeffs{poly_eval(c, shift, 0), poly_eval(c, shift, 1),
                    poly_eval(c, shift, 2) / 2.0, poly_eval(c, shift, 3) / 6.0};
    };
    const Coeffs ca = local(*this), cb = local(other);
    cs.push_back(Coeffs{ca[0] + cb[0], ca[1] + cb[1], ca[2] + cb[2], ca[3] + cb[3]});
  }
  return Profile(std::move(merged), std::move(cs));
}

// ---------------------------------------------------------------------------
// JSON records
// ---------------------------------------------------------------------------

Profile profile_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.is_array() || j.empty())
    throw std::invalid_argument("profile json: expected a non-empty array of records");
  std::vector<double> bp;
  std::vector<Profile::Coeffs> cs;
  for (const auto& rec : j) {
    if (!rec.contains("x_start") || !rec.contains("x_end") || !rec.contains("coeffs"))
      throw std::invalid_argument("profile json: record needs x_start, x_end, coeffs");
    const double xs = rec.at("x_start").get<double>();
    const double xe = rec.at("x_end").get<double>();
    const auto& cj = rec.at("coeffs");
    if (!cj.is_array() || cj.size() != 4)
      throw std::invalid_argument("profile json: coeffs must have 4 entries");
    if (bp.empty()) {
      bp.push_back(xs);
    } else if (std::abs(bp.back() - xs) > 1e-12 * std::max(1.0, std::abs(xs))) {
      throw std::invalid_argument("profile json: records must tile the domain");
    }
    bp.push_back(xe);
    cs.push_back(Profile::Coeffs{cj[0].get<double>(), cj[1].get<double>(),
                                 cj[2].get<double>(), cj[3].get<double>()});
  }
  return Profile(std::move(bp), std::move(cs));
}

std::string profile_to_json(const Profile& p) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  const auto& bp = p.breakpoints();
  for (std::size_t k = 0; k < p.intervals(); ++k) {
    const auto& c = p.interval_coeffs(k);
    j.push_back({{"x_start", bp[k]},
                 {"x_end", bp[k + 1]},
                 {"coeffs", {c[0], c[1], c[2], c[3]}}});
  }
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Gauss-Legendre quadrature
// ---------------------------------------------------------------------------

namespace {

GaussRule make_gauss_rule(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int k = 1; k <= n; ++k) {
    // Newton iteration on P_n from the Chebyshev-based initial guess
    double x = std::cos(std::numbers::pi * (k - 0.25) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.nodes[k - 1] = x;
    r.weights[k - 1] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

}  // namespace

const GaussRule& gauss_rule(int n_points) {
  if (n_points < 1 || n_points > 64)
    throw std::invalid_argument("gauss_rule: order out of range");
  static std::map<int, GaussRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n_points);
  if (it == cache.end())
    it = cache.emplace(n_points, make_gauss_rule(n_points)).first;
  return it->second;
}

double integrate_piecewise(double a, double b, int gauss_points,
                           const std::vector<const Profile*>& split_at,
                           const std::function<double(double)>& fn) {
  std::set<double> cuts{a, b};
  for (const Profile* p : split_at) {
    if (!p) continue;
    for (double x : p->breakpoints())
      if (x > a && x < b) cuts.insert(x);
  }
  const GaussRule& rule = gauss_rule(gauss_points);
  double total = 0.0;
  auto it = cuts.begin();
  double lo = *it;
  for (++it; it != cuts.end(); ++it) {
    const double hi = *it;
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q)
      acc += rule.weights[q] * fn(mid + half * rule.nodes[q]);
    total += half * acc;
    lo = hi;
  }
  return total;
}

double integrate_profile(const Profile& f, const Profile* weight, int moment) {
  if (moment < 0 || moment > 2)
    throw std::invalid_argument("integrate_profile: moment must be 0, 1 or 2");
  const double l = f.length();
  if (weight && std::abs(weight->length() - l) > 1e-12 * std::max(1.0, l))
    throw std::invalid_argument("integrate_profile: mismatched domains");
  const int deg = f.degree() + (weight ? weight->degree() : 0) + moment;
  const int n = (deg + 2) / 2 + 1;  // ceil((deg+1)/2) plus one point of margin
  return integrate_piecewise(0.0, l, n, {&f, weight}, [&](double x) {
    double v = f(x) * (weight ? (*weight)(x) : 1.0);
    for (int m = 0; m < moment; ++m) v *= x;
    return v;
  });
}

}  // namespace beamstab
