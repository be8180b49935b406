#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace beamstab {

// Seedable generator with hand-rolled output maps so that sweeps reproduce
// byte-identically across standard libraries (std::uniform_real_distribution
// and std::normal_distribution are not pinned down by the standard).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // [0, 1), 53-bit resolution
  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(th);
    have_spare_ = true;
    return r * std::cos(th);
  }

  Eigen::VectorXd normal_vector(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Gaussian vector rescaled to x^T G x = 1
inline Eigen::VectorXd random_unit_state(Rng& rng, const Eigen::MatrixXd& G) {
  Eigen::VectorXd x = rng.normal_vector(static_cast<int>(G.rows()));
  const double nrm = std::sqrt(x.dot(G * x));
  return x / nrm;
}

// random displacement dofs in the unconstrained layout, clamped end zeroed
inline Eigen::VectorXd random_clamped_dofs(Rng& rng, int n_nodes) {
  Eigen::VectorXd a = rng.normal_vector(2 * n_nodes);
  a(0) = 0.0;
  a(1) = 0.0;
  return a;
}

}  // namespace beamstab
