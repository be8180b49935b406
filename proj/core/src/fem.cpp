#include "beamstab/fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace beamstab {

Mesh Mesh::uniform(int n_elements, double length) {
  if (n_elements < 1) throw std::invalid_argument("mesh: need at least one element");
  if (!(length > 0.0)) throw std::invalid_argument("mesh: length must be positive");
  std::vector<double> nodes(n_elements + 1);
  for (int i = 0; i <= n_elements; ++i)
    nodes[i] = length * static_cast<double>(i) / n_elements;
  nodes.back() = length;
  return Mesh{std::move(nodes)};
}

Mesh Mesh::from_nodes(std::vector<double> nodes) {
  if (nodes.size() < 2) throw std::invalid_argument("mesh: need at least two nodes");
  if (nodes.front() != 0.0) throw std::invalid_argument("mesh: first node must be 0");
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    if (!(nodes[i + 1] > nodes[i]))
      throw std::invalid_argument("mesh: nodes must be strictly increasing");
  return Mesh{std::move(nodes)};
}

namespace {

// cubic Hermite shape functions on [0, h], local coordinate t = x/h.
// columns: value-left, slope-left, value-right, slope-right
struct ShapeEval {
  double N[4];
  double d2N[4];  // d^2/dx^2
};

ShapeEval shapes(double t, double h) {
  ShapeEval s;
  s.N[0] = 1.0 - 3.0 * t * t + 2.0 * t * t * t;
  s.N[1] = h * (t - 2.0 * t * t + t * t * t);
  s.N[2] = 3.0 * t * t - 2.0 * t * t * t;
  s.N[3] = h * (-t * t + t * t * t);
  s.d2N[0] = (-6.0 + 12.0 * t) / (h * h);
  s.d2N[1] = (-4.0 + 6.0 * t) / h;
  s.d2N[2] = (6.0 - 12.0 * t) / (h * h);
  s.d2N[3] = (-2.0 + 6.0 * t) / h;
  return s;
}

// assembly quadrature: integrands are products of (at most cubic) profiles
// with Hermite cubics, degree <= 9; 8 points are exact through degree 15
constexpr int kAssemblyPoints = 8;

// visit the assembly quadrature points of [xa, xb], splitting at the given
// profiles' interior breakpoints so every sub-integrand is a polynomial
template <typename F>
void for_each_qp(double xa, double xb, const std::vector<const Profile*>& split_at,
                 F&& visit) {
  std::vector<double> cuts{xa};
  for (const Profile* p : split_at) {
    if (!p) continue;
    for (double x : p->breakpoints())
      if (x > xa && x < xb) cuts.push_back(x);
  }
  cuts.push_back(xb);
  std::sort(cuts.begin(), cuts.end());
  const GaussRule& rule = gauss_rule(kAssemblyPoints);
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double mid = 0.5 * (cuts[s] + cuts[s + 1]);
    const double half = 0.5 * (cuts[s + 1] - cuts[s]);
    if (half <= 0.0) continue;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q)
      visit(mid + half * rule.nodes[q], half * rule.weights[q]);
  }
}

}  // namespace

Gram gram_matrix(const Mesh& mesh) {
  const Profile one = Profile::constant(1.0, mesh.length());
  return assemble(mesh, one, one, Profile::zero(mesh.length()), 1.0, 1.0,
                  LoadMode::ExactQuadrature)
      .gram;
}

Eigen::MatrixXd Gram::extended() const {
  const int N = static_cast<int>(bending.rows());
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(2 * N + 4, 2 * N + 4);
  G.topLeftCorner(N, N) = bending;
  G.block(N, N, N, N) = mass_unit;
  G.bottomRightCorner(4, 4).setIdentity();
  return G;
}

Eigen::MatrixXd Gram::sim() const {
  const int N = static_cast<int>(bending.rows());
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(2 * N + 2, 2 * N + 2);
  G.topLeftCorner(N, N) = bending;
  G.block(N, N, N, N) = mass_unit;
  G(2 * N - 2, 2 * N - 2) += 1.0;  // p = zeta(l)
  G(2 * N - 1, 2 * N - 1) += 1.0;  // q = zeta'(l)
  G(2 * N, 2 * N) = 1.0;
  G(2 * N + 1, 2 * N + 1) = 1.0;
  return G;
}

Eigen::VectorXd DiscreteOperators::psi_c() const {
  return psi_h.tail(layout.n_constrained());
}

Eigen::VectorXd DiscreteOperators::extend(const Eigen::VectorXd& constrained) const {
  if (constrained.size() != layout.n_constrained())
    throw std::invalid_argument("extend: dof vector has the wrong size");
  Eigen::VectorXd full = Eigen::VectorXd::Zero(layout.n_unconstrained());
  full.tail(layout.n_constrained()) = constrained;
  return full;
}

DiscreteOperators assemble(const Mesh& mesh, const Profile& rho, const Profile& c,
                           const Profile& psi, double m, double J, LoadMode mode) {
  const double l = mesh.length();
  for (const Profile* p : {&rho, &c, &psi})
    if (std::abs(p->length() - l) > 1e-12 * std::max(1.0, l))
      throw std::invalid_argument("assemble: profile domain does not match the mesh");

  DiscreteOperators ops;
  ops.mesh = mesh;
  ops.layout = DofLayout{static_cast<int>(mesh.nodes.size())};
  ops.load_mode = mode;

  const int nu = ops.layout.n_unconstrained();
  const int nc = ops.layout.n_constrained();
  Eigen::MatrixXd K_full = Eigen::MatrixXd::Zero(nu, nu);
  Eigen::MatrixXd M_full = Eigen::MatrixXd::Zero(nu, nu);
  Eigen::MatrixXd Gb_full = Eigen::MatrixXd::Zero(nu, nu);  // unit-rigidity bending
  Eigen::MatrixXd Gm_full = Eigen::MatrixXd::Zero(nu, nu);  // unit-density mass
  Eigen::VectorXd Lr_full = Eigen::VectorXd::Zero(nu);
  Eigen::VectorXd Lp_full = Eigen::VectorXd::Zero(nu);

  for (int e = 0; e < mesh.n_elements(); ++e) {
    const double xa = mesh.nodes[e], xb = mesh.nodes[e + 1];
    const double h = xb - xa;
    if (!(h > 0.0)) throw std::invalid_argument("assemble: zero-length element");

    Eigen::Matrix4d Ke = Eigen::Matrix4d::Zero();
    for_each_qp(xa, xb, {&c}, [&](double x, double w) {
      const double cx = c(x);
      if (!(cx > 0.0))
        throw std::invalid_argument("assemble: non-positive rigidity sampled");
      const ShapeEval s = shapes((x - xa) / h, h);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          Ke(i, j) += w * cx * s.d2N[i] * s.d2N[j];
    });

    Eigen::Matrix4d Me = Eigen::Matrix4d::Zero();
    Eigen::Vector4d Lre = Eigen::Vector4d::Zero();
    Eigen::Vector4d Lpe = Eigen::Vector4d::Zero();
    for_each_qp(xa, xb, {&rho, &psi}, [&](double x, double w) {
      const double rx = rho(x);
      if (rx < 0.0)
        throw std::invalid_argument("assemble: negative density sampled");
      const ShapeEval s = shapes((x - xa) / h, h);
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) Me(i, j) += w * rx * s.N[i] * s.N[j];
        Lre(i) += w * rx * s.N[i];
        Lpe(i) += w * rx * psi(x) * s.N[i];
      }
    });

    Eigen::Matrix4d Gbe = Eigen::Matrix4d::Zero();
    Eigen::Matrix4d Gme = Eigen::Matrix4d::Zero();
    for_each_qp(xa, xb, {}, [&](double x, double w) {
      const ShapeEval s = shapes((x - xa) / h, h);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          Gbe(i, j) += w * s.d2N[i] * s.d2N[j];
          Gme(i, j) += w * s.N[i] * s.N[j];
        }
    });

    const int base = 2 * e;
    K_full.block<4, 4>(base, base) += Ke;
    M_full.block<4, 4>(base, base) += Me;
    Gb_full.block<4, 4>(base, base) += Gbe;
    Gm_full.block<4, 4>(base, base) += Gme;
    Lr_full.segment<4>(base) += Lre;
    Lp_full.segment<4>(base) += Lpe;
  }

  // the accumulation order above breaks symmetry in the last ulp; the forms
  // are symmetric, so make their floating-point images exactly so
  const auto symmetrize = [](Eigen::MatrixXd& A) {
    A = (0.5 * (A + A.transpose())).eval();
  };
  symmetrize(K_full);
  symmetrize(M_full);
  symmetrize(Gb_full);
  symmetrize(Gm_full);

  ops.K_full = K_full;
  ops.K = K_full.bottomRightCorner(nc, nc);
  ops.M_dist = M_full.bottomRightCorner(nc, nc);

  ops.M_aug = ops.M_dist;
  ops.M_aug(ops.layout.tip_value(), ops.layout.tip_value()) += m;
  ops.M_aug(ops.layout.tip_slope(), ops.layout.tip_slope()) += J;

  ops.L_rho = Lr_full.tail(nc);
  ops.L_rho(ops.layout.tip_value()) += m;  // m * v(l)

  ops.psi_h = interpolate(psi, mesh);

  if (mode == LoadMode::Consistent) {
    ops.L_psi = ops.M_aug * ops.psi_c();
  } else {
    ops.L_psi = Lp_full.tail(nc);
    ops.L_psi(ops.layout.tip_value()) += m * psi(l);
    ops.L_psi(ops.layout.tip_slope()) += J * psi.derivative(l);
  }

  ops.gram = Gram{Gb_full.bottomRightCorner(nc, nc), Gm_full.bottomRightCorner(nc, nc)};
  return ops;
}

DiscreteOperators assemble(const Mesh& mesh, const ChannelSpec& ch, LoadMode mode) {
  if (std::abs(mesh.length() - ch.physical.l) > 1e-12 * ch.physical.l)
    throw std::invalid_argument("assemble: mesh length does not match the channel");
  return assemble(mesh, ch.physical.rho, ch.physical.c, ch.psi, ch.physical.m,
                  ch.physical.J, mode);
}

Eigen::VectorXd interpolate(const Profile& f, const Mesh& mesh) {
  if (std::abs(f.length() - mesh.length()) > 1e-12 * std::max(1.0, mesh.length()))
    throw std::invalid_argument("interpolate: profile domain does not match the mesh");
  const int n = static_cast<int>(mesh.nodes.size());
  Eigen::VectorXd dofs(2 * n);
  for (int i = 0; i < n; ++i) {
    dofs(2 * i) = f(mesh.nodes[i]);
    dofs(2 * i + 1) = f.derivative(mesh.nodes[i]);
  }
  return dofs;
}

BoundaryValues recover_boundary(const Eigen::VectorXd& a, const Profile& c,
                                const Mesh& mesh) {
  const int nu = 2 * static_cast<int>(mesh.nodes.size());
  if (a.size() != nu)
    throw std::invalid_argument("recover_boundary: expected the unconstrained layout");

  auto end_values = [&](int e, double t) {
    const double h = mesh.h(e);
    const double x = mesh.nodes[e] + t * h;
    const int base = 2 * e;
    // second and third derivative of the element cubic
    const double d2[4] = {(-6.0 + 12.0 * t) / (h * h), (-4.0 + 6.0 * t) / h,
                          (6.0 - 12.0 * t) / (h * h), (-2.0 + 6.0 * t) / h};
    const double d3[4] = {12.0 / (h * h * h), 6.0 / (h * h),
                          -12.0 / (h * h * h), 6.0 / (h * h)};
    double epp = 0.0, eppp = 0.0;
    for (int i = 0; i < 4; ++i) {
      epp += d2[i] * a(base + i);
      eppp += d3[i] * a(base + i);
    }
    // (c eta'')' = c' eta'' + c eta'''
    return std::pair<double, double>(epp, c.derivative(x) * epp + c(x) * eppp);
  };

  BoundaryValues bv{};
  auto [e0, f0] = end_values(0, 0.0);
  auto [el, fl] = end_values(mesh.n_elements() - 1, 1.0);
  bv.eta_pp_0 = e0;
  bv.flux_0 = f0;
  bv.eta_pp_l = el;
  bv.flux_l = fl;
  return bv;
}

double hermite_eval(const Eigen::VectorXd& a_unconstrained, const Mesh& mesh,
                    double x, int deriv) {
  const int nu = 2 * static_cast<int>(mesh.nodes.size());
  if (a_unconstrained.size() != nu)
    throw std::invalid_argument("hermite_eval: expected the unconstrained layout");
  if (deriv < 0 || deriv > 3)
    throw std::invalid_argument("hermite_eval: derivative order out of range");
  const double l = mesh.length();
  const double eps = 1e-12 * std::max(1.0, l);
  if (x < -eps || x > l + eps)
    throw std::invalid_argument("hermite_eval: point outside the beam");
  x = std::min(std::max(x, 0.0), l);

  int e = mesh.n_elements() - 1;
  for (int k = 0; k + 1 < static_cast<int>(mesh.nodes.size()); ++k) {
    if (x < mesh.nodes[k + 1]) {
      e = k;
      break;
    }
  }
  const double h = mesh.h(e);
  const double t = (x - mesh.nodes[e]) / h;

  double shape[4];
  switch (deriv) {
    case 0:
      shape[0] = 1.0 - 3.0 * t * t + 2.0 * t * t * t;
      shape[1] = h * (t - 2.0 * t * t + t * t * t);
      shape[2] = 3.0 * t * t - 2.0 * t * t * t;
      shape[3] = h * (-t * t + t * t * t);
      break;
    case 1:
      shape[0] = (-6.0 * t + 6.0 * t * t) / h;
      shape[1] = 1.0 - 4.0 * t + 3.0 * t * t;
      shape[2] = (6.0 * t - 6.0 * t * t) / h;
      shape[3] = -2.0 * t + 3.0 * t * t;
      break;
    case 2:
      shape[0] = (-6.0 + 12.0 * t) / (h * h);
      shape[1] = (-4.0 + 6.0 * t) / h;
      shape[2] = (6.0 - 12.0 * t) / (h * h);
      shape[3] = (-2.0 + 6.0 * t) / h;
      break;
    default:
      shape[0] = 12.0 / (h * h * h);
      shape[1] = 6.0 / (h * h);
      shape[2] = -12.0 / (h * h * h);
      shape[3] = 6.0 / (h * h);
      break;
  }
  double v = 0.0;
  for (int i = 0; i < 4; ++i) v += shape[i] * a_unconstrained(2 * e + i);
  return v;
}

}  // namespace beamstab
