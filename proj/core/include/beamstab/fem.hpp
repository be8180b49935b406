#pragma once

#include <Eigen/Dense>

#include "beamstab/beam_model.hpp"

namespace beamstab {

// 1D mesh of [0, l].  Node i carries a deflection value and a slope dof
// (Hermite cubic, C1 across elements); the clamp constrains both dofs of
// node 0 to zero.
struct Mesh {
  std::vector<double> nodes;

  static Mesh uniform(int n_elements, double length);
  static Mesh from_nodes(std::vector<double> nodes);

  int n_elements() const { return static_cast<int>(nodes.size()) - 1; }
  double length() const { return nodes.back(); }
  double h(int e) const { return nodes[e + 1] - nodes[e]; }
};

// dof bookkeeping: unconstrained layout has 2 dofs per node in node order
// (value, slope); the constrained layout drops the two clamped dofs.
struct DofLayout {
  int n_nodes;

  int n_unconstrained() const { return 2 * n_nodes; }
  int n_constrained() const { return 2 * n_nodes - 2; }
  int tip_value() const { return n_constrained() - 2; }  // constrained index
  int tip_slope() const { return n_constrained() - 1; }
};

// discrete X-norm blocks: unit-rigidity bending energy on the deflection dofs
// and unit-density L2 mass (no tip terms) on the velocity dofs
struct Gram {
  Eigen::MatrixXd bending;    // constrained, int eta1'' eta2''
  Eigen::MatrixXd mass_unit;  // constrained, int zeta1 zeta2

  // [a; b; phi; omega; p; q] with independent tip velocities
  Eigen::MatrixXd extended() const;
  // [a; b; phi; omega] where b's tip dofs are the tip velocities
  Eigen::MatrixXd sim() const;
};

Gram gram_matrix(const Mesh& mesh);

enum class LoadMode { Consistent, ExactQuadrature };

struct DiscreteOperators {
  Mesh mesh;
  DofLayout layout;
  LoadMode load_mode = LoadMode::Consistent;

  Eigen::MatrixXd K_full;  // unconstrained bending stiffness, int c v'' w''
  Eigen::MatrixXd K;       // constrained block of K_full
  Eigen::MatrixXd M_dist;  // constrained distributed mass, int rho v w
  Eigen::MatrixXd M_aug;   // M_dist plus m, J on the tip dofs
  Eigen::VectorXd L_rho;   // constrained, int rho v dx + m v(l)
  Eigen::VectorXd L_psi;   // constrained control load, per load_mode
  Eigen::VectorXd psi_h;   // unconstrained interpolant of psi
  Gram gram;

  // interpolant of psi restricted to the constrained dofs; the pair
  // (L_psi = M_aug * psi_c, feedback on psi_c) is what makes the discrete
  // energy balance close exactly in consistent mode
  Eigen::VectorXd psi_c() const;
  // prepend the two clamped zeros
  Eigen::VectorXd extend(const Eigen::VectorXd& constrained) const;
};

// Raw assembly against explicit profiles.  rho may vanish (tip-only mass is
// legitimate); negative rho, non-positive c and zero-length elements are
// rejected.  The typed path below enforces the stricter channel invariants.
DiscreteOperators assemble(const Mesh& mesh, const Profile& rho, const Profile& c,
                           const Profile& psi, double m, double J, LoadMode mode);

DiscreteOperators assemble(const Mesh& mesh, const ChannelSpec& ch, LoadMode mode);

// Hermite dofs (f(x_i), f'(x_i)) in the unconstrained layout
Eigen::VectorXd interpolate(const Profile& f, const Mesh& mesh);

// values and (c .)' fluxes of the deflection's second derivative at both ends,
// read off the end elements' cubic polynomials
struct BoundaryValues {
  double eta_pp_0;        // eta''(0)
  double flux_0;          // (c eta'')'(0)
  double eta_pp_l;        // eta''(l)
  double flux_l;          // (c eta'')'(l)
};

// a is in the unconstrained layout with the clamped dofs zero
BoundaryValues recover_boundary(const Eigen::VectorXd& a, const Profile& c,
                                const Mesh& mesh);

// pointwise evaluation of the piecewise-cubic interpolant carried by an
// unconstrained dof vector; deriv in {0, 1, 2, 3}
double hermite_eval(const Eigen::VectorXd& a_unconstrained, const Mesh& mesh,
                    double x, int deriv = 0);

}  // namespace beamstab
