#pragma once

#include <vector>

namespace beamstab {

// Natural frequencies (rad/s) of a uniform clamped-free beam with a tip mass
// and tip rotary inertia, computed from the transcendental characteristic
// equation by bracketing and bisection. Serves as the mesh-independent
// reference for discretization convergence studies.
//
// rho and c are the constant linear density and bending rigidity; m >= 0 and
// J >= 0 are admitted so the classical clamped-free case is covered.
std::vector<double> reference_frequencies(double l, double rho, double c, double m,
                                          double J, int count);

}  // namespace beamstab
