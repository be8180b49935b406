#pragma once

#include "beamstab/profile.hpp"

namespace beamstab {

// One flexural channel of the platform-beam assembly: an Euler-Bernoulli
// cantilever of length l clamped at the hub, carrying a tip body of mass m and
// rotary inertia J, with linear density rho(x) and flexural rigidity c(x).
struct BeamPhysical {
  double l;
  Profile rho;
  Profile c;
  double m;  // tip mass
  double J;  // tip rotary inertia

  BeamPhysical(double l, Profile rho, Profile c, double m, double J);
};

enum class ChannelTag { Turning, Raising, Custom };

// Channel in first-order form.  The deflection eta couples to the rigid angle
// phi through the influence shape psi (the coefficient of the angular
// acceleration in the distributed equation) and, for the raising channel,
// through the gravity constant gamma = g sin(phiR0).
struct ChannelSpec {
  BeamPhysical physical;
  Profile psi;
  double gamma;
  ChannelTag tag;

  ChannelSpec(BeamPhysical physical, Profile psi, double gamma, ChannelTag tag);
};

// Full physical description of the two-channel platform: hub inertias about
// the three axes, beam-frame inertias, hub counterweight (m0 at offset d),
// hub radius R, gravity g and the working elevation phiR0.  z0 is the static
// deflection shape entering the turning-channel geometry; it defaults to zero
// and must be C2 when supplied.
struct TorqueMapParams {
  double I0, I1, I2, I3;
  double J1, J2, J3;
  double m0, d, R;
  double g;
  double phiR0;
  double l;
  double m;
  Profile rho;
  Profile cz;  // rigidity against deflection in the turning plane
  Profile cy;  // rigidity against deflection in the raising plane
  Profile z0;

  TorqueMapParams(double I0, double I1, double I2, double I3, double J1,
                  double J2, double J3, double m0, double d, double R, double g,
                  double phiR0, double l, double m, Profile rho, Profile cz,
                  Profile cy, Profile z0);

  // denominators of the torque/acceleration change of variables; both are
  // validated strictly positive at construction
  double turning_denominator() const;
  double raising_denominator() const;
};

// Turning channel: deflection y about the vertical axis, influence shape
// psi_T(x) = x cos(phiR0) - z0(x) sin(phiR0) - R, no gravity coupling.
ChannelSpec make_t_channel(const TorqueMapParams& p);

// Raising channel: deflection z about the horizontal axis, psi(x) = -x,
// gamma = g sin(phiR0).
ChannelSpec make_r_channel(const TorqueMapParams& p);

}  // namespace beamstab
