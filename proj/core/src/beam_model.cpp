#include "beamstab/beam_model.hpp"

#include <cmath>
#include <stdexcept>

namespace beamstab {

BeamPhysical::BeamPhysical(double l_, Profile rho_, Profile c_, double m_, double J_)
    : l(l_), rho(std::move(rho_)), c(std::move(c_)), m(m_), J(J_) {
  if (!(l > 0.0)) throw std::invalid_argument("beam: length must be positive");
  if (std::abs(rho.length() - l) > 1e-12 * l || std::abs(c.length() - l) > 1e-12 * l)
    throw std::invalid_argument("beam: profile domains must match the length");
  if (!(rho.min_value() > 0.0))
    throw std::invalid_argument("beam: density must be positive on [0, l]");
  if (!(c.min_value() > 0.0))
    throw std::invalid_argument("beam: rigidity must be positive on [0, l]");
  if (!(m > 0.0)) throw std::invalid_argument("beam: tip mass must be positive");
  if (!(J > 0.0)) throw std::invalid_argument("beam: tip inertia must be positive");
}

ChannelSpec::ChannelSpec(BeamPhysical physical_, Profile psi_, double gamma_,
                         ChannelTag tag_)
    : physical(std::move(physical_)), psi(std::move(psi_)), gamma(gamma_), tag(tag_) {
  if (std::abs(psi.length() - physical.l) > 1e-12 * physical.l)
    throw std::invalid_argument("channel: psi domain must match the beam length");
  if (!psi.is_c2())
    throw std::invalid_argument("channel: psi must be C2 on [0, l]");
  if (!std::isfinite(gamma))
    throw std::invalid_argument("channel: gamma must be finite");
}

TorqueMapParams::TorqueMapParams(double I0_, double I1_, double I2_, double I3_,
                                 double J1_, double J2_, double J3_, double m0_,
                                 double d_, double R_, double g_, double phiR0_,
                                 double l_, double m_, Profile rho_, Profile cz_,
                                 Profile cy_, Profile z0_)
    : I0(I0_), I1(I1_), I2(I2_), I3(I3_), J1(J1_), J2(J2_), J3(J3_), m0(m0_),
      d(d_), R(R_), g(g_), phiR0(phiR0_), l(l_), m(m_), rho(std::move(rho_)),
      cz(std::move(cz_)), cy(std::move(cy_)), z0(std::move(z0_)) {
  if (!(l > 0.0)) throw std::invalid_argument("platform: beam length must be positive");
  for (const Profile* p : {&rho, &cz, &cy, &z0})
    if (std::abs(p->length() - l) > 1e-12 * l)
      throw std::invalid_argument("platform: profile domains must match the length");
  if (!(m > 0.0)) throw std::invalid_argument("platform: tip mass must be positive");
  if (!(J2 > 0.0) || !(J3 > 0.0))
    throw std::invalid_argument("platform: tip inertias J2, J3 must be positive");
  if (!z0.is_c2())
    throw std::invalid_argument("platform: z0 must be C2 on [0, l]");
  if (!(turning_denominator() > 0.0))
    throw std::invalid_argument("platform: turning torque denominator must be positive");
  if (!(raising_denominator() > 0.0))
    throw std::invalid_argument("platform: raising torque denominator must be positive");
}

double TorqueMapParams::turning_denominator() const {
  const double sp = std::sin(phiR0), cp = std::cos(phiR0);
  // moment of the static shape about the turning axis: int (x cp - R) z0 rho dx
  const double z0_moment =
      cp * integrate_profile(z0, &rho, 1) - R * integrate_profile(z0, &rho, 0);
  return I0 + (I1 + J1) * sp * sp + m0 * (R - d * cp) * (R - d * cp) +
         (I3 * cp + J3 * z0.derivative(l) * sp) * cp +
         (m * (l * cp - R) * z0(l) + z0_moment) * sp;
}

double TorqueMapParams::raising_denominator() const {
  return I2 + m0 * d * d;
}

ChannelSpec make_t_channel(const TorqueMapParams& p) {
  const double sp = std::sin(p.phiR0), cp = std::cos(p.phiR0);
  // psi_T(x) = x cos(phiR0) - z0(x) sin(phiR0) - R
  Profile psi = p.z0.scaled(-sp).plus_affine(-p.R, cp);
  BeamPhysical phys(p.l, p.rho, p.cz, p.m, p.J3);
  return ChannelSpec(std::move(phys), std::move(psi), 0.0, ChannelTag::Turning);
}

ChannelSpec make_r_channel(const TorqueMapParams& p) {
  Profile psi = Profile::linear(0.0, -p.l, p.l);
  BeamPhysical phys(p.l, p.rho, p.cy, p.m, p.J2);
  return ChannelSpec(std::move(phys), std::move(psi),
                     p.g * std::sin(p.phiR0), ChannelTag::Raising);
}

}  // namespace beamstab
