/**
 * @file Constitutive.hpp
 * @brief Fluid and rock constitutive relations: weakly compressible phase
 *        density, quadratic relative permeabilities, the pressure and
 *        volumetric-strain dependent porosity update, and the cubic-law
 *        permeability of an open fracture.
 */
#ifndef EFRAC_CONSTITUTIVE_HPP
#define EFRAC_CONSTITUTIVE_HPP

#include <algorithm>
#include <cmath>

namespace efrac {

struct PhaseProps {
  double rho0 = 1000.0;  ///< reference density [kg/m^3]
  double pRef = 0.0;     ///< reference pressure [Pa]
  double K = 1e9;        ///< bulk modulus [Pa]
  double mu = 1e-3;      ///< viscosity [Pa s]
};

inline double phaseDensity(const PhaseProps& f, double p) {
  return f.rho0 * std::exp((p - f.pRef) / f.K);
}
inline double phaseDensityDeriv(const PhaseProps& f, double p) {
  return phaseDensity(f, p) / f.K;
}

/// Relative permeability; phase 0 wets (kr = s^2), phase 1 does not.
inline double relPerm(int phase, double s) {
  return phase == 0 ? s * s : (1.0 - s) * (1.0 - s);
}
inline double relPermDeriv(int phase, double s) {
  return phase == 0 ? 2.0 * s : -2.0 * (1.0 - s);
}

/// Porosity after a displacement/pressure increment from the old state.
inline double porosityUpdate(double phiOld, double biot, double dDivU,
                             double dp, double invN) {
  return phiOld + biot * dDivU + invN * dp;
}

/// Hydraulic aperture: non-negative part of the mean normal jump plus the
/// residual opening.
inline double hydraulicAperture(double wn, double w0) {
  return std::max(wn, 0.0) + w0;
}
inline double hydraulicApertureDeriv(double wn) { return wn > 0.0 ? 1.0 : 0.0; }

/// Cubic-law permeability of a fracture of hydraulic aperture wh.
inline double fracturePermeability(double wh) { return wh * wh / 12.0; }

}  // namespace efrac

#endif
