/**
 * @file Contact.hpp
 * @brief Penalty friction on fracture surfaces: open / stick / slip return
 *        map with initial traction offsets and accumulated plastic slip.
 *
 * Effective tractions follow the integrated rate form t' = t'_0 +
 * k (jump - plastic part), so a closed fracture under in-situ stress is in
 * exact equilibrium at zero jump. Compression is negative; the total
 * traction is t = t' - p_f n.
 */
#ifndef EFRAC_CONTACT_HPP
#define EFRAC_CONTACT_HPP

#include <optional>

#include "efrac/Types.hpp"

namespace efrac {

enum class ContactMode { Open, Stick, SlipPlus, SlipMinus };

const char* contactModeName(ContactMode m);

struct ContactParams {
  double kn = 0.0;        ///< normal penalty stiffness [Pa/m]
  double kt = 0.0;        ///< tangential penalty stiffness [Pa/m]
  double friction = 0.0;  ///< Coulomb coefficient
  Vec2 t0{0.0, 0.0};      ///< initial effective traction (n, m) components
};

struct TractionResult {
  Vec2 t;            ///< total traction (n, m) components, fluid pressure included
  Mat2 D;            ///< d t / d jump (n, m) block
  ContactMode mode;  ///< branch the evaluation used
};

/// Evaluates the contact traction at one quadrature point.
/// jump = (w_n, w_m), slip = accumulated plastic tangential jump, pf = fluid
/// pressure on the surface. `forced` pins the branch (oscillation guard).
TractionResult fractureTraction(const ContactParams& p, const Vec2& jump,
                                double slip, double pf,
                                std::optional<ContactMode> forced = {});

/// Plastic slip after the step is accepted: unchanged unless the converged
/// state slips, in which case the excess over the friction cap is absorbed.
double updateSlip(const ContactParams& p, const Vec2& jump, double slip);

}  // namespace efrac

#endif
