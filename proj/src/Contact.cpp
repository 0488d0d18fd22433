#include "efrac/Contact.hpp"

#include <cmath>

namespace efrac {

const char* contactModeName(ContactMode m) {
  switch (m) {
    case ContactMode::Open: return "open";
    case ContactMode::Stick: return "stick";
    case ContactMode::SlipPlus: return "slip+";
    default: return "slip-";
  }
}

TractionResult fractureTraction(const ContactParams& p, const Vec2& jump,
                                double slip, double pf,
                                std::optional<ContactMode> forced) {
  const double trialN = p.t0.x() + p.kn * jump.x();
  const double trialM = p.t0.y() + p.kt * (jump.y() - slip);

  ContactMode mode;
  if (forced) {
    mode = *forced;
  } else if (trialN > 0.0) {
    mode = ContactMode::Open;
  } else if (std::abs(trialM) <= -p.friction * trialN) {
    mode = ContactMode::Stick;
  } else {
    mode = trialM > 0.0 ? ContactMode::SlipPlus : ContactMode::SlipMinus;
  }

  TractionResult r;
  r.mode = mode;
  r.D.setZero();
  switch (mode) {
    case ContactMode::Open:
      r.t = {0.0, 0.0};
      break;
    case ContactMode::Stick:
      r.t = {trialN, trialM};
      r.D(0, 0) = p.kn;
      r.D(1, 1) = p.kt;
      break;
    case ContactMode::SlipPlus:
    case ContactMode::SlipMinus: {
      const double s = (mode == ContactMode::SlipPlus) ? 1.0 : -1.0;
      r.t = {trialN, -s * p.friction * trialN};
      r.D(0, 0) = p.kn;
      r.D(1, 0) = -s * p.friction * p.kn;
      break;
    }
  }
  r.t.x() -= pf;
  return r;
}

double updateSlip(const ContactParams& p, const Vec2& jump, double slip) {
  const double trialN = p.t0.x() + p.kn * jump.x();
  if (trialN > 0.0) return slip;  // open: no frictional state change
  const double trialM = p.t0.y() + p.kt * (jump.y() - slip);
  const double cap = -p.friction * trialN;
  if (std::abs(trialM) <= cap) return slip;
  return slip + (std::abs(trialM) - cap) / p.kt * (trialM > 0.0 ? 1.0 : -1.0);
}

}  // namespace efrac
