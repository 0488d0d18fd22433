/**
 * @file Oracle.cpp
 * @brief Crack reference solutions and convergence fitting.
 */
#include "efrac/Oracle.hpp"

#include <cmath>

#include "efrac/Errors.hpp"

namespace efrac {

double crackAperture(const CrackProblem& p, double xi) {
  const double s = p.a * p.a - xi * xi;
  if (s <= 0.0) return 0.0;
  return 4.0 * (1.0 - p.nu * p.nu) * p.pressure * std::sqrt(s) / p.E;
}

CrackDisplacementField::CrackDisplacementField(const CrackProblem& p,
                                               const Vec2& center,
                                               double angleRad, int panels)
    : nu_(p.nu), center_(center) {
  if (panels < 1) throw ConfigError("crack field needs at least one panel");
  tang_ = {std::cos(angleRad), std::sin(angleRad)};
  norm_ = rot90(tang_);
  halfPanel_ = p.a / panels;
  panelXi_.reserve(panels);
  dd_.reserve(panels);
  for (int i = 0; i < panels; ++i) {
    const double xi = -p.a + (2.0 * i + 1.0) * halfPanel_;
    panelXi_.push_back(xi);
    // D_y is the lower-face displacement minus the upper one: minus the
    // opening.
    dd_.push_back(-crackAperture(p, xi));
  }
}

Vec2 CrackDisplacementField::displacement(const Vec2& x) const {
  const Vec2 rel = x - center_;
  const double lx = tang_.dot(rel);
  const double ly = norm_.dot(rel);
  const double B = 1.0 / (4.0 * 3.14159265358979323846 * (1.0 - nu_));
  double ux = 0.0, uy = 0.0;  // crack-aligned components
  for (size_t i = 0; i < panelXi_.size(); ++i) {
    const double xt = lx - panelXi_[i];
    const double a = halfPanel_;
    const double r1s = (xt - a) * (xt - a) + ly * ly;
    const double r2s = (xt + a) * (xt + a) + ly * ly;
    const double fx = B * 0.5 * (std::log(r1s) - std::log(r2s));
    const double fy = -B * (std::atan2(ly, xt - a) - std::atan2(ly, xt + a));
    const double fxy = B * ly * (1.0 / r1s - 1.0 / r2s);
    const double fyy = -B * ((xt - a) / r1s - (xt + a) / r2s);
    const double Dy = dd_[i];
    ux += Dy * (-(1.0 - 2.0 * nu_) * fx - ly * fxy);
    uy += Dy * (2.0 * (1.0 - nu_) * fy - ly * fyy);
  }
  return ux * tang_ + uy * norm_;
}

double CrackDisplacementField::jumpAcross(double xi, double eps) const {
  const Vec2 base = center_ + xi * tang_;
  const Vec2 up = displacement(base + eps * norm_);
  const Vec2 dn = displacement(base - eps * norm_);
  return norm_.dot(up - dn);
}

double fitOrder(const std::vector<ConvergencePoint>& pts) {
  if (pts.size() < 2) throw ConfigError("order fit needs at least two points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(pts.size());
  for (const ConvergencePoint& p : pts) {
    const double lx = std::log(p.h);
    const double ly = std::log(p.err);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace efrac
