/**
 * @file Oracle.hpp
 * @brief Reference solutions for verification: the plane-strain opening
 *        profile of a uniformly pressurized straight crack in an infinite
 *        medium, the displacement field induced by that crack assembled from
 *        constant-displacement-discontinuity panels, and least-squares
 *        convergence-order fitting.
 */
#ifndef EFRAC_ORACLE_HPP
#define EFRAC_ORACLE_HPP

#include <vector>

#include "efrac/Types.hpp"

namespace efrac {

struct CrackProblem {
  double E = 1.0;       ///< Young's modulus [Pa]
  double nu = 0.0;      ///< Poisson ratio
  double pressure = 0.0;  ///< net driving pressure [Pa]
  double a = 1.0;       ///< crack half-length [m]
};

/// Opening of the pressurized crack at arc coordinate xi in [-a, a]:
/// w = 4 (1 - nu^2) p sqrt(a^2 - xi^2) / E. Zero outside the crack.
double crackAperture(const CrackProblem& p, double xi);

/// Displacement field of the pressurized crack, represented by constant
/// normal-displacement-discontinuity panels whose strengths follow the
/// closed-form opening profile. Exact in the panel limit; used to impose
/// far-field boundary displacements on finite domains.
class CrackDisplacementField {
 public:
  CrackDisplacementField(const CrackProblem& p, const Vec2& center,
                         double angleRad, int panels);

  /// Displacement at a point; valid away from the crack line.
  Vec2 displacement(const Vec2& x) const;

  /// Displacement jump (normal component) across the crack at arc
  /// coordinate xi, evaluated by sampling both sides at offset eps.
  double jumpAcross(double xi, double eps) const;

 private:
  double nu_;
  Vec2 center_, tang_, norm_;
  double halfPanel_;
  std::vector<double> panelXi_;  // panel centers, arc coordinate
  std::vector<double> dd_;       // normal discontinuity strengths
};

/// Least-squares slope of ln(err) against ln(h).
struct ConvergencePoint {
  double h = 0.0;
  double err = 0.0;
};
double fitOrder(const std::vector<ConvergencePoint>& pts);

}  // namespace efrac

#endif
