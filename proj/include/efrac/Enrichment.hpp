/**
 * @file Enrichment.hpp
 * @brief Discontinuity enrichment of Q1 elements: shifted Heaviside jump
 *        bases for the element-local (constant and linear jump) and nodal
 *        (shared Heaviside) schemes, their bulk strain fields, and the test
 *        vectors enforcing the fracture traction balance.
 *
 * Every enrichment function is shifted, phi_b(x) = H(x) xi_b(x) -
 * sum_a H(x_a) N_a(x) xi_b(x_a), so it vanishes at all element nodes and its
 * jump across the cut equals xi_b. The bulk (regular) strain is
 * H grad^s(xi_b) - sum_a H(x_a) (xi_b(x_a) (x) grad N_a)^s; the singular
 * surface part is carried by the traction balance, never integrated.
 */
#ifndef EFRAC_ENRICHMENT_HPP
#define EFRAC_ENRICHMENT_HPP

#include <array>

#include "efrac/Fracture.hpp"
#include "efrac/Mesh.hpp"
#include "efrac/Types.hpp"

namespace efrac {

enum class Scheme { EFEM0, EFEM1, XFEM };

const char* schemeName(Scheme s);

/// Bilinear shape functions on the axis-aligned rectangle spanned by
/// corners (SW, SE, NE, NW order).
struct Q1Basis {
  std::array<double, 4> N;
  std::array<Vec2, 4> dN;
};
Q1Basis q1Basis(const std::array<Vec2, 4>& corners, const Vec2& x);

/// Standard 2x2 Gauss rule on the rectangle.
struct QuadQP {
  Vec2 x;
  double w;
};
std::array<QuadQP, 4> quadRule(const std::array<Vec2, 4>& corners);

/// Jump modes and strain/test bases of one cut of one element.
///
/// Mode order: element-local schemes use {n, m} (constant) plus, for the
/// linear scheme, {tangential stretch, rigid rotation}; the nodal scheme has
/// 8 modes ordered (node a, direction d) -> 2a + d with d in {0: frame n,
/// 1: frame m}.
class CutModes {
 public:
  CutModes(Scheme scheme, const Mesh& mesh, const CellCut& cut,
           const std::array<Vec2, 2>& frame);

  int count() const { return count_; }
  Scheme scheme() const { return scheme_; }
  const CellCut& cut() const { return *cut_; }

  /// Jump of mode b at a point on the cut, in the cut's (n, m) components.
  Vec2 jumpNM(int b, const Vec2& x) const;

  /// Bulk strain of mode b at x (Voigt).
  Vec3 regularStrain(int b, const Vec2& x) const;

  /// Enrichment displacement phi_b(x); zero at all nodes by construction.
  Vec2 value(int b, const Vec2& x) const;

  /// Test strain of mode b at x (Voigt). For the element-local schemes this
  /// is the traction-balance test field (beta_b (x) n)^s; for the nodal
  /// scheme the formulation is Galerkin and this equals regularStrain.
  Vec3 testStrain(int b, const Vec2& x) const;

  /// Test polynomial coefficients [c0, cn, cm] per mode (element-local
  /// schemes): beta_b(y) = (c0 + cn y_n + cm y_m) * d_b.
  Vec3 betaCoef(int b) const;

  /// Jump direction of mode b in global components.
  Vec2 direction(int b) const;

 private:
  Scheme scheme_;
  const CellCut* cut_;
  std::array<Vec2, 4> corners_;
  std::array<Vec2, 4> nodeX_;
  std::array<Vec2, 2> frame_;  // jump directions (fracture n/m or global axes)
  int count_;
  Eigen::Matrix<double, 3, 2> beta_;  // columns: constant / linear test polys
};

/// Enriched-node frame of a fracture for the nodal scheme: the fracture's
/// (n, m) if all legs are parallel within 1e-8 rad, otherwise global axes.
std::array<Vec2, 2> xfemFrame(const FractureNetwork& net, int fracture);

}  // namespace efrac

#endif
