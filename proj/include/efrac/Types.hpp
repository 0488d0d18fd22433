/**
 * @file Types.hpp
 * @brief Small linear-algebra aliases and the Voigt conventions used
 *        throughout the simulator.
 */
#ifndef EFRAC_TYPES_HPP
#define EFRAC_TYPES_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace efrac {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Voigt convention: stress [sxx, syy, sxy], strain [exx, eyy, gxy] with
// engineering shear gxy = 2*exy, so sigma : eps == stress.dot(strain).

/// Voigt strain form of the symmetrized outer product (a (x) b)^s.
inline Vec3 symOuterVoigt(const Vec2& a, const Vec2& b) {
  return {a.x() * b.x(), a.y() * b.y(), a.x() * b.y() + a.y() * b.x()};
}

/// Trace of the tensor whose Voigt strain form is e.
inline double voigtTrace(const Vec3& e) { return e(0) + e(1); }

/// 90-degree counterclockwise rotation; the fracture normal is rot90 of the
/// tangent, so (m, n) is right-handed.
inline Vec2 rot90(const Vec2& v) { return {-v.y(), v.x()}; }

}  // namespace efrac

#endif
