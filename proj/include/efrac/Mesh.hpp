/**
 * @file Mesh.hpp
 * @brief Structured rectangular grid: cells, nodes, and oriented faces for
 *        two-point flux connections and boundary conditions.
 */
#ifndef EFRAC_MESH_HPP
#define EFRAC_MESH_HPP

#include <array>
#include <vector>

#include "efrac/Types.hpp"

namespace efrac {

enum class Side { Left, Right, Bottom, Top };

inline const char* sideName(Side s) {
  switch (s) {
    case Side::Left: return "left";
    case Side::Right: return "right";
    case Side::Bottom: return "bottom";
    default: return "top";
  }
}

/// Uniform Cartesian mesh on [0,Lx] x [0,Ly]. Cells and nodes are numbered
/// row-major from the bottom-left corner. Cell nodes are listed
/// counterclockwise starting at the southwest corner.
class Mesh {
 public:
  Mesh(double Lx, double Ly, int nx, int ny);

  double Lx() const { return Lx_; }
  double Ly() const { return Ly_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  /// Representative element size used for tolerances and penalty scaling.
  double h() const { return 0.5 * (hx_ + hy_); }

  int cellCount() const { return nx_ * ny_; }
  int nodeCount() const { return (nx_ + 1) * (ny_ + 1); }
  double cellArea() const { return hx_ * hy_; }

  int cellIndex(int i, int j) const { return j * nx_ + i; }
  int nodeIndex(int i, int j) const { return j * (nx_ + 1) + i; }
  std::array<int, 2> cellIJ(int c) const { return {c % nx_, c / nx_}; }

  Vec2 node(int a) const;
  Vec2 cellCenter(int c) const;
  std::array<int, 4> cellNodes(int c) const;
  /// Corner coordinates, same order as cellNodes (SW, SE, NE, NW).
  std::array<Vec2, 4> cellCorners(int c) const;
  /// Cell containing a point; points on an edge go to the upper/right cell
  /// except on the domain boundary. Throws GeometryError outside the domain.
  int locate(const Vec2& p) const;

  struct Face {
    int J, K;     ///< adjacent cells; K = -1 on the boundary
    double area;  ///< edge length (unit thickness)
    Vec2 normal;  ///< unit normal, J -> K (outward on the boundary)
    Vec2 center;
    Side side;    ///< meaningful only for boundary faces
  };

  const std::vector<Face>& interiorFaces() const { return interior_; }
  const std::vector<Face>& boundaryFaces() const { return boundary_; }

  /// Nodes lying on one boundary side, in index order.
  std::vector<int> boundaryNodes(Side s) const;

 private:
  double Lx_, Ly_, hx_, hy_;
  int nx_, ny_;
  std::vector<Face> interior_, boundary_;
};

}  // namespace efrac

#endif
