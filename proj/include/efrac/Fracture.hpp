/**
 * @file Fracture.hpp
 * @brief Intersection of polyline fractures with the grid: mechanics cuts
 *        (full chords through cells), flow segments (true lengths, split at
 *        fracture crossings), and cut-cell sub-triangulations.
 */
#ifndef EFRAC_FRACTURE_HPP
#define EFRAC_FRACTURE_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "efrac/Mesh.hpp"
#include "efrac/Types.hpp"

namespace efrac {

struct FractureSpec {
  std::vector<Vec2> points;  ///< polyline vertices
  double w0 = 0.0;           ///< residual hydraulic aperture [m]
};

using FractureNetwork = std::vector<FractureSpec>;

/// One fracture chord through one cell: the mechanics-side cut. A tip ending
/// strictly inside the cell is extended along the fracture line to the cell
/// boundary, so the chord always spans the cell.
struct CellCut {
  int fracture = -1;
  int leg = -1;   ///< polyline leg the cut belongs to
  int cell = -1;
  Vec2 p0, p1;    ///< chord endpoints on the cell boundary
  Vec2 center;    ///< chord midpoint x_k; origin of the local (n, m) frame
  Vec2 n, m;      ///< unit normal / tangent, n = rot90(m)
  double length = 0.0;
  std::array<uint8_t, 4> nodeSide{};  ///< H(x_a) per cell node (SW,SE,NE,NW)
  bool singleNodeCut = false;
  bool tipExtended = false;
  double dAvg = 0.0;  ///< mean normal distance cell<->chord line, exact
  std::vector<int> segments;  ///< flow segments riding this cut

  /// Side indicator of the cut: 1 on the half-plane the normal points into.
  bool heaviside(const Vec2& p) const { return n.dot(p - center) > 0.0; }
  double yn(const Vec2& p) const { return n.dot(p - center); }
  double ym(const Vec2& p) const { return m.dot(p - center); }
};

/// One fracture finite volume: the true (not tip-extended) piece of a
/// fracture inside one cell, further split at fracture-fracture crossings.
struct FractureSegment {
  int fracture = -1;
  int cell = -1;
  int cut = -1;  ///< global index of the mechanics cut it rides on
  Vec2 p0, p1, center;
  double length = 0.0;
  Vec2 n, m;
};

/// Sub-triangle of a cut cell; sign-pure with respect to every cut of the
/// cell. Merged slivers keep the host's vertices but carry the merged area.
struct SubTriangle {
  std::array<Vec2, 3> v;
  double area = 0.0;
  std::vector<uint8_t> side;  ///< per cut of the cell: 1 = normal side
};

struct GeometryOptions {
  double snapRel = 1e-8;     ///< vertex snap to grid lines, relative to h
  double sliverRel = 1e-12;  ///< sub-triangle merge threshold, relative to |K|
};

struct CutCellMap {
  std::vector<CellCut> cuts;
  std::vector<FractureSegment> segments;
  std::vector<std::vector<int>> cellCuts;  ///< cell -> cut ids (size = cells)
  std::vector<std::vector<int>> fractureSegments;  ///< ordered along fracture
  std::vector<std::vector<SubTriangle>> cellTriangles;  ///< empty for uncut
  /// Clusters of coincident segment ends, each entry 2*segment + end(0/1);
  /// every cluster of size >= 2 becomes pairwise fracture-fracture links.
  std::vector<std::vector<int>> endpointClusters;

  bool cellIsCut(int c) const { return !cellCuts[c].empty(); }
};

/// Intersects the fracture network with the mesh. Fracture endpoints may lie
/// on the domain boundary but never outside; legs coinciding with a grid
/// line are rejected.
CutCellMap buildCutCellMap(const Mesh& mesh, const FractureNetwork& net,
                           const GeometryOptions& opt = {});

/// Splits a convex cell into sign-pure sub-triangles with respect to the
/// given cuts. Triangles smaller than sliverRel * |K| are merged into the
/// largest same-side triangle; the areas always partition the cell exactly.
std::vector<SubTriangle> subtriangulate(const std::array<Vec2, 4>& corners,
                                        const std::vector<const CellCut*>& cuts,
                                        double sliverRel = 1e-12);

/// Mean |n . (x - origin)| over a cell, evaluated exactly by splitting the
/// cell into sign-pure polygons.
double avgNormalDistance(const Mesh& mesh, int cell, const Vec2& origin,
                         const Vec2& normal);

/// Degree-2 quadrature on a sub-triangle (edge midpoints, equal weights).
struct TriQP {
  Vec2 x;
  double w;
};
std::array<TriQP, 3> triangleRule(const SubTriangle& t);

/// Two-point Gauss rule on the straight segment [a, b].
struct SegQP {
  Vec2 x;
  double w;
};
std::array<SegQP, 2> segmentRule(const Vec2& a, const Vec2& b);

}  // namespace efrac

#endif
