#include "efrac/Connectivity.hpp"

#include <cmath>

namespace efrac {
namespace {

/// Half-cell transmissibility from the cell center to a face, |c| * (d .
/// kappa n) / |d|^2 with d the center-to-face vector.
double halfTrans(const Mesh& mesh, int cell, const Mesh::Face& f, double kx,
                 double ky) {
  const Vec2 d = f.center - mesh.cellCenter(cell);
  const Vec2 kn{kx * f.normal.x(), ky * f.normal.y()};
  return f.area * d.dot(kn) / d.squaredNorm();
}

double harmonic(double a, double b) {
  const double s = a + b;
  return s > 0.0 ? a * b / s : 0.0;
}

}  // namespace

ConnectivitySets buildConnectivity(const Mesh& mesh, const CutCellMap& cut,
                                   const std::vector<double>& kx,
                                   const std::vector<double>& ky) {
  ConnectivitySets conn;

  for (const auto& f : mesh.interiorFaces()) {
    const double tJ = halfTrans(mesh, f.J, f, kx[f.J], ky[f.J]);
    Mesh::Face flip = f;
    flip.normal = -f.normal;
    const double tK = halfTrans(mesh, f.K, flip, kx[f.K], ky[f.K]);
    conn.mm.push_back({f.J, f.K, harmonic(tJ, tK)});
  }

  for (size_t s = 0; s < cut.segments.size(); ++s) {
    const FractureSegment& seg = cut.segments[s];
    const CellCut& c = cut.cuts[seg.cut];
    const double kapN = seg.n.x() * seg.n.x() * kx[seg.cell] +
                        seg.n.y() * seg.n.y() * ky[seg.cell];
    conn.mf.push_back(
        {seg.cell, static_cast<int>(s), seg.length / c.dAvg, kapN});
  }

  for (const auto& cluster : cut.endpointClusters) {
    for (size_t i = 0; i < cluster.size(); ++i) {
      for (size_t j = i + 1; j < cluster.size(); ++j) {
        const int sa = cluster[i] / 2;
        const int sb = cluster[j] / 2;
        const FractureSegment& A = cut.segments[sa];
        const FractureSegment& B = cut.segments[sb];
        const Vec2 pa = (cluster[i] % 2 == 0) ? A.p0 : A.p1;
        const Vec2 pb = (cluster[j] % 2 == 0) ? B.p0 : B.p1;
        conn.ff.push_back(
            {sa, sb, (A.center - pa).norm(), (B.center - pb).norm()});
      }
    }
  }

  for (const auto& f : mesh.boundaryFaces()) {
    conn.em.push_back({f.J, f.side, halfTrans(mesh, f.J, f, kx[f.J], ky[f.J]),
                       f.area, f.center});
  }
  return conn;
}

}  // namespace efrac
