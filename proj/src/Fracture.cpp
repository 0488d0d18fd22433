#include "efrac/Fracture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "efrac/Errors.hpp"

namespace efrac {
namespace {

double cross2(const Vec2& a, const Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

double polyArea(const std::vector<Vec2>& p) {
  double s = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    s += cross2(p[i], p[(i + 1) % p.size()]);
  }
  return 0.5 * s;
}

Vec2 polyCentroid(const std::vector<Vec2>& p, double area) {
  Vec2 c{0.0, 0.0};
  for (size_t i = 0; i < p.size(); ++i) {
    const Vec2& a = p[i];
    const Vec2& b = p[(i + 1) % p.size()];
    c += (a + b) * cross2(a, b);
  }
  return c / (6.0 * area);
}

/// Splits a convex ccw polygon by the line n.(x - o) = 0. Vertices within
/// epsOn of the line belong to both parts, so the cut edge is shared exactly.
void splitPoly(const std::vector<Vec2>& poly, const Vec2& o, const Vec2& n,
               double epsOn, std::vector<Vec2>& plus, std::vector<Vec2>& minus) {
  const size_t N = poly.size();
  for (size_t i = 0; i < N; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % N];
    const double sa = n.dot(a - o);
    const double sb = n.dot(b - o);
    const bool aOn = std::abs(sa) <= epsOn;
    const bool bOn = std::abs(sb) <= epsOn;
    if (aOn) {
      plus.push_back(a);
      minus.push_back(a);
    } else if (sa > 0.0) {
      plus.push_back(a);
    } else {
      minus.push_back(a);
    }
    if (!aOn && !bOn && (sa > 0.0) != (sb > 0.0)) {
      const Vec2 x = a + (sa / (sa - sb)) * (b - a);
      plus.push_back(x);
      minus.push_back(x);
    }
  }
}

double snapCoord(double v, double spacing, double tol) {
  const double g = std::round(v / spacing) * spacing;
  return std::abs(v - g) < tol ? g : v;
}

struct Leg {
  int frac, leg;
  Vec2 a, b, d;  // d = b - a
  double len;
};

struct TEntry {
  double t;
  Vec2 p;
  int priority;  // 2 = fracture vertex, 1 = crossing, 0 = grid line
};

/// Clips the infinite line a + t*d against an axis-aligned rectangle.
/// Returns false if the line misses the rectangle.
bool clipLineToRect(const Vec2& a, const Vec2& d, const Vec2& lo,
                    const Vec2& hi, double& t0, double& t1) {
  t0 = -std::numeric_limits<double>::infinity();
  t1 = std::numeric_limits<double>::infinity();
  for (int ax = 0; ax < 2; ++ax) {
    if (std::abs(d(ax)) < 1e-300) {
      if (a(ax) < lo(ax) || a(ax) > hi(ax)) return false;
      continue;
    }
    double ta = (lo(ax) - a(ax)) / d(ax);
    double tb = (hi(ax) - a(ax)) / d(ax);
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  return t0 < t1;
}

}  // namespace

std::vector<SubTriangle> subtriangulate(const std::array<Vec2, 4>& corners,
                                        const std::vector<const CellCut*>& cuts,
                                        double sliverRel) {
  struct TaggedPoly {
    std::vector<Vec2> v;
    std::vector<uint8_t> side;
  };
  const double cellArea =
      polyArea({corners[0], corners[1], corners[2], corners[3]});
  const double diag = (corners[2] - corners[0]).norm();

  std::vector<TaggedPoly> polys;
  polys.push_back({{corners.begin(), corners.end()}, {}});
  for (const CellCut* cut : cuts) {
    std::vector<TaggedPoly> next;
    for (const TaggedPoly& tp : polys) {
      std::vector<Vec2> plus, minus;
      splitPoly(tp.v, cut->center, cut->n, 1e-12 * diag, plus, minus);
      for (int s = 1; s >= 0; --s) {
        std::vector<Vec2>& part = s ? plus : minus;
        if (part.size() < 3 || std::abs(polyArea(part)) < 1e-14 * cellArea) {
          continue;
        }
        TaggedPoly out{std::move(part), tp.side};
        out.side.push_back(static_cast<uint8_t>(s));
        next.push_back(std::move(out));
      }
    }
    polys = std::move(next);
  }

  std::vector<SubTriangle> tris;
  for (const TaggedPoly& tp : polys) {
    for (size_t i = 1; i + 1 < tp.v.size(); ++i) {
      SubTriangle t;
      t.v = {tp.v[0], tp.v[i], tp.v[i + 1]};
      t.area = 0.5 * cross2(t.v[1] - t.v[0], t.v[2] - t.v[0]);
      t.side = tp.side;
      if (t.area > 1e-14 * cellArea) tris.push_back(std::move(t));
    }
  }

  // Sliver merge: tiny triangles hand their area to the largest triangle on
  // the same side of every cut, so the areas still partition the cell.
  std::vector<SubTriangle> kept;
  std::vector<SubTriangle> slivers;
  for (auto& t : tris) {
    (t.area < sliverRel * cellArea ? slivers : kept).push_back(std::move(t));
  }
  for (const auto& s : slivers) {
    SubTriangle* host = nullptr;
    for (auto& k : kept) {
      if (k.side == s.side && (!host || k.area > host->area)) host = &k;
    }
    if (host) {
      host->area += s.area;
    } else {
      kept.push_back(s);
    }
  }
  return kept;
}

double avgNormalDistance(const Mesh& mesh, int cell, const Vec2& origin,
                         const Vec2& normal) {
  const auto corners = mesh.cellCorners(cell);
  std::vector<Vec2> rect{corners.begin(), corners.end()};
  std::vector<Vec2> plus, minus;
  splitPoly(rect, origin, normal, 0.0, plus, minus);
  double sum = 0.0;
  for (const auto* part : {&plus, &minus}) {
    if (part->size() < 3) continue;
    const double area = polyArea(*part);
    if (std::abs(area) < 1e-300) continue;
    sum += std::abs(area) * std::abs(normal.dot(polyCentroid(*part, area) - origin));
  }
  return sum / mesh.cellArea();
}

std::array<TriQP, 3> triangleRule(const SubTriangle& t) {
  // Degree-2 rule with strictly interior points. Side-pure triangles have
  // the cut chord as an edge, so points on edges would sample the wrong
  // side of a discontinuous integrand.
  const double w = t.area / 3.0;
  const auto at = [&](int a) {
    return (4.0 * t.v[a] + t.v[(a + 1) % 3] + t.v[(a + 2) % 3]) / 6.0;
  };
  return {TriQP{at(0), w}, TriQP{at(1), w}, TriQP{at(2), w}};
}

std::array<SegQP, 2> segmentRule(const Vec2& a, const Vec2& b) {
  const Vec2 mid = 0.5 * (a + b);
  const Vec2 half = 0.5 * (b - a);
  const double g = 1.0 / std::sqrt(3.0);
  const double w = 0.5 * (b - a).norm();
  return {SegQP{mid - g * half, w}, SegQP{mid + g * half, w}};
}

CutCellMap buildCutCellMap(const Mesh& mesh, const FractureNetwork& net,
                           const GeometryOptions& opt) {
  const double h = mesh.h();
  const double snapAbs = opt.snapRel * h;

  // Snap vertices onto nearby grid lines and validate containment.
  std::vector<std::vector<Vec2>> pts(net.size());
  for (size_t f = 0; f < net.size(); ++f) {
    if (net[f].points.size() < 2) {
      throw GeometryError("fracture " + std::to_string(f) +
                          " needs at least two points");
    }
    for (const Vec2& v : net[f].points) {
      Vec2 p{snapCoord(v.x(), mesh.hx(), snapAbs),
             snapCoord(v.y(), mesh.hy(), snapAbs)};
      if (p.x() < 0.0 || p.x() > mesh.Lx() || p.y() < 0.0 ||
          p.y() > mesh.Ly()) {
        throw GeometryError("fracture " + std::to_string(f) +
                            " extends outside the domain");
      }
      pts[f].push_back(p);
    }
  }

  std::vector<Leg> legs;
  for (size_t f = 0; f < net.size(); ++f) {
    for (size_t i = 0; i + 1 < pts[f].size(); ++i) {
      Leg l;
      l.frac = static_cast<int>(f);
      l.leg = static_cast<int>(i);
      l.a = pts[f][i];
      l.b = pts[f][i + 1];
      l.d = l.b - l.a;
      l.len = l.d.norm();
      if (l.len < 10.0 * snapAbs) {
        throw GeometryError("fracture " + std::to_string(f) +
                            " has a degenerate leg");
      }
      // A leg lying on a grid line would cut no cell; reject it.
      if ((std::abs(l.d.y()) < 1e-14 * l.len &&
           std::abs(l.a.y() - std::round(l.a.y() / mesh.hy()) * mesh.hy()) <
               snapAbs) ||
          (std::abs(l.d.x()) < 1e-14 * l.len &&
           std::abs(l.a.x() - std::round(l.a.x() / mesh.hx()) * mesh.hx()) <
               snapAbs)) {
        throw GeometryError("fracture " + std::to_string(f) +
                            " lies on a mesh line");
      }
      legs.push_back(l);
    }
  }

  // Crossing points between legs of different fractures become shared split
  // points, so crossing fractures exchange flow through a common endpoint.
  std::vector<std::vector<TEntry>> entries(legs.size());
  for (size_t i = 0; i < legs.size(); ++i) {
    entries[i].push_back({0.0, legs[i].a, 2});
    entries[i].push_back({1.0, legs[i].b, 2});
  }
  for (size_t i = 0; i < legs.size(); ++i) {
    for (size_t j = i + 1; j < legs.size(); ++j) {
      if (legs[i].frac == legs[j].frac) continue;
      const double denom = cross2(legs[i].d, legs[j].d);
      if (std::abs(denom) < 1e-14 * legs[i].len * legs[j].len) continue;
      const Vec2 r = legs[j].a - legs[i].a;
      const double ti = cross2(r, legs[j].d) / denom;
      const double tj = cross2(r, legs[i].d) / denom;
      const double ei = snapAbs / legs[i].len;
      const double ej = snapAbs / legs[j].len;
      if (ti < -ei || ti > 1.0 + ei || tj < -ej || tj > 1.0 + ej) continue;
      const Vec2 p = legs[i].a + ti * legs[i].d;
      if (ti > ei && ti < 1.0 - ei) entries[i].push_back({ti, p, 1});
      if (tj > ej && tj < 1.0 - ej) entries[j].push_back({tj, p, 1});
    }
  }

  for (size_t i = 0; i < legs.size(); ++i) {
    const Leg& l = legs[i];
    auto addGrid = [&](double coord0, double dcoord, double spacing, int count) {
      if (std::abs(dcoord) < 1e-14 * l.len) return;
      for (int k = 0; k <= count; ++k) {
        const double t = (k * spacing - coord0) / dcoord;
        if (t > 0.0 && t < 1.0) entries[i].push_back({t, l.a + t * l.d, 0});
      }
    };
    addGrid(l.a.x(), l.d.x(), mesh.hx(), mesh.nx());
    addGrid(l.a.y(), l.d.y(), mesh.hy(), mesh.ny());

    auto& e = entries[i];
    std::sort(e.begin(), e.end(), [](const TEntry& a, const TEntry& b) {
      return a.t < b.t || (a.t == b.t && a.priority > b.priority);
    });
    const double tolT = snapAbs / l.len;
    std::vector<TEntry> dedup;
    for (const TEntry& te : e) {
      if (!dedup.empty() && te.t - dedup.back().t < tolT) {
        if (te.priority > dedup.back().priority) dedup.back() = te;
        continue;
      }
      dedup.push_back(te);
    }
    e = std::move(dedup);
  }

  CutCellMap map;
  map.cellCuts.assign(mesh.cellCount(), {});
  map.cellTriangles.assign(mesh.cellCount(), {});
  map.fractureSegments.assign(net.size(), {});

  // Flow segments, grouped into mechanics cuts per (cell, leg).
  struct SegBuild {
    int seg;
    double t0, t1;
  };
  std::map<std::pair<int, int>, std::vector<SegBuild>> groups;  // (cell, leg)
  std::vector<double> segSortKey;
  for (size_t i = 0; i < legs.size(); ++i) {
    const Leg& l = legs[i];
    for (size_t k = 0; k + 1 < entries[i].size(); ++k) {
      const TEntry& e0 = entries[i][k];
      const TEntry& e1 = entries[i][k + 1];
      if ((e1.t - e0.t) * l.len < 1e-12 * h) continue;
      const Vec2 mid = 0.5 * (e0.p + e1.p);
      const int cell = mesh.locate(mid);
      FractureSegment s;
      s.fracture = l.frac;
      s.cell = cell;
      s.p0 = e0.p;
      s.p1 = e1.p;
      s.center = mid;
      s.length = (e1.p - e0.p).norm();
      s.m = l.d / l.len;
      s.n = rot90(s.m);
      const int id = static_cast<int>(map.segments.size());
      map.segments.push_back(s);
      map.fractureSegments[l.frac].push_back(id);
      segSortKey.push_back(l.leg * 2.0 + e0.t);  // order along the polyline
      groups[{cell, static_cast<int>(i)}].push_back({id, e0.t, e1.t});
    }
  }
  for (size_t f = 0; f < net.size(); ++f) {
    auto& segs = map.fractureSegments[f];
    std::sort(segs.begin(), segs.end(), [&](int a, int b) {
      return segSortKey[a] < segSortKey[b];
    });
  }

  for (auto& [key, group] : groups) {
    const auto [cell, legIdx] = key;
    const Leg& l = legs[legIdx];
    const auto corners = mesh.cellCorners(cell);
    double tc0, tc1;
    if (!clipLineToRect(l.a, l.d, corners[0], corners[2], tc0, tc1)) {
      throw GeometryError("fracture chord misses its host cell");
    }
    CellCut cut;
    cut.fracture = l.frac;
    cut.leg = l.leg;
    cut.cell = cell;
    cut.p0 = l.a + tc0 * l.d;
    cut.p1 = l.a + tc1 * l.d;
    cut.center = 0.5 * (cut.p0 + cut.p1);
    cut.length = (cut.p1 - cut.p0).norm();
    cut.m = l.d / l.len;
    cut.n = rot90(cut.m);
    const double eT = snapAbs / l.len;
    double tmin = 1e300, tmax = -1e300;
    for (const SegBuild& sb : group) {
      tmin = std::min(tmin, sb.t0);
      tmax = std::max(tmax, sb.t1);
    }
    cut.tipExtended = (tmin > tc0 + eT) || (tmax < tc1 - eT);

    int plusCount = 0;
    const auto nodes = mesh.cellNodes(cell);
    for (int a = 0; a < 4; ++a) {
      cut.nodeSide[a] = cut.heaviside(mesh.node(nodes[a])) ? 1 : 0;
      plusCount += cut.nodeSide[a];
    }
    if (plusCount == 0 || plusCount == 4) {
      throw GeometryError("cut of cell " + std::to_string(cell) +
                          " does not separate its nodes");
    }
    cut.singleNodeCut = (plusCount == 1 || plusCount == 3);
    cut.dAvg = avgNormalDistance(mesh, cell, cut.center, cut.n);

    const int cutId = static_cast<int>(map.cuts.size());
    for (const SegBuild& sb : group) {
      cut.segments.push_back(sb.seg);
      map.segments[sb.seg].cut = cutId;
    }
    map.cuts.push_back(std::move(cut));
    map.cellCuts[cell].push_back(cutId);
  }

  for (int c = 0; c < mesh.cellCount(); ++c) {
    if (map.cellCuts[c].empty()) continue;
    std::vector<const CellCut*> cuts;
    for (int id : map.cellCuts[c]) cuts.push_back(&map.cuts[id]);
    map.cellTriangles[c] =
        subtriangulate(mesh.cellCorners(c), cuts, opt.sliverRel);
  }

  // Cluster coincident segment ends (polyline joints, grid crossings shared
  // by consecutive segments, fracture crossings) for fracture-fracture flow.
  const double clusterTol = 0.5 * snapAbs;
  const int nEnds = 2 * static_cast<int>(map.segments.size());
  std::vector<int> parent(nEnds);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto endPoint = [&](int e) {
    const FractureSegment& s = map.segments[e / 2];
    return (e % 2 == 0) ? s.p0 : s.p1;
  };
  for (int i = 0; i < nEnds; ++i) {
    for (int j = i + 1; j < nEnds; ++j) {
      if ((endPoint(i) - endPoint(j)).norm() < clusterTol) {
        parent[find(i)] = find(j);
      }
    }
  }
  std::map<int, std::vector<int>> clusters;
  for (int i = 0; i < nEnds; ++i) clusters[find(i)].push_back(i);
  for (auto& [root, members] : clusters) {
    if (members.size() >= 2) map.endpointClusters.push_back(members);
  }
  return map;
}

}  // namespace efrac
