#include "efrac/Enrichment.hpp"

#include <cmath>

#include "efrac/Errors.hpp"

namespace efrac {

const char* schemeName(Scheme s) {
  switch (s) {
    case Scheme::EFEM0: return "efem0";
    case Scheme::EFEM1: return "efem1";
    default: return "xfem";
  }
}

Q1Basis q1Basis(const std::array<Vec2, 4>& corners, const Vec2& x) {
  const double hx = corners[1].x() - corners[0].x();
  const double hy = corners[3].y() - corners[0].y();
  const double xi = (x.x() - corners[0].x()) / hx;
  const double eta = (x.y() - corners[0].y()) / hy;
  Q1Basis b;
  b.N = {(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta};
  b.dN = {Vec2{-(1 - eta) / hx, -(1 - xi) / hy},
          Vec2{(1 - eta) / hx, -xi / hy}, Vec2{eta / hx, xi / hy},
          Vec2{-eta / hx, (1 - xi) / hy}};
  return b;
}

std::array<QuadQP, 4> quadRule(const std::array<Vec2, 4>& corners) {
  const double hx = corners[1].x() - corners[0].x();
  const double hy = corners[3].y() - corners[0].y();
  const double g = 0.5 / std::sqrt(3.0);
  const Vec2 c = 0.5 * (corners[0] + corners[2]);
  const double w = 0.25 * hx * hy;
  std::array<QuadQP, 4> out;
  int q = 0;
  for (double sx : {-g, g}) {
    for (double sy : {-g, g}) {
      out[q++] = {c + Vec2{sx * hx, sy * hy}, w};
    }
  }
  return out;
}

CutModes::CutModes(Scheme scheme, const Mesh& mesh, const CellCut& cut,
                   const std::array<Vec2, 2>& frame)
    : scheme_(scheme), cut_(&cut), frame_(frame) {
  corners_ = mesh.cellCorners(cut.cell);
  const auto nodes = mesh.cellNodes(cut.cell);
  for (int a = 0; a < 4; ++a) nodeX_[a] = mesh.node(nodes[a]);
  count_ = scheme == Scheme::EFEM0 ? 2 : (scheme == Scheme::EFEM1 ? 4 : 8);
  beta_.setZero();
  if (scheme == Scheme::XFEM) return;

  const double area = mesh.cellArea();
  const double L = cut.length;
  if (scheme == Scheme::EFEM0) {
    // Constant test vector: the single coefficient matching a constant
    // traction field, beta = |k| / |K|.
    beta_(0, 0) = L / area;
    return;
  }

  // Linear test polynomials from the moment problem A_K beta = L_k. A_K is
  // the Gram matrix of {1, y_n, y_m} over the cell, computed exactly from
  // the rectangle's second moments; L_k uses the chord midpoint as origin,
  // so its first moment along the chord vanishes.
  const Vec2 dc = 0.5 * (corners_[0] + corners_[2]) - cut.center;
  const double hx = corners_[1].x() - corners_[0].x();
  const double hy = corners_[3].y() - corners_[0].y();
  const Vec2& n = cut.n;
  const Vec2& m = cut.m;
  const double ndc = n.dot(dc), mdc = m.dot(dc);
  Mat3 A;
  A(0, 0) = 1.0;
  A(0, 1) = A(1, 0) = ndc;
  A(0, 2) = A(2, 0) = mdc;
  A(1, 1) = (n.x() * n.x() * hx * hx + n.y() * n.y() * hy * hy) / 12.0 +
            ndc * ndc;
  A(1, 2) = A(2, 1) =
      (n.x() * m.x() * hx * hx + n.y() * m.y() * hy * hy) / 12.0 + ndc * mdc;
  A(2, 2) = (m.x() * m.x() * hx * hx + m.y() * m.y() * hy * hy) / 12.0 +
            mdc * mdc;
  A *= area;
  Eigen::Matrix<double, 3, 2> Lk;
  Lk.setZero();
  Lk(0, 0) = L;
  Lk(2, 1) = L * L * L / 12.0;
  beta_ = A.ldlt().solve(Lk);
}

Vec2 CutModes::direction(int b) const {
  switch (scheme_) {
    case Scheme::EFEM0:
      return b == 0 ? cut_->n : cut_->m;
    case Scheme::EFEM1:
      // Modes 0,3 open/rotate along n; 1,2 slide/stretch along m.
      return (b == 0 || b == 3) ? cut_->n : cut_->m;
    default:
      return frame_[b % 2];
  }
}

Vec2 CutModes::jumpNM(int b, const Vec2& x) const {
  const Vec2& n = cut_->n;
  const Vec2& m = cut_->m;
  switch (scheme_) {
    case Scheme::EFEM0:
      return b == 0 ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
    case Scheme::EFEM1: {
      const double ym = cut_->ym(x);
      const double yn = cut_->yn(x);
      switch (b) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {0.0, ym};                // tangential stretch
        default: return {ym, -yn};               // rigid rotation about x_k
      }
    }
    default: {
      const Q1Basis q = q1Basis(corners_, x);
      const Vec2& d = frame_[b % 2];
      return q.N[b / 2] * Vec2{d.dot(n), d.dot(m)};
    }
  }
}

Vec3 CutModes::regularStrain(int b, const Vec2& x) const {
  const Q1Basis q = q1Basis(corners_, x);
  const bool H = cut_->heaviside(x);
  const Vec2& n = cut_->n;
  const Vec2& m = cut_->m;

  if (scheme_ == Scheme::XFEM) {
    const int a = b / 2;
    const Vec2& d = frame_[b % 2];
    const double Ha = cut_->nodeSide[a];
    return (static_cast<double>(H) - Ha) * symOuterVoigt(d, q.dN[a]);
  }

  // xi_b evaluated at the nodes; the shifted basis subtracts its Q1
  // interpolant, so the bulk strain is H grad^s(xi) minus the interpolant's
  // strain.
  Vec3 e = Vec3::Zero();
  if (scheme_ == Scheme::EFEM1 && b == 2 && H) {
    e += symOuterVoigt(m, m);  // grad^s(y_m m) = m (x) m
  }
  // Mode 3's gradient n (x) m - m (x) n is antisymmetric: no bulk term.
  for (int a = 0; a < 4; ++a) {
    if (!cut_->nodeSide[a]) continue;
    Vec2 xi;
    if (scheme_ == Scheme::EFEM0) {
      xi = (b == 0) ? n : m;
    } else {
      const double ym = cut_->ym(nodeX_[a]);
      const double yn = cut_->yn(nodeX_[a]);
      switch (b) {
        case 0: xi = n; break;
        case 1: xi = m; break;
        case 2: xi = ym * m; break;
        default: xi = ym * n - yn * m; break;
      }
    }
    e -= symOuterVoigt(xi, q.dN[a]);
  }
  return e;
}

Vec2 CutModes::value(int b, const Vec2& x) const {
  const Q1Basis q = q1Basis(corners_, x);
  const bool H = cut_->heaviside(x);
  const Vec2& n = cut_->n;
  const Vec2& m = cut_->m;
  auto xiAt = [&](const Vec2& p) -> Vec2 {
    switch (scheme_) {
      case Scheme::EFEM0:
        return b == 0 ? n : m;
      case Scheme::EFEM1: {
        const double ym = cut_->ym(p);
        const double yn = cut_->yn(p);
        switch (b) {
          case 0: return n;
          case 1: return m;
          case 2: return ym * m;
          default: return ym * n - yn * m;
        }
      }
      default:
        return q1Basis(corners_, p).N[b / 2] * frame_[b % 2];
    }
  };
  Vec2 v = H ? xiAt(x) : Vec2{0.0, 0.0};
  for (int a = 0; a < 4; ++a) {
    if (cut_->nodeSide[a]) v -= q.N[a] * xiAt(nodeX_[a]);
  }
  return v;
}

Vec3 CutModes::testStrain(int b, const Vec2& x) const {
  if (scheme_ == Scheme::XFEM) return regularStrain(b, x);
  const Vec3 c = betaCoef(b);
  const double p = c(0) + c(1) * cut_->yn(x) + c(2) * cut_->ym(x);
  return p * symOuterVoigt(direction(b), cut_->n);
}

Vec3 CutModes::betaCoef(int b) const {
  if (scheme_ == Scheme::EFEM0) return {beta_(0, 0), 0.0, 0.0};
  // Constant jumps (modes 0,1) pair with the constant-moment polynomial;
  // the linear jumps (stretch 2, rotation 3) pair with the linear moment.
  const int col = (b == 0 || b == 1) ? 0 : 1;
  return beta_.col(col);
}

std::array<Vec2, 2> xfemFrame(const FractureNetwork& net, int fracture) {
  const auto& pts = net[fracture].points;
  Vec2 m0 = (pts[1] - pts[0]).normalized();
  for (size_t i = 1; i + 1 < pts.size(); ++i) {
    const Vec2 mi = (pts[i + 1] - pts[i]).normalized();
    if (std::abs(std::atan2(std::abs(m0.x() * mi.y() - m0.y() * mi.x()),
                            m0.dot(mi))) > 1e-8) {
      return {Vec2{1.0, 0.0}, Vec2{0.0, 1.0}};  // kinked: global axes
    }
  }
  return {rot90(m0), m0};
}

}  // namespace efrac
