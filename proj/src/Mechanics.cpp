/**
 * @file Mechanics.cpp
 * @brief Element assembly of the enriched momentum balance and the fracture
 *        traction balance.
 */
#include "efrac/Mechanics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "efrac/Errors.hpp"

namespace efrac {

namespace {

const Vec3 kVoigtId{1.0, 1.0, 0.0};

Vec2 tractionOfStress(const Vec3& s, const Vec2& n) {
  return {s[0] * n.x() + s[2] * n.y(), s[2] * n.x() + s[1] * n.y()};
}

}  // namespace

Mat3 MaterialField::elasticity() const {
  const double Ey = E();
  const double G = Ey / (2.0 * (1.0 + nu));
  const double lam = Ey * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  Mat3 C = Mat3::Zero();
  C(0, 0) = C(1, 1) = lam + 2.0 * G;
  C(0, 1) = C(1, 0) = lam;
  C(2, 2) = G;
  return C;
}

double MaterialField::invN() const {
  return (biot - phi0) * (1.0 - biot) / Kdr;
}

struct MechanicsAssembler::ElementWork {
  std::vector<std::pair<int, double>> r;
  std::vector<Triplet> J;
  std::vector<std::pair<int, ContactMode>> modes;
  bool wantJ = false;
  bool wantModes = false;
};

MechanicsAssembler::MechanicsAssembler(
    const Mesh& mesh, const CutCellMap& cut, const DofMap& dofs,
    const MaterialField& mat, const SchemeParams& scheme,
    const std::array<MechBC, 4>& bc, double gravity,
    std::vector<PhaseProps> phases, double pmConst, double pfConst,
    double sConst)
    : mesh_(&mesh),
      cut_(&cut),
      dofs_(&dofs),
      mat_(mat),
      scheme_(scheme),
      bc_(bc),
      g_(gravity),
      phases_(std::move(phases)),
      pmConst_(pmConst),
      pfConst_(pfConst),
      sConst_(sConst),
      C_(mat.elasticity()) {
  // The nodal scheme shares enrichment dofs across cells through the cut
  // surface's Heaviside. A chord passing through a mesh node leaves that
  // node's side ambiguous and its shifted basis discontinuous into uncut
  // neighbours, so the configuration is rejected up front (the element-local
  // schemes are unaffected).
  if (scheme_.scheme == Scheme::XFEM) {
    const double tol = 1e-8 * mesh.h();
    for (const CellCut& k : cut.cuts) {
      const auto nodes = mesh.cellNodes(k.cell);
      for (int a = 0; a < 4; ++a) {
        const Vec2 xa = mesh.node(nodes[a]);
        if (std::abs(k.yn(xa)) < tol)
          throw GeometryError(
              "fracture " + std::to_string(k.fracture) +
              " passes through mesh node (" + std::to_string(xa.x()) + ", " +
              std::to_string(xa.y()) +
              "); shift the fracture or use an element-local enrichment");
      }
    }
  }

  const double kn = scheme_.penaltyKappa * mat_.E() / mesh.h();
  const double kt = scheme_.tangentRatio * kn;
  modes_.reserve(cut.cuts.size());
  contact_.reserve(cut.cuts.size());
  for (const CellCut& k : cut.cuts) {
    modes_.emplace_back(scheme_.scheme, mesh, k, dofs.frame(k.fracture));
    ContactParams p;
    p.kn = kn;
    p.kt = kt;
    p.friction = mat_.friction;
    // Initial effective contact traction. The bulk carries the total stress
    // sigma0 - b p I while the contact law subtracts the full fluid pressure,
    // so the offset needs the (1 - b) p0 correction to leave the undisturbed
    // state in exact equilibrium for any Biot coefficient.
    const Vec2 tn = tractionOfStress(mat_.sigma0, k.n);
    p.t0 = {k.n.dot(tn) + (1.0 - mat_.biot) * pmConst, k.m.dot(tn)};
    contact_.push_back(p);
  }

  divU_.resize(mesh.cellCount());
  for (int c = 0; c < mesh.cellCount(); ++c) {
    const auto corners = mesh.cellCorners(c);
    const double area = mesh.hx() * mesh.hy();
    divU_[c].fill(0.0);
    for (const QuadQP& q : quadRule(corners)) {
      const Q1Basis b = q1Basis(corners, q.x);
      for (int a = 0; a < 4; ++a)
        for (int d = 0; d < 2; ++d)
          divU_[c][2 * a + d] += q.w * b.dN[a][d] / area;
    }
  }

  divW_.resize(cut.cuts.size());
  for (int k = 0; k < static_cast<int>(cut.cuts.size()); ++k) {
    const CellCut& ck = cut.cuts[k];
    const double area = mesh.hx() * mesh.hy();
    divW_[k].assign(modes_[k].count(), 0.0);
    for (const SubTriangle& st : cut.cellTriangles[ck.cell])
      for (const TriQP& q : triangleRule(st))
        for (int b = 0; b < modes_[k].count(); ++b)
          divW_[k][b] += q.w * voigtTrace(modes_[k].regularStrain(b, q.x)) /
                         area;
  }

  aper_.resize(cut.segments.size());
  for (int s = 0; s < static_cast<int>(cut.segments.size()); ++s) {
    const FractureSegment& seg = cut.segments[s];
    const CutModes& cm = modes_[seg.cut];
    aper_[s].assign(cm.count(), 0.0);
    for (const SegQP& q : segmentRule(seg.p0, seg.p1))
      for (int b = 0; b < cm.count(); ++b)
        aper_[s][b] += q.w * cm.jumpNM(b, q.x).x() / seg.length;
  }

  segOfQp_.assign(2 * cut.cuts.size(), -1);
  for (int k = 0; k < static_cast<int>(cut.cuts.size()); ++k) {
    const CellCut& ck = cut.cuts[k];
    const auto qps = segmentRule(ck.p0, ck.p1);
    for (int q = 0; q < 2; ++q) {
      double best = std::numeric_limits<double>::max();
      for (int s : ck.segments) {
        const double d = std::abs(ck.ym(qps[q].x) - ck.ym(cut.segments[s].center));
        if (d < best) {
          best = d;
          segOfQp_[2 * k + q] = s;
        }
      }
    }
  }
}

double MechanicsAssembler::pm(const VecX& x, int cell) const {
  return dofs_->options().mechanicsOnly ? pmConst_ : x[dofs_->pmDof(cell)];
}

double MechanicsAssembler::sm(const VecX& x, int cell) const {
  const auto& o = dofs_->options();
  return (o.mechanicsOnly || o.singlePhase) ? sConst_ : x[dofs_->smDof(cell)];
}

double MechanicsAssembler::divU(const VecX& x, int cell) const {
  const auto nodes = mesh_->cellNodes(cell);
  double d = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 2; ++c)
      d += divU_[cell][2 * a + c] * x[dofs_->uDof(nodes[a], c)];
  for (int k : cut_->cellCuts[cell]) {
    const auto& wd = dofs_->wDofs(k);
    for (size_t b = 0; b < wd.size(); ++b) d += divW_[k][b] * x[wd[b]];
  }
  return d;
}

double MechanicsAssembler::aperture(const VecX& x, int seg) const {
  const auto& wd = dofs_->wDofs(cut_->segments[seg].cut);
  double w = 0.0;
  for (size_t b = 0; b < wd.size(); ++b) w += aper_[seg][b] * x[wd[b]];
  return w;
}

Vec2 MechanicsAssembler::jumpAt(const VecX& x, int cutId, const Vec2& p) const {
  const auto& wd = dofs_->wDofs(cutId);
  Vec2 j{0.0, 0.0};
  for (size_t b = 0; b < wd.size(); ++b)
    j += x[wd[b]] * modes_[cutId].jumpNM(static_cast<int>(b), p);
  return j;
}

Vec2 MechanicsAssembler::contactJump(const VecX& x, int cp) const {
  const CellCut& ck = cut_->cuts[cp / 2];
  return jumpAt(x, cp / 2, segmentRule(ck.p0, ck.p1)[cp % 2].x);
}

double MechanicsAssembler::surfacePressure(const VecX& x, int cutId,
                                           const Vec2& p) const {
  if (dofs_->options().mechanicsOnly) return pfConst_;
  const CellCut& ck = cut_->cuts[cutId];
  int best = -1;
  double bestD = std::numeric_limits<double>::max();
  for (int s : ck.segments) {
    const double d = std::abs(ck.ym(p) - ck.ym(cut_->segments[s].center));
    if (d < bestD) {
      bestD = d;
      best = s;
    }
  }
  return best < 0 ? pfConst_ : x[dofs_->pfDof(best)];
}

double MechanicsAssembler::mixtureDensity(const VecX& x, const History& h,
                                          int cell) const {
  const double p = pm(x, cell);
  const double s = sm(x, cell);
  const double phi = porosityUpdate(h.phiOld[cell], mat_.biot,
                                    divU(x, cell) - h.divuOld[cell],
                                    p - (dofs_->options().mechanicsOnly
                                             ? pmConst_
                                             : h.xOld[dofs_->pmDof(cell)]),
                                    mat_.invN());
  const double rhoF =
      s * phaseDensity(phases_[0], p) + (1.0 - s) * phaseDensity(phases_[1], p);
  return (1.0 - phi) * mat_.rhoS + phi * rhoF;
}

void MechanicsAssembler::assembleCell(
    int cell, const VecX& x, const History& h,
    const std::vector<std::optional<ContactMode>>& forced,
    ElementWork& out) const {
  const auto corners = mesh_->cellCorners(cell);
  const auto nodes = mesh_->cellNodes(cell);
  const auto& cuts = cut_->cellCuts[cell];
  const auto& opt = dofs_->options();

  // Local dof layout: 8 displacement components then each cut's modes.
  std::array<int, 8> ud;
  for (int a = 0; a < 4; ++a)
    for (int d = 0; d < 2; ++d) ud[2 * a + d] = dofs_->uDof(nodes[a], d);
  std::vector<int> gdof(ud.begin(), ud.end());
  std::vector<int> wOff(cuts.size());
  for (size_t c = 0; c < cuts.size(); ++c) {
    wOff[c] = static_cast<int>(gdof.size());
    const auto& wd = dofs_->wDofs(cuts[c]);
    gdof.insert(gdof.end(), wd.begin(), wd.end());
  }
  const int nL = static_cast<int>(gdof.size());

  VecX R = VecX::Zero(nL);
  MatX K;
  VecX Kp, Ks;
  if (out.wantJ) {
    K = MatX::Zero(nL, nL);
    Kp = VecX::Zero(nL);
    Ks = VecX::Zero(nL);
  }

  const double pmv = pm(x, cell);
  const double smv = sm(x, cell);
  const double biot = mat_.biot;

  // Strain columns of every local dof at one point.
  std::vector<Vec3> B(nL);
  const auto fillB = [&](const Vec2& xq) {
    const Q1Basis q1 = q1Basis(corners, xq);
    for (int a = 0; a < 4; ++a) {
      B[2 * a] = symOuterVoigt(Vec2{1.0, 0.0}, q1.dN[a]);
      B[2 * a + 1] = symOuterVoigt(Vec2{0.0, 1.0}, q1.dN[a]);
    }
    for (size_t c = 0; c < cuts.size(); ++c) {
      const CutModes& cm = modes_[cuts[c]];
      for (int b = 0; b < cm.count(); ++b)
        B[wOff[c] + b] = cm.regularStrain(b, xq);
    }
    return q1;
  };

  // Gravity enters through the cell-level mixture density; its dependence on
  // displacement and jumps runs through the exact mean-divergence rows.
  double rhoMix = 0.0, dRhoDp = 0.0, dRhoDs = 0.0, dRhoDphi = 0.0;
  if (g_ != 0.0) {
    const double pmOld =
        opt.mechanicsOnly ? pmConst_ : h.xOld[dofs_->pmDof(cell)];
    const double phi =
        porosityUpdate(h.phiOld[cell], biot, divU(x, cell) - h.divuOld[cell],
                       pmv - pmOld, mat_.invN());
    const double rw = phaseDensity(phases_[0], pmv);
    const double rn = phaseDensity(phases_[1], pmv);
    const double rhoF = smv * rw + (1.0 - smv) * rn;
    rhoMix = (1.0 - phi) * mat_.rhoS + phi * rhoF;
    dRhoDphi = rhoF - mat_.rhoS;
    dRhoDp = phi * (smv * phaseDensityDeriv(phases_[0], pmv) +
                    (1.0 - smv) * phaseDensityDeriv(phases_[1], pmv)) +
             dRhoDphi * mat_.invN();
    dRhoDs = phi * (rw - rn);
  }
  // Mean-divergence row over the local dofs (gravity chain rule).
  std::vector<double> divRow;
  if (g_ != 0.0 && out.wantJ) {
    divRow.assign(nL, 0.0);
    for (int j = 0; j < 8; ++j) divRow[j] = divU_[cell][j];
    for (size_t c = 0; c < cuts.size(); ++c)
      for (size_t b = 0; b < divW_[cuts[c]].size(); ++b)
        divRow[wOff[c] + b] = divW_[cuts[c]][b];
  }

  const auto pointTerms = [&](const Vec2& xq, double wq) {
    const Q1Basis q1 = fillB(xq);
    Vec3 eps = Vec3::Zero();
    for (int j = 0; j < nL; ++j) eps += B[j] * x[gdof[j]];
    const Vec3 sig = C_ * eps + mat_.sigma0 - biot * pmv * kVoigtId;
    for (int j = 0; j < nL; ++j) {
      // Element-local schemes test the traction balance with the polynomial
      // field, not the trial strain.
      Vec3 T = B[j];
      if (j >= 8 && scheme_.scheme != Scheme::XFEM) {
        const size_t c = std::upper_bound(wOff.begin(), wOff.end(), j) -
                         wOff.begin() - 1;
        T = modes_[cuts[c]].testStrain(j - wOff[c], xq);
      }
      R[j] += wq * T.dot(sig);
      if (out.wantJ) {
        const Vec3 CT = C_.transpose() * T;
        for (int k = 0; k < nL; ++k) K(j, k) += wq * CT.dot(B[k]);
        if (!opt.mechanicsOnly) Kp[j] -= wq * biot * T.dot(kVoigtId);
      }
    }
    if (g_ != 0.0) {
      // Body force rho g downward; nodal y-components plus, for the nodal
      // scheme, the enrichment displacement values (Galerkin consistency).
      for (int a = 0; a < 4; ++a) {
        const double load = wq * q1.N[a] * g_;
        R[2 * a + 1] += load * rhoMix;
        if (out.wantJ) {
          if (!opt.mechanicsOnly) {
            Kp[2 * a + 1] += load * dRhoDp;
            if (!opt.singlePhase) Ks[2 * a + 1] += load * dRhoDs;
          }
          for (int k = 0; k < nL; ++k)
            K(2 * a + 1, k) += load * dRhoDphi * biot * divRow[k];
        }
      }
      if (scheme_.scheme == Scheme::XFEM) {
        for (size_t c = 0; c < cuts.size(); ++c) {
          const CutModes& cm = modes_[cuts[c]];
          for (int b = 0; b < cm.count(); ++b) {
            const double load = wq * cm.value(b, xq).y() * g_;
            R[wOff[c] + b] += load * rhoMix;
            if (out.wantJ) {
              if (!opt.mechanicsOnly) {
                Kp[wOff[c] + b] += load * dRhoDp;
                if (!opt.singlePhase) Ks[wOff[c] + b] += load * dRhoDs;
              }
              for (int k = 0; k < nL; ++k)
                K(wOff[c] + b, k) += load * dRhoDphi * biot * divRow[k];
            }
          }
        }
      }
    }
  };

  if (cuts.empty()) {
    for (const QuadQP& q : quadRule(corners)) pointTerms(q.x, q.w);
  } else {
    for (const SubTriangle& st : cut_->cellTriangles[cell])
      for (const TriQP& q : triangleRule(st)) pointTerms(q.x, q.w);
  }

  // Fracture traction term: surface integral over each chord. The nodal
  // scheme is Galerkin, where crack-face virtual work enters the enriched
  // rows as +int [[psi]].t dGamma; the element-local schemes test the
  // traction RESIDUAL sigma.n - t, whose bulk part is already accounted
  // with a plus sign above, so their surface part enters with a minus.
  const double sgn = scheme_.scheme == Scheme::XFEM ? 1.0 : -1.0;
  for (size_t c = 0; c < cuts.size(); ++c) {
    const int cutId = cuts[c];
    const CellCut& ck = cut_->cuts[cutId];
    const CutModes& cm = modes_[cutId];
    const auto qps = segmentRule(ck.p0, ck.p1);
    for (int q = 0; q < 2; ++q) {
      const int cp = 2 * cutId + q;
      const int seg = segOfQp_[cp];
      const double pfv =
          (opt.mechanicsOnly || seg < 0) ? pfConst_ : x[dofs_->pfDof(seg)];
      Vec2 jump{0.0, 0.0};
      for (int b = 0; b < cm.count(); ++b)
        jump += x[gdof[wOff[c] + b]] * cm.jumpNM(b, qps[q].x);
      const TractionResult tr =
          fractureTraction(contact_[cutId], jump, h.slip[cp], pfv, forced[cp]);
      if (out.wantModes) out.modes.emplace_back(cp, tr.mode);
      const double wq = qps[q].w;
      for (int b = 0; b < cm.count(); ++b) {
        const Vec2 jb = cm.jumpNM(b, qps[q].x);
        R[wOff[c] + b] += sgn * wq * jb.dot(tr.t);
        if (out.wantJ) {
          for (int b2 = 0; b2 < cm.count(); ++b2) {
            const Vec2 jc = cm.jumpNM(b2, qps[q].x);
            K(wOff[c] + b, wOff[c] + b2) += sgn * wq * jb.dot(tr.D * jc);
          }
          // d t_n / d p_f = -1 inside the return map.
          if (!opt.mechanicsOnly && seg >= 0)
            out.J.emplace_back(gdof[wOff[c] + b], dofs_->pfDof(seg),
                               -sgn * wq * jb.x());
        }
      }
    }
    // Single-node cuts leave the linear modes without independent bulk
    // support when the surfaces separate; a small elastic penalty keeps the
    // system regular.
    if (scheme_.scheme == Scheme::EFEM1 && ck.singleNodeCut &&
        scheme_.stabilization > 0.0) {
      const double kStab = scheme_.stabilization * mat_.E();
      for (int b = 2; b < 4; ++b) {
        R[wOff[c] + b] += kStab * x[gdof[wOff[c] + b]];
        if (out.wantJ) K(wOff[c] + b, wOff[c] + b) += kStab;
      }
    }
    if (scheme_.scheme == Scheme::EFEM1 && ck.singleNodeCut &&
        scheme_.stabilization == 0.0) {
      // Solvable only by luck; fail loudly instead.
      bool anyOpen = false;
      for (int q = 0; q < 2; ++q) {
        Vec2 jump{0.0, 0.0};
        for (int b = 0; b < cm.count(); ++b)
          jump += x[gdof[wOff[c] + b]] * cm.jumpNM(b, qps[q].x);
        const int cp = 2 * cutId + q;
        const double pfv =
            (opt.mechanicsOnly || segOfQp_[cp] < 0) ? pfConst_
                                                    : x[dofs_->pfDof(segOfQp_[cp])];
        if (fractureTraction(contact_[cutId], jump, h.slip[cp], pfv,
                             forced[cp])
                .mode == ContactMode::Open)
          anyOpen = true;
      }
      if (anyOpen)
        throw SolverError(
            "single-node cut cell " + std::to_string(cell) +
            " opened with linear enrichment and zero stabilization; the "
            "traction system is structurally singular");
    }
  }

  // Scatter.
  for (int j = 0; j < nL; ++j)
    if (R[j] != 0.0) out.r.emplace_back(gdof[j], R[j]);
  if (out.wantJ) {
    const int gpm = opt.mechanicsOnly ? -1 : dofs_->pmDof(cell);
    const int gsm =
        (opt.mechanicsOnly || opt.singlePhase) ? -1 : dofs_->smDof(cell);
    for (int j = 0; j < nL; ++j) {
      for (int k = 0; k < nL; ++k)
        if (K(j, k) != 0.0) out.J.emplace_back(gdof[j], gdof[k], K(j, k));
      if (gpm >= 0 && Kp[j] != 0.0) out.J.emplace_back(gdof[j], gpm, Kp[j]);
      if (gsm >= 0 && Ks[j] != 0.0) out.J.emplace_back(gdof[j], gsm, Ks[j]);
    }
  }
}

void MechanicsAssembler::assemble(
    const VecX& x, const History& h,
    const std::vector<std::optional<ContactMode>>& forced, VecX& r,
    std::vector<Triplet>* J, std::vector<ContactMode>* modes,
    int threads) const {
  const int nc = mesh_->cellCount();
  threads = std::max(1, std::min(threads, nc));
  if (modes) modes->assign(contactPoints(), ContactMode::Stick);
  std::vector<ElementWork> work(threads);
  const auto run = [&](int t) {
    ElementWork& w = work[t];
    w.wantJ = J != nullptr;
    w.wantModes = modes != nullptr;
    const int c0 = static_cast<int>(static_cast<long>(nc) * t / threads);
    const int c1 = static_cast<int>(static_cast<long>(nc) * (t + 1) / threads);
    for (int c = c0; c < c1; ++c) assembleCell(c, x, h, forced, w);
  };
  if (threads == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(run, t);
    for (auto& t : pool) t.join();
  }
  // Merge in element order so results do not depend on the thread count.
  for (const ElementWork& w : work) {
    for (const auto& [row, v] : w.r) r[row] += v;
    if (J) J->insert(J->end(), w.J.begin(), w.J.end());
    if (modes)
      for (const auto& [cp, m] : w.modes) (*modes)[cp] = m;
  }

  // Boundary tractions. Nodal loads are exact for constant tractions; cut
  // cells on loaded sides also load the nodal-scheme enrichment functions.
  for (const Mesh::Face& f : mesh_->boundaryFaces()) {
    const MechBC& b = bc_[static_cast<int>(f.side)];
    if (b.traction.x() == 0.0 && b.traction.y() == 0.0) continue;
    {
      const Vec2 mid = f.center;
      const Vec2 tang = rot90(f.normal);
      const Vec2 p0 = mid - 0.5 * f.area * tang;
      const Vec2 p1 = mid + 0.5 * f.area * tang;
      for (int a = 0; a < 2; ++a) {
        const Vec2 pa = a == 0 ? p0 : p1;
        const int node = mesh_->nodeIndex(
            static_cast<int>(std::lround(pa.x() / mesh_->hx())),
            static_cast<int>(std::lround(pa.y() / mesh_->hy())));
        for (int d = 0; d < 2; ++d)
          r[dofs_->uDof(node, d)] -= 0.5 * f.area * b.traction[d];
      }
      if (scheme_.scheme != Scheme::XFEM || !cut_->cellIsCut(f.J)) continue;
      for (int cutId : cut_->cellCuts[f.J]) {
        const CutModes& cm = modes_[cutId];
        const CellCut& ck = cut_->cuts[cutId];
        // Split the edge where the chord crosses it; the integrand is smooth
        // on each piece.
        std::vector<double> ts{0.0, 1.0};
        const Vec2 e = p1 - p0;
        const double denom = ck.n.dot(e);
        if (std::abs(denom) > 1e-14 * e.norm()) {
          const double t = ck.n.dot(ck.center - p0) / denom;
          if (t > 1e-12 && t < 1.0 - 1e-12) ts.insert(ts.begin() + 1, t);
        }
        for (size_t i = 0; i + 1 < ts.size(); ++i) {
          const Vec2 a = p0 + ts[i] * e;
          const Vec2 bb = p0 + ts[i + 1] * e;
          for (const SegQP& q : segmentRule(a, bb))
            for (int m = 0; m < cm.count(); ++m)
              r[dofs_->wDofs(cutId)[m]] -=
                  q.w * cm.value(m, q.x).dot(b.traction);
        }
      }
    }
  }
}

}  // namespace efrac
