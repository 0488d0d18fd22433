/**
 * @file Flow.cpp
 * @brief Assembly of the finite-volume mass balances and the conservation
 *        accounting of converged steps.
 */
#include "efrac/Flow.hpp"

#include <algorithm>
#include <cmath>

#include "efrac/Errors.hpp"

namespace efrac {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double peacemanRadius(double hx, double hy) {
  return 0.28 * std::sqrt(0.5 * (hx * hx + hy * hy));
}

double peacemanIndex(double kx, double ky, double ro, double rw) {
  return 2.0 * kPi * std::sqrt(kx * ky) / std::log(ro / rw);
}

double StepBalance::relError(double dt) const {
  double worst = 0.0;
  for (int p = 0; p < 2; ++p) {
    const double err = std::abs(dMass[p] - dt * (boundary[p] - wells[p]));
    const double denom = std::max(dt * throughput[p], inPlace[p]);
    if (denom > 0.0) worst = std::max(worst, err / denom);
  }
  return worst;
}

FlowAssembler::FlowAssembler(const Mesh& mesh, const CutCellMap& cut,
                             const ConnectivitySets& conn, const DofMap& dofs,
                             const MechanicsAssembler& mech,
                             const MaterialField& mat,
                             std::vector<PhaseProps> phases, double gravity,
                             std::array<FlowBC, 4> bc, std::vector<Well> wells,
                             std::vector<double> segW0, double sFixed)
    : mesh_(&mesh),
      cut_(&cut),
      conn_(&conn),
      dofs_(&dofs),
      mech_(&mech),
      mat_(mat),
      phases_(std::move(phases)),
      g_(gravity),
      bc_(bc),
      wells_(std::move(wells)),
      segW0_(std::move(segW0)),
      sFixed_(sFixed) {
  perfConst_.resize(wells_.size());
  for (size_t w = 0; w < wells_.size(); ++w) {
    for (const Perforation& pf : wells_[w].perfs) {
      PerfConst pc;
      pc.ro = peacemanRadius(mesh.hx(), mesh.hy());
      if (pc.ro <= wells_[w].rw)
        throw ConfigError("well '" + wells_[w].name +
                          "': equivalent radius " + std::to_string(pc.ro) +
                          " does not exceed the wellbore radius");
      if (pf.cell >= 0)
        pc.wi = peacemanIndex(mat_.kx[pf.cell], mat_.ky[pf.cell], pc.ro,
                              wells_[w].rw);
      perfConst_[w].push_back(pc);
    }
  }
}

double FlowAssembler::saturation(const VecX& x, int cell) const {
  return dofs_->options().singlePhase ? sFixed_ : x[dofs_->smDof(cell)];
}

double FlowAssembler::saturationSeg(const VecX& x, int seg) const {
  return dofs_->options().singlePhase ? sFixed_ : x[dofs_->sfDof(seg)];
}

double FlowAssembler::porosity(const VecX& x, const History& h,
                               int cell) const {
  const int pd = dofs_->pmDof(cell);
  return porosityUpdate(h.phiOld[cell], mat_.biot,
                        mech_->divU(x, cell) - h.divuOld[cell],
                        x[pd] - h.xOld[pd], mat_.invN());
}

double FlowAssembler::hydraulicW(const VecX& x, int seg) const {
  return hydraulicAperture(mech_->aperture(x, seg), segW0_[seg]);
}

double FlowAssembler::massCell(const VecX& x, const History& h, int cell,
                               int phase) const {
  const double s = saturation(x, cell);
  const double sp = phase == 0 ? s : 1.0 - s;
  return porosity(x, h, cell) * sp *
         phaseDensity(phases_[phase], x[dofs_->pmDof(cell)]);
}

double FlowAssembler::massSeg(const VecX& x, int seg, int phase) const {
  const double s = saturationSeg(x, seg);
  const double sp = phase == 0 ? s : 1.0 - s;
  return hydraulicW(x, seg) * sp *
         phaseDensity(phases_[phase], x[dofs_->pfDof(seg)]);
}

namespace {

/// One side of a two-point connection: pressure dof (or fixed value),
/// saturation (dof optional), and elevation.
struct FlowSide {
  int pDof = -1;
  double p = 0.0;
  int sDof = -1;
  double s = 1.0;
  double z = 0.0;
};

}  // namespace

void FlowAssembler::assemble(const VecX& x, const History& h, double dt,
                             VecX& r, std::vector<Triplet>* J) const {
  if (!(dt > 0.0))
    throw SolverError("mass balance requires a positive time step, got " +
                      std::to_string(dt));
  const auto& opt = dofs_->options();
  const int np = phases();
  const double invN = mat_.invN();
  const double biot = mat_.biot;

  const auto sideCell = [&](int c) {
    FlowSide fs;
    fs.pDof = dofs_->pmDof(c);
    fs.p = x[fs.pDof];
    if (!opt.singlePhase) fs.sDof = dofs_->smDof(c);
    fs.s = saturation(x, c);
    fs.z = mesh_->cellCenter(c).y();
    return fs;
  };
  const auto sideSeg = [&](int sg) {
    FlowSide fs;
    fs.pDof = dofs_->pfDof(sg);
    fs.p = x[fs.pDof];
    if (!opt.singlePhase) fs.sDof = dofs_->sfDof(sg);
    fs.s = saturationSeg(x, sg);
    fs.z = cut_->segments[sg].center.y();
    return fs;
  };

  // Adds one phase flux F = lam T dpsi between two sides; rowJ/rowK = -1
  // marks an exterior side. dT lists (column, dT/dcolumn) pairs.
  const auto addFlux = [&](int rowJ, int rowK, double T, int phase,
                           const FlowSide& sj, const FlowSide& sk,
                           const std::vector<std::pair<int, double>>& dT) {
    const PhaseProps& ph = phases_[phase];
    const double rhoJ = phaseDensity(ph, sj.p);
    const double rhoK = phaseDensity(ph, sk.p);
    const double dz = sj.z - sk.z;
    const double dpsi = sj.p - sk.p + 0.5 * (rhoJ + rhoK) * g_ * dz;
    // relPerm takes the wetting saturation for both phases.
    const double lamJ = relPerm(phase, sj.s) * rhoJ / ph.mu;
    const double lamK = relPerm(phase, sk.s) * rhoK / ph.mu;
    const int up = dpsi > 0.0 ? 0 : (dpsi < 0.0 ? 1 : -1);
    const double lam = up == 0 ? lamJ : (up == 1 ? lamK : 0.5 * (lamJ + lamK));
    const double F = lam * T * dpsi;
    if (rowJ >= 0) r[rowJ] += F;
    if (rowK >= 0) r[rowK] -= F;
    if (!J) return;
    std::vector<std::pair<int, double>> dF;
    const double dpsi_dpJ = 1.0 + 0.5 * phaseDensityDeriv(ph, sj.p) * g_ * dz;
    const double dpsi_dpK = -1.0 + 0.5 * phaseDensityDeriv(ph, sk.p) * g_ * dz;
    if (sj.pDof >= 0) dF.emplace_back(sj.pDof, lam * T * dpsi_dpJ);
    if (sk.pDof >= 0) dF.emplace_back(sk.pDof, lam * T * dpsi_dpK);
    if (up == 0) {
      if (sj.pDof >= 0)
        dF.emplace_back(sj.pDof, relPerm(phase, sj.s) *
                                     phaseDensityDeriv(ph, sj.p) / ph.mu * T *
                                     dpsi);
      if (sj.sDof >= 0)
        dF.emplace_back(sj.sDof,
                        relPermDeriv(phase, sj.s) * rhoJ / ph.mu * T * dpsi);
    } else if (up == 1) {
      if (sk.pDof >= 0)
        dF.emplace_back(sk.pDof, relPerm(phase, sk.s) *
                                     phaseDensityDeriv(ph, sk.p) / ph.mu * T *
                                     dpsi);
      if (sk.sDof >= 0)
        dF.emplace_back(sk.sDof,
                        relPermDeriv(phase, sk.s) * rhoK / ph.mu * T * dpsi);
    }
    for (const auto& [col, dTv] : dT) dF.emplace_back(col, lam * dpsi * dTv);
    for (const auto& [col, v] : dF) {
      if (rowJ >= 0) J->emplace_back(rowJ, col, v);
      if (rowK >= 0) J->emplace_back(rowK, col, -v);
    }
  };

  // Accumulation, matrix cells.
  const double V = mesh_->cellArea();
  for (int c = 0; c < mesh_->cellCount(); ++c) {
    const double pmv = x[dofs_->pmDof(c)];
    const double s = saturation(x, c);
    const double phi = porosity(x, h, c);
    const auto nodes = mesh_->cellNodes(c);
    for (int phase = 0; phase < np; ++phase) {
      const PhaseProps& ph = phases_[phase];
      const double sp = phase == 0 ? s : 1.0 - s;
      const double rho = phaseDensity(ph, pmv);
      const int row = dofs_->massRowCell(c, phase);
      r[row] += V * (phi * sp * rho - h.mOldCell(c, phase)) / dt;
      if (!J) continue;
      J->emplace_back(row, dofs_->pmDof(c),
                      V / dt * sp *
                          (invN * rho + phi * phaseDensityDeriv(ph, pmv)));
      if (!opt.singlePhase)
        J->emplace_back(row, dofs_->smDof(c),
                        V / dt * phi * rho * (phase == 0 ? 1.0 : -1.0));
      const double byPhi = V / dt * sp * rho * biot;
      for (int a = 0; a < 4; ++a)
        for (int d = 0; d < 2; ++d)
          J->emplace_back(row, dofs_->uDof(nodes[a], d),
                          byPhi * mech_->divRowU(c)[2 * a + d]);
      for (int k : cut_->cellCuts[c]) {
        const auto& wd = dofs_->wDofs(k);
        for (size_t b = 0; b < wd.size(); ++b)
          J->emplace_back(row, wd[b], byPhi * mech_->divRowW(k)[b]);
      }
    }
  }

  // Accumulation, fracture segments.
  for (int sg = 0; sg < static_cast<int>(cut_->segments.size()); ++sg) {
    const FractureSegment& fs = cut_->segments[sg];
    const double pfv = x[dofs_->pfDof(sg)];
    const double s = saturationSeg(x, sg);
    const double wn = mech_->aperture(x, sg);
    const double wh = hydraulicAperture(wn, segW0_[sg]);
    const double dwh = hydraulicApertureDeriv(wn);
    const auto& wd = dofs_->wDofs(fs.cut);
    for (int phase = 0; phase < np; ++phase) {
      const PhaseProps& ph = phases_[phase];
      const double sp = phase == 0 ? s : 1.0 - s;
      const double rho = phaseDensity(ph, pfv);
      const int row = dofs_->massRowSeg(sg, phase);
      r[row] += fs.length * (wh * sp * rho - h.mOldSeg(sg, phase)) / dt;
      if (!J) continue;
      J->emplace_back(row, dofs_->pfDof(sg),
                      fs.length / dt * wh * sp * phaseDensityDeriv(ph, pfv));
      if (!opt.singlePhase)
        J->emplace_back(row, dofs_->sfDof(sg),
                        fs.length / dt * wh * rho * (phase == 0 ? 1.0 : -1.0));
      for (size_t b = 0; b < wd.size(); ++b)
        J->emplace_back(row, wd[b],
                        fs.length / dt * dwh * mech_->apertureRow(sg)[b] * sp *
                            rho);
    }
  }

  // Cell-cell fluxes.
  for (const auto& mm : conn_->mm) {
    const FlowSide sj = sideCell(mm.J);
    const FlowSide sk = sideCell(mm.K);
    for (int phase = 0; phase < np; ++phase)
      addFlux(dofs_->massRowCell(mm.J, phase), dofs_->massRowCell(mm.K, phase),
              mm.T, phase, sj, sk, {});
  }

  // Cell-segment exchange; the fracture-side permeability follows the cubic
  // law in the current hydraulic aperture.
  for (const auto& mf : conn_->mf) {
    const FlowSide sj = sideCell(mf.cell);
    const FlowSide sk = sideSeg(mf.seg);
    const double wn = mech_->aperture(x, mf.seg);
    const double wh = hydraulicAperture(wn, segW0_[mf.seg]);
    const double kf = fracturePermeability(wh);
    const double T = mf.A * mf.kapN * kf / (mf.kapN + kf);
    std::vector<std::pair<int, double>> dT;
    if (J) {
      const double dT_dkf =
          mf.A * mf.kapN * mf.kapN / ((mf.kapN + kf) * (mf.kapN + kf));
      const double c =
          dT_dkf * (wh / 6.0) * hydraulicApertureDeriv(wn);
      const auto& wd = dofs_->wDofs(cut_->segments[mf.seg].cut);
      for (size_t b = 0; b < wd.size(); ++b)
        dT.emplace_back(wd[b], c * mech_->apertureRow(mf.seg)[b]);
    }
    for (int phase = 0; phase < np; ++phase)
      addFlux(dofs_->massRowCell(mf.cell, phase),
              dofs_->massRowSeg(mf.seg, phase), T, phase, sj, sk, dT);
  }

  // Segment-segment fluxes through shared endpoints.
  for (const auto& ff : conn_->ff) {
    const FlowSide sj = sideSeg(ff.a);
    const FlowSide sk = sideSeg(ff.b);
    const double wna = mech_->aperture(x, ff.a);
    const double wnb = mech_->aperture(x, ff.b);
    const double wha = hydraulicAperture(wna, segW0_[ff.a]);
    const double whb = hydraulicAperture(wnb, segW0_[ff.b]);
    const double ka = fracturePermeability(wha);
    const double kb = fracturePermeability(whb);
    const double ac = 0.5 * (wha + whb);
    const double D = ka * ff.db + kb * ff.da;
    const double T = ac * ka * kb / D;
    std::vector<std::pair<int, double>> dT;
    if (J) {
      const double dT_dka = ac * kb * kb * ff.da / (D * D);
      const double dT_dkb = ac * ka * ka * ff.db / (D * D);
      const double dT_dac = ka * kb / D;
      const double ca =
          (dT_dka * wha / 6.0 + 0.5 * dT_dac) * hydraulicApertureDeriv(wna);
      const double cb =
          (dT_dkb * whb / 6.0 + 0.5 * dT_dac) * hydraulicApertureDeriv(wnb);
      const auto& wda = dofs_->wDofs(cut_->segments[ff.a].cut);
      for (size_t b = 0; b < wda.size(); ++b)
        dT.emplace_back(wda[b], ca * mech_->apertureRow(ff.a)[b]);
      const auto& wdb = dofs_->wDofs(cut_->segments[ff.b].cut);
      for (size_t b = 0; b < wdb.size(); ++b)
        dT.emplace_back(wdb[b], cb * mech_->apertureRow(ff.b)[b]);
    }
    for (int phase = 0; phase < np; ++phase)
      addFlux(dofs_->massRowSeg(ff.a, phase), dofs_->massRowSeg(ff.b, phase),
              T, phase, sj, sk, dT);
  }

  // Boundary conditions.
  for (const auto& em : conn_->em) {
    const FlowBC& bcf = bc_[static_cast<int>(em.side)];
    if (bcf.kind == FlowBC::Kind::NoFlow) continue;
    if (bcf.kind == FlowBC::Kind::Pressure) {
      const FlowSide sj = sideCell(em.cell);
      FlowSide sk;
      sk.p = bcf.p;
      sk.s = bcf.s;
      sk.z = em.center.y();
      for (int phase = 0; phase < np; ++phase)
        addFlux(dofs_->massRowCell(em.cell, phase), -1, em.Thalf, phase, sj,
                sk, {});
    } else {
      const int pd = dofs_->pmDof(em.cell);
      const double rho = phaseDensity(phases_[0], x[pd]);
      const int row = dofs_->massRowCell(em.cell, 0);
      r[row] -= bcf.q * em.area * rho;
      if (J)
        J->emplace_back(row, pd,
                        -bcf.q * em.area * phaseDensityDeriv(phases_[0], x[pd]));
    }
  }

  // Wells.
  for (size_t w = 0; w < wells_.size(); ++w) {
    const Well& well = wells_[w];
    for (size_t ip = 0; ip < well.perfs.size(); ++ip) {
      const Perforation& perf = well.perfs[ip];
      const bool frac = perf.seg >= 0;
      const int pd = frac ? dofs_->pfDof(perf.seg) : dofs_->pmDof(perf.cell);
      const double p = x[pd];
      const double dp = p - well.bhp;
      const double s =
          frac ? saturationSeg(x, perf.seg) : saturation(x, perf.cell);
      double wi = perfConst_[w][ip].wi;
      double wn = 0.0, wh = 0.0;
      const std::vector<int>* wd = nullptr;
      if (frac) {
        wn = mech_->aperture(x, perf.seg);
        wh = hydraulicAperture(wn, segW0_[perf.seg]);
        wi = 2.0 * kPi * fracturePermeability(wh) /
             std::log(perfConst_[w][ip].ro / well.rw);
        wd = &dofs_->wDofs(cut_->segments[perf.seg].cut);
      }
      if (dp > 0.0) {
        // Producing: each phase leaves with the perforated volume's mobility.
        for (int phase = 0; phase < np; ++phase) {
          const PhaseProps& ph = phases_[phase];
          const double rho = phaseDensity(ph, p);
          const double lam = relPerm(phase, s) * rho / ph.mu;
          const int row = frac ? dofs_->massRowSeg(perf.seg, phase)
                               : dofs_->massRowCell(perf.cell, phase);
          r[row] += wi * lam * dp;
          if (!J) continue;
          J->emplace_back(row, pd,
                          wi * (lam + relPerm(phase, s) *
                                          phaseDensityDeriv(ph, p) / ph.mu *
                                          dp));
          const int sd = frac ? (opt.singlePhase ? -1 : dofs_->sfDof(perf.seg))
                              : (opt.singlePhase ? -1 : dofs_->smDof(perf.cell));
          if (sd >= 0)
            J->emplace_back(row, sd,
                            wi * relPermDeriv(phase, s) * rho / ph.mu * dp);
          if (frac) {
            const double dwi = 2.0 * kPi * (wh / 6.0) *
                               hydraulicApertureDeriv(wn) /
                               std::log(perfConst_[w][ip].ro / well.rw);
            for (size_t b = 0; b < wd->size(); ++b)
              J->emplace_back(row, (*wd)[b],
                              dwi * mech_->apertureRow(perf.seg)[b] * lam * dp);
          }
        }
      } else {
        // Injecting: wetting fluid at full mobility.
        const PhaseProps& ph = phases_[0];
        const double rho = phaseDensity(ph, p);
        const double lam = relPerm(0, 1.0) * rho / ph.mu;
        const int row = frac ? dofs_->massRowSeg(perf.seg, 0)
                             : dofs_->massRowCell(perf.cell, 0);
        r[row] += wi * lam * dp;
        if (!J) continue;
        J->emplace_back(
            row, pd,
            wi * (lam + relPerm(0, 1.0) * phaseDensityDeriv(ph, p) / ph.mu *
                            dp));
        if (frac) {
          const double dwi = 2.0 * kPi * (wh / 6.0) *
                             hydraulicApertureDeriv(wn) /
                             std::log(perfConst_[w][ip].ro / well.rw);
          for (size_t b = 0; b < wd->size(); ++b)
            J->emplace_back(row, (*wd)[b],
                            dwi * mech_->apertureRow(perf.seg)[b] * lam * dp);
        }
      }
    }
  }
}

double FlowAssembler::emMassFlux(const VecX& x, const ConnectivitySets::EM& em,
                                 int phase) const {
  const FlowBC& bcf = bc_[static_cast<int>(em.side)];
  if (bcf.kind == FlowBC::Kind::NoFlow) return 0.0;
  if (bcf.kind == FlowBC::Kind::Influx) {
    if (phase != 0) return 0.0;
    return -bcf.q * em.area * phaseDensity(phases_[0], x[dofs_->pmDof(em.cell)]);
  }
  const PhaseProps& ph = phases_[phase];
  const double pJ = x[dofs_->pmDof(em.cell)];
  const double rhoJ = phaseDensity(ph, pJ);
  const double rhoK = phaseDensity(ph, bcf.p);
  const double dz = mesh_->cellCenter(em.cell).y() - em.center.y();
  const double dpsi = pJ - bcf.p + 0.5 * (rhoJ + rhoK) * g_ * dz;
  const double sJ = saturation(x, em.cell);
  const double lamJ = relPerm(phase, sJ) * rhoJ / ph.mu;
  const double lamK = relPerm(phase, bcf.s) * rhoK / ph.mu;
  const double lam = dpsi > 0.0 ? lamJ : (dpsi < 0.0 ? lamK : 0.0);
  return lam * em.Thalf * dpsi;
}

double FlowAssembler::perfMassRate(const VecX& x, int w, int ip,
                                   int phase) const {
  const Well& well = wells_[w];
  const Perforation& perf = well.perfs[ip];
  const bool frac = perf.seg >= 0;
  const double p =
      frac ? x[dofs_->pfDof(perf.seg)] : x[dofs_->pmDof(perf.cell)];
  const double dp = p - well.bhp;
  double wi = perfConst_[w][ip].wi;
  if (frac) {
    const double wh =
        hydraulicAperture(mech_->aperture(x, perf.seg), segW0_[perf.seg]);
    wi = 2.0 * kPi * fracturePermeability(wh) /
         std::log(perfConst_[w][ip].ro / well.rw);
  }
  if (dp > 0.0) {
    const double s =
        frac ? saturationSeg(x, perf.seg) : saturation(x, perf.cell);
    return wi * relPerm(phase, s) * phaseDensity(phases_[phase], p) /
           phases_[phase].mu * dp;
  }
  if (phase != 0) return 0.0;
  return wi * relPerm(0, 1.0) * phaseDensity(phases_[0], p) / phases_[0].mu *
         dp;
}

StepBalance FlowAssembler::balance(const VecX& x,
                                    const History& h) const {
  StepBalance b;
  const int np = phases();
  const double V = mesh_->cellArea();
  for (int phase = 0; phase < np; ++phase) {
    for (int c = 0; c < mesh_->cellCount(); ++c) {
      const double m = massCell(x, h, c, phase);
      b.dMass[phase] += V * (m - h.mOldCell(c, phase));
      b.inPlace[phase] += V * m;
    }
    for (int sg = 0; sg < static_cast<int>(cut_->segments.size()); ++sg) {
      const double m = massSeg(x, sg, phase);
      b.dMass[phase] += cut_->segments[sg].length * (m - h.mOldSeg(sg, phase));
      b.inPlace[phase] += cut_->segments[sg].length * m;
    }
    for (const auto& em : conn_->em) {
      const double F = emMassFlux(x, em, phase);
      b.boundary[phase] -= F;
      b.throughput[phase] += std::abs(F);
    }
    for (size_t w = 0; w < wells_.size(); ++w)
      for (size_t ip = 0; ip < wells_[w].perfs.size(); ++ip) {
        const double q = perfMassRate(x, static_cast<int>(w),
                                      static_cast<int>(ip), phase);
        b.wells[phase] += q;
        b.throughput[phase] += std::abs(q);
      }
  }
  return b;
}

std::vector<std::array<double, 2>> FlowAssembler::wellRates(
    const VecX& x) const {
  std::vector<std::array<double, 2>> rates(wells_.size(), {0.0, 0.0});
  const int np = phases();
  for (size_t w = 0; w < wells_.size(); ++w)
    for (size_t ip = 0; ip < wells_[w].perfs.size(); ++ip)
      for (int phase = 0; phase < np; ++phase)
        rates[w][phase] +=
            perfMassRate(x, static_cast<int>(w), static_cast<int>(ip), phase);
  return rates;
}

double FlowAssembler::boundaryMassRate(const VecX& x, Side side,
                                       int phase) const {
  double out = 0.0;
  for (const auto& em : conn_->em)
    if (em.side == side) out += emMassFlux(x, em, phase);
  return out;
}

}  // namespace efrac
