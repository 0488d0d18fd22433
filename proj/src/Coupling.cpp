/**
 * @file Coupling.cpp
 * @brief Model wiring, Dirichlet handling, and the monolithic Newton solve.
 */
#include "efrac/Coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseLU>

#include "efrac/Errors.hpp"
#include "efrac/Oracle.hpp"

namespace efrac {

namespace {
constexpr double kLinearTol = 1e-10;
}

Model::Model(const CaseConfig& cfg) : cfg_(cfg) {
  mesh_ = std::make_unique<Mesh>(cfg.lx, cfg.ly, cfg.nx, cfg.ny);
  cut_ = buildCutCellMap(*mesh_, cfg.fractures);
  conn_ = buildConnectivity(*mesh_, cut_, cfg.material.kx, cfg.material.ky);

  DofMapOptions opt;
  opt.scheme = cfg.scheme.scheme;
  opt.mechanicsOnly = cfg.mechanicsOnly;
  opt.singlePhase = cfg.singlePhase;
  dofs_ = std::make_unique<DofMap>(*mesh_, cut_, cfg.fractures, opt);

  for (int si = 0; si < 4; ++si) {
    const MechBC& b = cfg.mechBC[si];
    if (!b.ux && !b.uy) continue;
    for (int n : mesh_->boundaryNodes(static_cast<Side>(si))) {
      if (b.ux) dofs_->fix(dofs_->uDof(n, 0), *b.ux);
      if (b.uy) dofs_->fix(dofs_->uDof(n, 1), *b.uy);
    }
  }
  if (cfg.sneddon) {
    // Pin every boundary node to the infinite-medium crack displacement.
    CrackProblem cp;
    cp.E = cfg.material.E();
    cp.nu = cfg.material.nu;
    cp.pressure = cfg.sneddon->pressure;
    cp.a = cfg.sneddon->halfExtent;
    const CrackDisplacementField field(
        cp, cfg.sneddon->center,
        cfg.sneddon->angleDeg * 3.14159265358979323846 / 180.0,
        cfg.sneddon->elements);
    for (int si = 0; si < 4; ++si)
      for (int n : mesh_->boundaryNodes(static_cast<Side>(si))) {
        const Vec2 u = field.displacement(mesh_->node(n));
        dofs_->fix(dofs_->uDof(n, 0), u.x());
        dofs_->fix(dofs_->uDof(n, 1), u.y());
      }
  }

  std::vector<PhaseProps> phases{cfg.fluid[0], cfg.fluid[1]};
  const double pfConst = cfg.mechanicsOnly ? cfg.fracturePressure : cfg.p0;
  mech_ = std::make_unique<MechanicsAssembler>(
      *mesh_, cut_, *dofs_, cfg.material, cfg.scheme, cfg.mechBC, cfg.gravity,
      phases, cfg.p0, pfConst, cfg.s0);

  if (!cfg.mechanicsOnly) {
    std::vector<Well> wells;
    for (const WellConfig& wc : cfg.wells) {
      Well w;
      w.name = wc.name;
      w.bhp = wc.bhp;
      w.rw = wc.rw;
      for (const WellPerfSpec& ps : wc.perfs) {
        Perforation p;
        if (ps.point) {
          p.cell = mesh_->locate(*ps.point);
        } else {
          if (ps.fracture < 0 ||
              ps.fracture >= static_cast<int>(cut_.fractureSegments.size()))
            throw ConfigError("well '" + wc.name + "': fracture " +
                              std::to_string(ps.fracture) + " does not exist");
          const auto& segs = cut_.fractureSegments[ps.fracture];
          if (ps.segment < 0 || ps.segment >= static_cast<int>(segs.size()))
            throw ConfigError("well '" + wc.name + "': fracture " +
                              std::to_string(ps.fracture) + " has " +
                              std::to_string(segs.size()) +
                              " segments, index " +
                              std::to_string(ps.segment) + " is out of range");
          p.seg = segs[ps.segment];
        }
        w.perfs.push_back(p);
      }
      wells.push_back(std::move(w));
    }
    std::vector<double> segW0(cut_.segments.size());
    for (size_t s = 0; s < cut_.segments.size(); ++s)
      segW0[s] = cfg.fractures[cut_.segments[s].fracture].w0;
    flow_ = std::make_unique<FlowAssembler>(
        *mesh_, cut_, conn_, *dofs_, *mech_, cfg.material, phases,
        cfg.gravity, cfg.flowBC, std::move(wells), std::move(segW0), cfg.s0);
  } else if (!cfg.wells.empty()) {
    throw ConfigError("wells require the flow problem to be enabled");
  }

  scaleU_ = cfg.material.E() * mesh_->h();
  scaleMass_ = cfg.fluid[0].rho0 * std::max(cfg.material.phi0, 0.05) *
               mesh_->cellArea();
}

VecX Model::initialState() const {
  VecX x = VecX::Zero(dofs_->total());
  if (!cfg_.mechanicsOnly) {
    for (int c = 0; c < mesh_->cellCount(); ++c) x[dofs_->pmDof(c)] = cfg_.p0;
    for (size_t s = 0; s < cut_.segments.size(); ++s)
      x[dofs_->pfDof(static_cast<int>(s))] = cfg_.p0;
    if (!cfg_.singlePhase) {
      for (int c = 0; c < mesh_->cellCount(); ++c)
        x[dofs_->smDof(c)] = cfg_.s0;
      for (size_t s = 0; s < cut_.segments.size(); ++s)
        x[dofs_->sfDof(static_cast<int>(s))] = cfg_.s0;
    }
  }
  for (int d : dofs_->fixedDofs()) x[d] = dofs_->fixedValue(d);
  return x;
}

History Model::initialHistory() const {
  History h;
  h.xOld = initialState();
  h.phiOld.assign(mesh_->cellCount(), cfg_.material.phi0);
  h.divuOld.assign(mesh_->cellCount(), 0.0);
  h.mOldCell.resize(mesh_->cellCount(), 2);
  h.mOldSeg.resize(static_cast<int>(cut_.segments.size()), 2);
  for (int p = 0; p < 2; ++p) {
    const double sp = p == 0 ? cfg_.s0 : 1.0 - cfg_.s0;
    const double rho = phaseDensity(cfg_.fluid[p], cfg_.p0);
    for (int c = 0; c < mesh_->cellCount(); ++c)
      h.mOldCell(c, p) = cfg_.material.phi0 * sp * rho;
    for (size_t s = 0; s < cut_.segments.size(); ++s)
      h.mOldSeg(static_cast<int>(s), p) =
          cfg_.fractures[cut_.segments[s].fracture].w0 * sp * rho;
  }
  h.slip.assign(mech_->contactPoints(), 0.0);
  h.t = 0.0;
  return h;
}

void Model::assembleSystem(const VecX& x, const History& h, double dt,
                           const std::vector<std::optional<ContactMode>>& forced,
                           VecX& r, SpMat* Jm,
                           std::vector<ContactMode>* modes, bool raw) const {
  r.setZero(dofs_->total());
  std::vector<Triplet> trip;
  mech_->assemble(x, h, forced, r, Jm ? &trip : nullptr, modes, threads_);
  if (flow_) flow_->assemble(x, h, dt, r, Jm ? &trip : nullptr);
  if (!raw) {
    for (int d : dofs_->fixedDofs()) r[d] = 0.0;
    if (Jm) {
      std::vector<Triplet> kept;
      kept.reserve(trip.size() + dofs_->fixedDofs().size());
      for (const Triplet& t : trip)
        if (!dofs_->isFixed(t.row()) && !dofs_->isFixed(t.col()))
          kept.push_back(t);
      for (int d : dofs_->fixedDofs()) kept.emplace_back(d, d, scaleU_);
      trip.swap(kept);
    }
  }
  if (Jm) {
    Jm->resize(dofs_->total(), dofs_->total());
    Jm->setFromTriplets(trip.begin(), trip.end());
  }
}

VecX Model::solveLinear(const SpMat& A, const VecX& rhs) const {
  const int n = static_cast<int>(A.rows());

  // Coupled rows mix stress-scale and mass-scale entries, so equilibrate
  // rows then columns with powers of two (exact, order-independent) before
  // factoring.  Empty rows surface later as a singular factorization.
  const auto binScale = [](double m) {
    return m > 0.0 ? std::exp2(-std::ilogb(m)) : 1.0;
  };
  VecX rowMax = VecX::Zero(n);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      rowMax[it.row()] = std::max(rowMax[it.row()], std::abs(it.value()));
  VecX dr(n);
  for (int i = 0; i < n; ++i) dr[i] = binScale(rowMax[i]);

  VecX colMax = VecX::Zero(n);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      colMax[it.col()] =
          std::max(colMax[it.col()], std::abs(it.value()) * dr[it.row()]);
  VecX dc(n);
  for (int j = 0; j < n; ++j) dc[j] = binScale(colMax[j]);

  SpMat As = dr.asDiagonal() * A * dc.asDiagonal();
  const VecX bs = dr.asDiagonal() * rhs;

  Eigen::SparseLU<SpMat> lu;
  lu.compute(As);
  if (lu.info() != Eigen::Success)
    throw SolverError("sparse factorization failed: " + lu.lastErrorMessage());
  const VecX y = lu.solve(bs);

  // Normwise backward error of the equilibrated solve.
  double normAs = 0.0;
  VecX rowSum = VecX::Zero(n);
  for (int k = 0; k < As.outerSize(); ++k)
    for (SpMat::InnerIterator it(As, k); it; ++it)
      rowSum[it.row()] += std::abs(it.value());
  normAs = rowSum.maxCoeff();
  const double rn = (As * y - bs).lpNorm<Eigen::Infinity>();
  const double denom =
      normAs * y.lpNorm<Eigen::Infinity>() + bs.lpNorm<Eigen::Infinity>();
  if (!(rn <= kLinearTol * denom + 1e-300))
    throw SolverError("linear solve backward error " +
                      std::to_string(rn / std::max(denom, 1e-300)) +
                      " exceeds tolerance");
  return dc.asDiagonal() * y;
}

double Model::scaledNorm(const VecX& r, double dt,
                         std::array<double, 4>* blocks) const {
  std::array<double, 4> b{0.0, 0.0, 0.0, 0.0};
  const double mScale = scaleMass_ / dt;
  for (int d = 0; d < dofs_->total(); ++d) {
    const double a = std::abs(r[d]);
    switch (dofs_->blockOf(d)) {
      case Block::U: b[0] = std::max(b[0], a / scaleU_); break;
      case Block::W: b[1] = std::max(b[1], a / scaleU_); break;
      case Block::Pm:
      case Block::Sm: b[2] = std::max(b[2], a / mScale); break;
      default: b[3] = std::max(b[3], a / mScale); break;
    }
  }
  if (blocks) *blocks = b;
  return std::max(std::max(b[0], b[1]), std::max(b[2], b[3]));
}

NewtonReport Model::newtonSolve(VecX& x, const History& h, double dt) const {
  const TimeConfig& tc = cfg_.time;
  NewtonReport rep;
  const int ncp = mech_->contactPoints();
  std::vector<std::optional<ContactMode>> forced(ncp);
  std::vector<ContactMode> modes(ncp, ContactMode::Stick);
  std::vector<ContactMode> prev(ncp, ContactMode::Stick);
  std::vector<int> flips(ncp, 0);

  VecX r(dofs_->total());
  SpMat Jm;
  double norm = std::numeric_limits<double>::quiet_NaN();
  for (int it = 0; it <= tc.newtonMax; ++it) {
    assembleSystem(x, h, dt, forced, r, &Jm, &modes);
    std::array<double, 4> blocks;
    norm = scaledNorm(r, dt, &blocks);
    if (it == 0) rep.res0 = norm;
    if (!std::isfinite(norm)) break;
    if (norm < tc.newtonTol) {
      rep.converged = true;
      break;
    }
    if (it == tc.newtonMax) break;

    // Oscillating contact points get their branch pinned.
    if (it > 0)
      for (int cp = 0; cp < ncp; ++cp) {
        if (modes[cp] != prev[cp]) ++flips[cp];
        if (flips[cp] >= 3 && !forced[cp]) forced[cp] = modes[cp];
      }
    prev = modes;

    const VecX dx = solveLinear(Jm, -r);

    IterRecord rec;
    rec.iter = it;
    rec.normU = blocks[0];
    rec.normW = blocks[1];
    rec.normM = blocks[2];
    rec.normF = blocks[3];

    double gamma = 1.0;
    VecX xTrial;
    VecX rT(dofs_->total());
    for (int bt = 0;; ++bt) {
      xTrial = x + gamma * dx;
      int chops = 0;
      if (!cfg_.mechanicsOnly && !cfg_.singlePhase) {
        for (int c = 0; c < mesh_->cellCount(); ++c) {
          double& s = xTrial[dofs_->smDof(c)];
          if (s < 0.0 || s > 1.0) {
            s = std::clamp(s, 0.0, 1.0);
            ++chops;
          }
        }
        for (size_t sg = 0; sg < cut_.segments.size(); ++sg) {
          double& s = xTrial[dofs_->sfDof(static_cast<int>(sg))];
          if (s < 0.0 || s > 1.0) {
            s = std::clamp(s, 0.0, 1.0);
            ++chops;
          }
        }
      }
      rec.satChops = chops;
      assembleSystem(xTrial, h, dt, forced, rT, nullptr, nullptr);
      const double normT = scaledNorm(rT, dt);
      if (std::isfinite(normT) && normT < norm) break;
      if (bt >= tc.backtrackMax) break;
      gamma *= 0.5;
    }
    rec.gamma = gamma;
    x = xTrial;
    rep.iterations.push_back(rec);
    ++rep.iters;
  }
  rep.resFinal = norm;
  return rep;
}

StepRecord Model::step(VecX& x, const History& h, double dt) const {
  StepRecord rec;
  rec.dt = dt;
  rec.newton = newtonSolve(x, h, dt);
  rec.converged = rec.newton.converged;
  rec.iters = rec.newton.iters;
  if (rec.converged && flow_)
    rec.massErr = flow_->balance(x, h).relError(dt);
  return rec;
}

void Model::acceptStep(const VecX& x, History& h, double dt) const {
  const int nc = mesh_->cellCount();
  std::vector<double> phiNew(nc), divuNew(nc);
  for (int c = 0; c < nc; ++c) {
    divuNew[c] = mech_->divU(x, c);
    if (flow_) {
      phiNew[c] = flow_->porosity(x, h, c);
    } else {
      phiNew[c] = porosityUpdate(h.phiOld[c], cfg_.material.biot,
                                 divuNew[c] - h.divuOld[c], 0.0,
                                 cfg_.material.invN());
    }
  }
  MatX mCell = h.mOldCell, mSeg = h.mOldSeg;
  if (flow_) {
    for (int p = 0; p < flow_->phases(); ++p) {
      for (int c = 0; c < nc; ++c) mCell(c, p) = flow_->massCell(x, h, c, p);
      for (size_t s = 0; s < cut_.segments.size(); ++s)
        mSeg(static_cast<int>(s), p) =
            flow_->massSeg(x, static_cast<int>(s), p);
    }
  }
  for (int cp = 0; cp < mech_->contactPoints(); ++cp)
    h.slip[cp] = updateSlip(mech_->contactParams(cp / 2),
                            mech_->contactJump(x, cp), h.slip[cp]);
  h.phiOld = std::move(phiNew);
  h.divuOld = std::move(divuNew);
  h.mOldCell = std::move(mCell);
  h.mOldSeg = std::move(mSeg);
  h.xOld = x;
  h.t += dt;
}

double Model::reactionForce(const VecX& x, const History& h, double dt,
                            Side side, int comp) const {
  VecX r(dofs_->total());
  std::vector<std::optional<ContactMode>> forced(mech_->contactPoints());
  assembleSystem(x, h, dt, forced, r, nullptr, nullptr, true);
  double f = 0.0;
  for (int n : mesh_->boundaryNodes(side)) f += r[dofs_->uDof(n, comp)];
  return f;
}

}  // namespace efrac
