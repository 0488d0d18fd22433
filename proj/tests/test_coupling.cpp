/**
 * @file test_coupling.cpp
 * @brief Tests of the coupled system: unknown layout, the full analytic
 *        Jacobian against finite differences, the equilibrated direct solve,
 *        Newton behavior, and the assembled block sparsity pattern.
 */
#include <gtest/gtest.h>

#include <cmath>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Sparse>

#include "efrac/Config.hpp"
#include "efrac/Coupling.hpp"
#include "efrac/Errors.hpp"

namespace efrac {
namespace {

/// Coupled two-phase 2x2 configuration with one oblique fracture.
CaseConfig coupledConfig(Scheme scheme) {
  CaseConfig cfg;
  cfg.lx = cfg.ly = 2.0;
  cfg.nx = cfg.ny = 2;
  cfg.material.Kdr = 1e10;
  cfg.material.nu = 0.25;
  cfg.material.biot = 0.8;
  cfg.material.phi0 = 0.2;
  cfg.material.rhoS = 2650.0;
  cfg.material.friction = 0.5;
  cfg.material.sigma0 = Vec3(-3e6, -5e6, 0.5e6);
  cfg.material.kx.assign(4, 1e-13);
  cfg.material.ky.assign(4, 2e-13);
  cfg.fluid[0] = {1000.0, 1e5, 2e9, 1e-3};
  cfg.fluid[1] = {800.0, 1e5, 1e9, 5e-3};
  cfg.p0 = 1e5;
  cfg.s0 = 0.5;
  cfg.scheme.scheme = scheme;
  // Slope 3/4 keeps the chord off every node of the 1 m grid.
  cfg.fractures = {{{Vec2(0.0, 0.3), Vec2(2.0, 1.8)}, 1e-4}};
  cfg.mechBC[2].ux = 0.0;
  cfg.mechBC[2].uy = 0.0;
  cfg.mechBC[3].traction = Vec2(0.0, -5e6);
  return cfg;
}

std::vector<std::optional<ContactMode>> noForcing(const Model& m) {
  return std::vector<std::optional<ContactMode>>(
      m.mechanics().contactPoints());
}

// ---------------------------------------------------------------------------
// Unknown layout.

TEST(DofLayout, NoFractureLeavesEnrichmentBlocksEmpty) {
  CaseConfig cfg = coupledConfig(Scheme::EFEM0);
  cfg.fractures.clear();
  const Model model(cfg);
  const DofMap& d = model.dofs();
  EXPECT_EQ(d.nU(), 2 * model.mesh().nodeCount());
  EXPECT_EQ(d.nW(), 0);
  EXPECT_EQ(d.nPf(), 0);
  EXPECT_EQ(d.nSf(), 0);
  EXPECT_EQ(d.nPm(), 4);
  EXPECT_EQ(d.nSm(), 4);
  EXPECT_EQ(d.total(), d.nU() + d.nPm() + d.nSm());
}

TEST(DofLayout, RangesAreDisjointAndExhaustive) {
  for (Scheme scheme : {Scheme::EFEM0, Scheme::EFEM1, Scheme::XFEM}) {
    const Model model(coupledConfig(scheme));
    const DofMap& d = model.dofs();
    const int counts[6] = {d.nU(), d.nW(), d.nPm(), d.nPf(), d.nSm(), d.nSf()};
    int total = 0;
    for (int c : counts) total += c;
    EXPECT_EQ(total, d.total()) << schemeName(scheme);
    std::vector<int> seen(6, 0);
    for (int dof = 0; dof < d.total(); ++dof)
      ++seen[static_cast<int>(d.blockOf(dof))];
    for (int b = 0; b < 6; ++b)
      EXPECT_EQ(seen[b], counts[b]) << schemeName(scheme) << " block " << b;
  }
}

TEST(DofLayout, ElementSchemesOwnPrivateModesNodalSchemeShares) {
  // The fracture crosses several cells; element-local cuts never share
  // enrichment dofs, while adjacent nodal-scheme cuts share the pair of
  // their common enriched nodes.
  const Model efem(coupledConfig(Scheme::EFEM0));
  std::set<int> seen;
  for (size_t c = 0; c < efem.cutMap().cuts.size(); ++c)
    for (int dof : efem.dofs().wDofs(static_cast<int>(c)))
      EXPECT_TRUE(seen.insert(dof).second) << "shared efem dof " << dof;

  const Model xfem(coupledConfig(Scheme::XFEM));
  ASSERT_GE(xfem.cutMap().cuts.size(), 2u);
  const auto& w0 = xfem.dofs().wDofs(0);
  const auto& w1 = xfem.dofs().wDofs(1);
  int shared = 0;
  for (int dof : w0)
    shared += std::count(w1.begin(), w1.end(), dof);
  EXPECT_GT(shared, 0);
}

// ---------------------------------------------------------------------------
// Full-system Jacobian.

TEST(CoupledJacobian, MatchesFiniteDifferencesOnRandomizedState) {
  for (Scheme scheme : {Scheme::EFEM0, Scheme::EFEM1, Scheme::XFEM}) {
    CaseConfig cfg = coupledConfig(scheme);
    cfg.gravity = 9.81;
    WellConfig prod;
    prod.name = "prod";
    prod.bhp = 8e4;
    prod.perfs.push_back({Vec2(1.5, 0.5), -1, -1});
    cfg.wells = {prod};
    const Model model(cfg);
    const DofMap& dofs = model.dofs();
    const History h = model.initialHistory();

    // Randomize around the initial state, keeping saturations interior,
    // pressure gaps far above the FD step (no upwind flips), and jumps far
    // above the w step (no aperture kink crossings).
    VecX x = model.initialState();
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int d = 0; d < dofs.total(); ++d) {
      if (dofs.isFixed(d)) continue;
      switch (dofs.blockOf(d)) {
        case Block::U: x[d] += 1e-5 * U(rng); break;
        case Block::W: x[d] += 2e-4 * U(rng); break;
        case Block::Pm:
        case Block::Pf: x[d] += 5e3 * U(rng); break;
        default: x[d] += 0.1 * U(rng); break;
      }
    }

    const double dt = 1.0;
    VecX r0;
    SpMat J;
    std::vector<ContactMode> modes;
    model.assembleSystem(x, h, dt, noForcing(model), r0, &J, &modes);
    std::vector<std::optional<ContactMode>> forced(modes.begin(), modes.end());

    for (int col = 0; col < dofs.total(); ++col) {
      if (dofs.isFixed(col)) continue;
      const double d = 1e-6 * (1.0 + std::abs(x[col]));
      VecX xp = x, xm = x;
      xp[col] += d;
      xm[col] -= d;
      VecX rp, rm;
      model.assembleSystem(xp, h, dt, forced, rp, nullptr, nullptr);
      model.assembleSystem(xm, h, dt, forced, rm, nullptr, nullptr);
      const VecX fd = (rp - rm) / (2.0 * d);
      const VecX Jcol = J.col(col);
      const double scale =
          std::max(Jcol.lpNorm<Eigen::Infinity>(), fd.lpNorm<Eigen::Infinity>());
      EXPECT_LT((fd - Jcol).lpNorm<Eigen::Infinity>(),
                1e-6 * std::max(scale, 1e-12))
          << schemeName(scheme) << " column " << col;
    }
  }
}

TEST(CoupledJacobian, BlockPatternHasNoSpuriousCouplings) {
  // With gravity off, momentum rows never touch saturations or fracture
  // pressures directly, enriched rows never touch saturations, and fracture
  // mass rows never touch displacements (apertures are jump functions).
  for (Scheme scheme : {Scheme::EFEM0, Scheme::EFEM1, Scheme::XFEM}) {
    const Model model(coupledConfig(scheme));
    const DofMap& dofs = model.dofs();
    const History h = model.initialHistory();
    VecX x = model.initialState();
    x[dofs.pmDof(0)] += 2e4;  // break ties so upwind columns appear
    VecX r;
    SpMat J;
    model.assembleSystem(x, h, 1.0, noForcing(model), r, &J, nullptr, true);
    for (int k = 0; k < J.outerSize(); ++k)
      for (SpMat::InnerIterator it(J, k); it; ++it) {
        if (it.value() == 0.0) continue;
        const Block row = dofs.blockOf(static_cast<int>(it.row()));
        const Block col = dofs.blockOf(static_cast<int>(it.col()));
        const bool forbidden =
            (row == Block::U &&
             (col == Block::Sm || col == Block::Sf || col == Block::Pf)) ||
            (row == Block::W && (col == Block::Sm || col == Block::Sf)) ||
            ((row == Block::Pf || row == Block::Sf) && col == Block::U);
        EXPECT_FALSE(forbidden)
            << schemeName(scheme) << " row " << it.row() << " ("
            << static_cast<int>(row) << ") col " << it.col() << " ("
            << static_cast<int>(col) << ")";
      }
  }
}

// ---------------------------------------------------------------------------
// Linear solve.

TEST(LinearSolve, IdentityAndKnownSolution) {
  const Model model(coupledConfig(Scheme::EFEM0));

  SpMat I(5, 5);
  I.setIdentity();
  VecX b(5);
  b << 1.0, -2.0, 3.0, -4.0, 5.0;
  EXPECT_NEAR((model.solveLinear(I, b) - b).lpNorm<Eigen::Infinity>(), 0.0,
              1e-14);

  // 1D Laplacian with a badly scaled row block, solved against a
  // manufactured solution.
  const int n = 40;
  std::vector<Triplet> trip;
  for (int i = 0; i < n; ++i) {
    const double scale = i < n / 2 ? 1.0 : 1e8;
    trip.emplace_back(i, i, 2.0 * scale);
    if (i > 0) trip.emplace_back(i, i - 1, -1.0 * scale);
    if (i + 1 < n) trip.emplace_back(i, i + 1, -1.0 * scale);
  }
  SpMat A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  VecX xKnown(n);
  for (int i = 0; i < n; ++i) xKnown[i] = std::sin(0.3 * i) + 0.1 * i;
  const VecX rhs = A * xKnown;
  const VecX xSolved = model.solveLinear(A, rhs);
  EXPECT_LT((xSolved - xKnown).lpNorm<Eigen::Infinity>(),
            1e-8 * xKnown.lpNorm<Eigen::Infinity>());
}

TEST(LinearSolve, SingularMatrixIsReported) {
  const Model model(coupledConfig(Scheme::EFEM0));
  std::vector<Triplet> trip{{0, 0, 1.0}, {1, 1, 1.0}};
  SpMat A(3, 3);  // empty third row/column
  A.setFromTriplets(trip.begin(), trip.end());
  VecX b = VecX::Ones(3);
  EXPECT_THROW(model.solveLinear(A, b), SolverError);
}

// ---------------------------------------------------------------------------
// Newton solve.

TEST(Newton, LinearElasticityConvergesInOneIteration) {
  CaseConfig cfg = coupledConfig(Scheme::EFEM0);
  cfg.fractures.clear();
  cfg.mechanicsOnly = true;
  cfg.singlePhase = true;
  const Model model(cfg);
  VecX x = model.initialState();
  const NewtonReport rep = model.newtonSolve(x, model.initialHistory(), 1.0);
  EXPECT_TRUE(rep.converged);
  EXPECT_EQ(rep.iters, 1);
  EXPECT_EQ(rep.iterations[0].gamma, 1.0);
}

TEST(Newton, PositiveTimeStepRequired) {
  const Model model(coupledConfig(Scheme::EFEM0));
  VecX r;
  const VecX x = model.initialState();
  const History h = model.initialHistory();
  EXPECT_THROW(
      model.assembleSystem(x, h, 0.0, noForcing(model), r, nullptr, nullptr),
      SolverError);
}

TEST(Newton, ResidualOrderAtLeastSuperlinear) {
  // Smooth two-phase drive: pressurized fracture well, no contact mode
  // switching after the first iteration. The estimated convergence order
  // over the final iterations must reach the quadratic regime.
  CaseConfig cfg = coupledConfig(Scheme::EFEM0);
  cfg.gravity = 9.81;
  WellConfig inj;
  inj.name = "inj";
  inj.bhp = 3e6;
  inj.perfs.push_back({std::nullopt, 0, 0});
  cfg.wells = {inj};
  cfg.time.newtonTol = 1e-12;
  const Model model(cfg);
  VecX x = model.initialState();
  const NewtonReport rep = model.newtonSolve(x, model.initialHistory(), 10.0);
  ASSERT_TRUE(rep.converged);
  ASSERT_GE(rep.iterations.size(), 3u);
  std::vector<double> norms;
  for (const auto& it : rep.iterations)
    norms.push_back(
        std::max(std::max(it.normU, it.normW), std::max(it.normM, it.normF)));
  norms.push_back(rep.resFinal);
  const size_t k = norms.size() - 1;
  const double q = std::log(norms[k] / norms[k - 1]) /
                   std::log(norms[k - 1] / norms[k - 2]);
  EXPECT_GE(q, 1.8) << "norms tail: " << norms[k - 2] << " " << norms[k - 1]
                    << " " << norms[k];
}

TEST(Newton, FailedStepLeavesHistoryIntact) {
  CaseConfig cfg = coupledConfig(Scheme::EFEM0);
  WellConfig inj;
  inj.name = "inj";
  inj.bhp = 5e7;
  inj.perfs.push_back({std::nullopt, 0, 0});
  cfg.wells = {inj};
  cfg.time.newtonMax = 1;
  const Model model(cfg);
  VecX x = model.initialState();
  const History h = model.initialHistory();
  const History snapshot = h;
  const StepRecord rec = model.step(x, h, 1e9);
  EXPECT_FALSE(rec.converged);
  EXPECT_EQ((h.xOld - snapshot.xOld).lpNorm<Eigen::Infinity>(), 0.0);
  EXPECT_EQ(h.phiOld, snapshot.phiOld);
  EXPECT_EQ(h.divuOld, snapshot.divuOld);
  EXPECT_EQ((h.mOldCell - snapshot.mOldCell).lpNorm<Eigen::Infinity>(), 0.0);
  EXPECT_EQ((h.mOldSeg - snapshot.mOldSeg).lpNorm<Eigen::Infinity>(), 0.0);
  EXPECT_EQ(h.slip, snapshot.slip);
  // A clean solve from the untouched history still converges once the
  // iteration budget is restored.
  cfg.time.newtonMax = 25;
  const Model fresh(cfg);
  VecX x2 = fresh.initialState();
  EXPECT_TRUE(fresh.newtonSolve(x2, fresh.initialHistory(), 1.0).converged);
}

TEST(Newton, RepeatedSolvesAreBitIdentical) {
  CaseConfig cfg = coupledConfig(Scheme::XFEM);
  cfg.gravity = 9.81;
  const Model model(cfg);
  const History h = model.initialHistory();
  VecX xa = model.initialState();
  VecX xb = model.initialState();
  ASSERT_TRUE(model.newtonSolve(xa, h, 5.0).converged);
  ASSERT_TRUE(model.newtonSolve(xb, h, 5.0).converged);
  EXPECT_EQ((xa - xb).lpNorm<Eigen::Infinity>(), 0.0);
}

}  // namespace
}  // namespace efrac
