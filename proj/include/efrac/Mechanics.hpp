/**
 * @file Mechanics.hpp
 * @brief Quasi-static momentum balance on the enriched Q1 mesh plus the
 *        fracture traction balance, with the analytic tangent blocks against
 *        displacements, jump modes, pressures, and saturations.
 */
#ifndef EFRAC_MECHANICS_HPP
#define EFRAC_MECHANICS_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "efrac/Connectivity.hpp"
#include "efrac/Constitutive.hpp"
#include "efrac/Contact.hpp"
#include "efrac/DofMap.hpp"
#include "efrac/Enrichment.hpp"

namespace efrac {

struct MaterialField {
  double Kdr = 1e9;  ///< drained bulk modulus [Pa]
  double nu = 0.25;
  double biot = 1.0;
  double phi0 = 0.0;
  double rhoS = 2650.0;
  double friction = 0.0;
  Vec3 sigma0{0.0, 0.0, 0.0};  ///< initial effective stress (Voigt)
  std::vector<double> kx, ky;  ///< per-cell permeability [m^2]

  double E() const { return 3.0 * Kdr * (1.0 - 2.0 * nu); }
  /// Plane-strain stiffness in Voigt form (engineering shear).
  Mat3 elasticity() const;
  /// Biot-modulus inverse of the porosity update, (b - phi0)(1 - b)/Kdr.
  double invN() const;
};

struct SchemeParams {
  Scheme scheme = Scheme::EFEM0;
  double stabilization = 1e-4;  ///< modes 3-4 penalty factor (x E), 0 = off
  double penaltyKappa = 1e3;    ///< kn = penaltyKappa * E / h
  double tangentRatio = 0.1;    ///< kt = tangentRatio * kn
};

/// Mechanical boundary condition of one side: fixed components and/or an
/// applied traction on the free ones.
struct MechBC {
  std::optional<double> ux, uy;
  Vec2 traction{0.0, 0.0};
};

/// Previous-step quantities the backward Euler residual needs.
struct History {
  VecX xOld;
  std::vector<double> phiOld;   ///< per cell
  std::vector<double> divuOld;  ///< per cell
  MatX mOldCell, mOldSeg;       ///< mass per bulk volume, entity x phase
  std::vector<double> slip;     ///< plastic slip per contact point
  double t = 0.0;
};

class MechanicsAssembler {
 public:
  MechanicsAssembler(const Mesh& mesh, const CutCellMap& cut,
                     const DofMap& dofs, const MaterialField& mat,
                     const SchemeParams& scheme,
                     const std::array<MechBC, 4>& bc, double gravity,
                     std::vector<PhaseProps> phases, double pmConst,
                     double pfConst, double sConst);

  /// Adds the momentum and traction-balance residuals (and tangents) at
  /// state x. `forced` pins contact branches; `modes` receives the branch
  /// used at every contact point. Element work may be split over `threads`
  /// contiguous chunks; contributions merge in element order, so results
  /// are bitwise independent of the thread count.
  void assemble(const VecX& x, const History& h,
                const std::vector<std::optional<ContactMode>>& forced, VecX& r,
                std::vector<Triplet>* J, std::vector<ContactMode>* modes,
                int threads = 1) const;

  int contactPoints() const { return 2 * static_cast<int>(cut_->cuts.size()); }
  const ContactParams& contactParams(int cutId) const {
    return contact_[cutId];
  }
  const CutModes& cutModes(int cutId) const { return modes_[cutId]; }

  /// Exact mean divergence of the displacement basis over a cell.
  const std::array<double, 8>& divRowU(int cell) const { return divU_[cell]; }
  const std::vector<double>& divRowW(int cutId) const { return divW_[cutId]; }
  /// Mean normal jump over a flow segment per mode of its cut.
  const std::vector<double>& apertureRow(int seg) const { return aper_[seg]; }

  double divU(const VecX& x, int cell) const;
  /// Mean normal jump of a flow segment at state x.
  double aperture(const VecX& x, int seg) const;
  /// Jump (n, m) of a cut at a point on its chord.
  Vec2 jumpAt(const VecX& x, int cutId, const Vec2& p) const;
  /// Jump at a contact quadrature point (two per cut).
  Vec2 contactJump(const VecX& x, int cp) const;
  /// Fluid pressure seen by a chord point: its flow segment's dof, or the
  /// prescribed value when mechanics runs alone.
  double surfacePressure(const VecX& x, int cutId, const Vec2& p) const;

  double pm(const VecX& x, int cell) const;
  double sm(const VecX& x, int cell) const;
  /// Mixture density of a cell at current porosity.
  double mixtureDensity(const VecX& x, const History& h, int cell) const;

 private:
  struct ElementWork;
  void assembleCell(int cell, const VecX& x, const History& h,
                    const std::vector<std::optional<ContactMode>>& forced,
                    ElementWork& out) const;

  const Mesh* mesh_;
  const CutCellMap* cut_;
  const DofMap* dofs_;
  MaterialField mat_;
  SchemeParams scheme_;
  std::array<MechBC, 4> bc_;
  double g_;
  std::vector<PhaseProps> phases_;
  double pmConst_, pfConst_, sConst_;
  Mat3 C_;
  std::vector<CutModes> modes_;
  std::vector<ContactParams> contact_;
  std::vector<std::array<double, 8>> divU_;
  std::vector<std::vector<double>> divW_;
  std::vector<std::vector<double>> aper_;
  std::vector<int> segOfQp_;  // flow segment owning each chord point
};

}  // namespace efrac

#endif
