/**
 * @file Flow.hpp
 * @brief Finite-volume two-phase mass balances on matrix cells and fracture
 *        segments: phase-potential upwinded fluxes over the four connection
 *        families, aperture-dependent fracture transmissibilities, Peaceman
 *        wells, and the per-step conservation accounting.
 */
#ifndef EFRAC_FLOW_HPP
#define EFRAC_FLOW_HPP

#include <array>
#include <string>
#include <vector>

#include "efrac/Connectivity.hpp"
#include "efrac/Constitutive.hpp"
#include "efrac/DofMap.hpp"
#include "efrac/Mechanics.hpp"

namespace efrac {

struct FlowBC {
  enum class Kind { NoFlow, Pressure, Influx };
  Kind kind = Kind::NoFlow;
  double p = 0.0;  ///< boundary pressure [Pa]
  double s = 1.0;  ///< wetting saturation carried by inflow
  double q = 0.0;  ///< prescribed inflow velocity of wetting fluid [m/s]
};

/// One well completion: either a matrix cell or a fracture segment.
struct Perforation {
  int cell = -1;
  int seg = -1;
};

/// Bottom-hole-pressure controlled well. Flow direction is decided per
/// perforation: cells above the bhp produce with their own mobilities,
/// cells below it take in wetting fluid.
struct Well {
  std::string name;
  double bhp = 0.0;
  double rw = 0.1;  ///< wellbore radius [m]
  std::vector<Perforation> perfs;
};

/// Equivalent radius of a well cell on an anisotropic Cartesian grid.
double peacemanRadius(double hx, double hy);
/// Productivity index per unit depth, 2 pi sqrt(kx ky) / ln(ro/rw).
double peacemanIndex(double kx, double ky, double ro, double rw);

/// Conservation bookkeeping of one converged step, per phase.
struct StepBalance {
  std::array<double, 2> dMass{};       ///< mass change over the step [kg/m]
  std::array<double, 2> boundary{};    ///< net boundary inflow rate [kg/(m s)]
  std::array<double, 2> wells{};       ///< net well extraction rate [kg/(m s)]
  std::array<double, 2> throughput{};  ///< sum of rate magnitudes [kg/(m s)]
  std::array<double, 2> inPlace{};     ///< current mass in place [kg/m]

  /// max_phase |dMass - dt (boundary - wells)| / max(dt throughput, inPlace).
  double relError(double dt) const;
};

class FlowAssembler {
 public:
  FlowAssembler(const Mesh& mesh, const CutCellMap& cut,
                const ConnectivitySets& conn, const DofMap& dofs,
                const MechanicsAssembler& mech, const MaterialField& mat,
                std::vector<PhaseProps> phases, double gravity,
                std::array<FlowBC, 4> bc, std::vector<Well> wells,
                std::vector<double> segW0, double sFixed);

  int phases() const { return dofs_->options().singlePhase ? 1 : 2; }
  const std::vector<Well>& wellList() const { return wells_; }

  /// Adds the backward-Euler mass-balance residuals (and tangents) at x.
  void assemble(const VecX& x, const History& h, double dt, VecX& r,
                std::vector<Triplet>* J) const;

  double porosity(const VecX& x, const History& h, int cell) const;
  double saturation(const VecX& x, int cell) const;
  double saturationSeg(const VecX& x, int seg) const;
  /// Hydraulic aperture of a segment at state x.
  double hydraulicW(const VecX& x, int seg) const;
  /// Mass per bulk area of a cell (phi s rho) or per fracture length
  /// (w_h s rho) of a segment.
  double massCell(const VecX& x, const History& h, int cell, int phase) const;
  double massSeg(const VecX& x, int seg, int phase) const;

  StepBalance balance(const VecX& x, const History& h) const;
  /// Mass extraction rate per well and phase, positive when producing.
  std::vector<std::array<double, 2>> wellRates(const VecX& x) const;
  /// Boundary mass rate leaving the domain through one side.
  double boundaryMassRate(const VecX& x, Side side, int phase) const;

 private:
  /// Signed boundary mass flux of one face (out of the domain positive).
  double emMassFlux(const VecX& x, const ConnectivitySets::EM& em,
                    int phase) const;
  /// Signed mass extraction rate of one perforation.
  double perfMassRate(const VecX& x, int well, int perf, int phase) const;

  const Mesh* mesh_;
  const CutCellMap* cut_;
  const ConnectivitySets* conn_;
  const DofMap* dofs_;
  const MechanicsAssembler* mech_;
  MaterialField mat_;
  std::vector<PhaseProps> phases_;
  double g_;
  std::array<FlowBC, 4> bc_;
  std::vector<Well> wells_;
  std::vector<double> segW0_;
  double sFixed_;
  /// Per-perforation constants: equivalent radius and, for matrix
  /// completions, the full productivity index.
  struct PerfConst {
    double ro = 0.0;
    double wi = 0.0;
  };
  std::vector<std::vector<PerfConst>> perfConst_;
};

}  // namespace efrac

#endif
