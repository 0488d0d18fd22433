/**
 * @file Coupling.hpp
 * @brief Fully implicit coupling of the mechanics and flow residuals: the
 *        monolithic Newton solve with contact active-set handling,
 *        backtracking, saturation chopping, and step acceptance.
 */
#ifndef EFRAC_COUPLING_HPP
#define EFRAC_COUPLING_HPP

#include <memory>
#include <optional>
#include <vector>

#include "efrac/Config.hpp"
#include "efrac/Flow.hpp"
#include "efrac/Mechanics.hpp"

namespace efrac {

struct IterRecord {
  int iter = 0;
  double normU = 0.0, normW = 0.0, normM = 0.0, normF = 0.0;
  double gamma = 1.0;  ///< accepted line-search fraction
  int satChops = 0;    ///< saturation components clipped to [0, 1]
};

struct NewtonReport {
  bool converged = false;
  int iters = 0;
  double res0 = 0.0, resFinal = 0.0;
  std::vector<IterRecord> iterations;
};

struct StepRecord {
  int step = 0;
  double t = 0.0, dt = 0.0;
  bool converged = false;
  int iters = 0;
  double massErr = 0.0;
  NewtonReport newton;
};

/// The assembled problem: owns geometry, dof layout, and both assemblers,
/// and drives the monolithic Newton solve.
class Model {
 public:
  explicit Model(const CaseConfig& cfg);

  const CaseConfig& config() const { return cfg_; }
  const Mesh& mesh() const { return *mesh_; }
  const CutCellMap& cutMap() const { return cut_; }
  const ConnectivitySets& connectivity() const { return conn_; }
  const DofMap& dofs() const { return *dofs_; }
  const MechanicsAssembler& mechanics() const { return *mech_; }
  const FlowAssembler& flow() const { return *flow_; }
  bool hasFlow() const { return flow_ != nullptr; }
  int threads() const { return threads_; }
  void setThreads(int t) { threads_ = t; }

  VecX initialState() const;
  History initialHistory() const;

  /// Residual and optional Jacobian with Dirichlet rows replaced by the
  /// identity and their columns dropped. `raw` skips that replacement
  /// (boundary reactions live in the raw residual).
  void assembleSystem(const VecX& x, const History& h, double dt,
                      const std::vector<std::optional<ContactMode>>& forced,
                      VecX& r, SpMat* Jm, std::vector<ContactMode>* modes,
                      bool raw = false) const;

  /// Direct sparse solve with a relative residual check.
  VecX solveLinear(const SpMat& A, const VecX& rhs) const;

  /// Largest scaled block norm of a residual (displacement, jump, matrix
  /// mass, fracture mass); the blocks land in `blocks` when given.
  double scaledNorm(const VecX& r, double dt,
                    std::array<double, 4>* blocks = nullptr) const;

  NewtonReport newtonSolve(VecX& x, const History& h, double dt) const;

  /// Newton solve plus conservation accounting; does not touch the history.
  StepRecord step(VecX& x, const History& h, double dt) const;
  /// Commits a converged state: porosity, divergence, masses, plastic slip.
  void acceptStep(const VecX& x, History& h, double dt) const;

  /// Sum of raw residual components over one side's fixed displacement
  /// rows: the boundary reaction force.
  double reactionForce(const VecX& x, const History& h, double dt, Side side,
                       int comp) const;

 private:
  CaseConfig cfg_;
  std::unique_ptr<Mesh> mesh_;
  CutCellMap cut_;
  ConnectivitySets conn_;
  std::unique_ptr<DofMap> dofs_;
  std::unique_ptr<MechanicsAssembler> mech_;
  std::unique_ptr<FlowAssembler> flow_;
  int threads_ = 1;
  double scaleU_ = 1.0, scaleMass_ = 1.0;  // scaleMass lacks the 1/dt factor
};

}  // namespace efrac

#endif
