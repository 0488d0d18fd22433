/**
 * @file Simulator.hpp
 * @brief Case driver: adaptive time loop with step cutting and growth,
 *        snapshot and series output, and the aperture-convergence study.
 */
#ifndef EFRAC_SIMULATOR_HPP
#define EFRAC_SIMULATOR_HPP

#include <memory>
#include <string>
#include <vector>

#include "efrac/Coupling.hpp"
#include "efrac/Oracle.hpp"

namespace efrac {

struct RunOptions {
  std::string outputDir = ".";
  int threads = 1;
  int logLevel = 1;  ///< 0 silent, 1 per step, 2 per Newton iteration
  bool writeOutputs = true;
};

struct RunResult {
  std::unique_ptr<Model> model;
  VecX x;
  History h;
  std::vector<StepRecord> steps;
  bool finished = false;
  std::string error;
};

RunResult runCase(const CaseConfig& cfg, const RunOptions& opt = {});

/// Relative L2 error of segment apertures against the pressurized-crack
/// profile, length-weighted over the fracture.
double apertureError(const Model& model, const VecX& x,
                     const SneddonConfig& sn);

/// Grid-refinement study of the crack-opening error.
struct StudySpec {
  CaseConfig base;  ///< template case carrying the crack description
  std::vector<int> levels;
  std::vector<Scheme> schemes;
  std::vector<double> anglesDeg;
};

struct StudyRow {
  Scheme scheme = Scheme::EFEM0;
  double angleDeg = 0.0;
  int n = 0;
  double h = 0.0;
  double err = 0.0;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  /// Fitted order for one scheme/angle combination.
  double order(Scheme s, double angleDeg) const;
};

/// Builds the fracture from the crack geometry, runs every level, and
/// returns the error table. Writes output_csv when non-empty.
StudyResult runConvergenceStudy(const StudySpec& spec,
                                const RunOptions& opt = {},
                                const std::string& outputCsv = "");

}  // namespace efrac

#endif
