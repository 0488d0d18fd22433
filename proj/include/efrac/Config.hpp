/**
 * @file Config.hpp
 * @brief Case description: mesh, material, fluids, fractures, boundary
 *        conditions, wells, scheme and solver controls, parsed from JSON.
 *
 * All quantities are SI: Pa, m, s, kg, m^2 for permeability. Files
 * referenced by a case (permeability rasters) resolve relative to the case
 * file's directory.
 */
#ifndef EFRAC_CONFIG_HPP
#define EFRAC_CONFIG_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "efrac/Flow.hpp"
#include "efrac/Mechanics.hpp"

namespace efrac {

/// One completion request: a physical point (mapped to the containing cell)
/// or a fracture segment picked by index along the fracture.
struct WellPerfSpec {
  std::optional<Vec2> point;
  int fracture = -1;
  int segment = -1;
};

struct WellConfig {
  std::string name;
  double bhp = 0.0;
  double rw = 0.1;
  std::vector<WellPerfSpec> perfs;
};

struct TimeConfig {
  double tEnd = 1.0;
  double dt0 = 1.0;
  double growth = 1.0;     ///< dt multiplier after easy steps
  double cut = 0.5;        ///< dt multiplier after a failed step
  int easyIters = 5;       ///< iteration count that still allows growth
  double dtMin = 0.0;      ///< abort threshold; 0 = 1e-9 * dt0
  int maxSteps = 100000;
  double newtonTol = 1e-8;
  int newtonMax = 25;
  int backtrackMax = 8;
};

struct OutputConfig {
  std::string prefix = "out";
  std::vector<double> vtkTimes;
  bool series = true;
  bool solverLog = true;
};

/// Pressurized straight fracture whose opening profile has a closed-form
/// plane-strain solution; drives the aperture-convergence study.
struct SneddonConfig {
  Vec2 center{0.0, 0.0};
  double halfExtent = 1.0;
  double angleDeg = 0.0;
  double pressure = 0.0;
  int elements = 200;  ///< panels of the reference displacement solver
};

struct CaseConfig {
  double lx = 1.0, ly = 1.0;
  int nx = 1, ny = 1;
  MaterialField material;
  std::array<PhaseProps, 2> fluid{};  ///< wetting, non-wetting
  double gravity = 0.0;
  double p0 = 0.0;  ///< initial pressure
  double s0 = 1.0;  ///< initial wetting saturation
  FractureNetwork fractures;
  SchemeParams scheme;
  std::array<MechBC, 4> mechBC{};
  std::array<FlowBC, 4> flowBC{};
  bool mechanicsOnly = false;
  bool singlePhase = false;
  double fracturePressure = 0.0;  ///< surface pressure when flow is off
  std::vector<WellConfig> wells;
  TimeConfig time;
  OutputConfig output;
  std::optional<SneddonConfig> sneddon;
};

/// Parses a case file; permeability rasters resolve against its directory.
CaseConfig parseCaseFile(const std::string& path);
/// Parses case JSON text directly.
CaseConfig parseCaseJson(const std::string& text, const std::string& baseDir);
/// Emits the fully resolved case back to JSON (rasters inline).
std::string caseToJson(const CaseConfig& cfg);

/// Reads a permeability raster: ny rows of nx comma-separated values, first
/// row = bottom cell row.
std::vector<double> readPermCsv(const std::string& path, int nx, int ny);

}  // namespace efrac

#endif
