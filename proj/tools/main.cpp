/**
 * @file main.cpp
 * @brief Command-line driver: runs a case file or a convergence study.
 */
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "efrac/Errors.hpp"
#include "efrac/Simulator.hpp"
#include "json.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

efrac::StudySpec parseStudy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw efrac::IoError("cannot open study file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw efrac::ConfigError(std::string("invalid study JSON: ") + e.what());
  }
  efrac::StudySpec spec;
  if (!j.contains("case"))
    throw efrac::ConfigError("study: missing 'case' path");
  const auto base = std::filesystem::path(path).parent_path();
  spec.base = efrac::parseCaseFile(
      (base / j.at("case").get<std::string>()).string());
  if (!j.contains("levels") || !j.at("levels").is_array())
    throw efrac::ConfigError("study: 'levels' must be an array");
  for (const auto& v : j.at("levels")) spec.levels.push_back(v.get<int>());
  if (j.contains("schemes")) {
    for (const auto& v : j.at("schemes")) {
      const std::string s = v.get<std::string>();
      if (s == "efem0") spec.schemes.push_back(efrac::Scheme::EFEM0);
      else if (s == "efem1") spec.schemes.push_back(efrac::Scheme::EFEM1);
      else if (s == "xfem") spec.schemes.push_back(efrac::Scheme::XFEM);
      else throw efrac::ConfigError("study: unknown scheme '" + s + "'");
    }
  } else {
    spec.schemes = {efrac::Scheme::EFEM0, efrac::Scheme::EFEM1,
                    efrac::Scheme::XFEM};
  }
  if (j.contains("angles_deg"))
    for (const auto& v : j.at("angles_deg"))
      spec.anglesDeg.push_back(v.get<double>());
  else
    spec.anglesDeg = {spec.base.sneddon ? spec.base.sneddon->angleDeg : 0.0};
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coupled fracture deformation and multiphase flow simulator"};
  app.require_subcommand(1);

  std::string outputDir = ".";
  int threads = 1;
  int logLevel = 1;
  app.add_option("--output-dir", outputDir, "directory for result files");
  app.add_option("--threads", threads, "assembly threads");
  app.add_option("--log-level", logLevel, "0 silent, 1 steps, 2 iterations");
  app.fallthrough();

  std::string casePath;
  CLI::App* sim = app.add_subcommand("simulate", "run a case file");
  sim->add_option("case", casePath, "case JSON file")->required();

  std::string studyKind, studyPath;
  CLI::App* study = app.add_subcommand("study", "run a parameter study");
  study->add_option("kind", studyKind, "study kind (convergence)")->required();
  study->add_option("spec", studyPath, "study JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  efrac::RunOptions opt;
  opt.outputDir = outputDir;
  opt.threads = threads;
  opt.logLevel = logLevel;

  try {
    if (sim->parsed()) {
      const efrac::CaseConfig cfg = efrac::parseCaseFile(casePath);
      const efrac::RunResult res = efrac::runCase(cfg, opt);
      if (!res.finished) {
        std::cerr << "simulation did not reach t_end: " << res.error << '\n';
        return kExitSolver;
      }
      std::cout << "finished: " << res.steps.size() << " steps to t = "
                << res.h.t << '\n';
      return 0;
    }
    if (studyKind != "convergence") {
      std::cerr << "unknown study kind '" << studyKind << "'\n";
      return kExitConfig;
    }
    const efrac::StudySpec spec = parseStudy(studyPath);
    std::filesystem::create_directories(outputDir);
    const std::string csv =
        (std::filesystem::path(outputDir) / "convergence.csv").string();
    const efrac::StudyResult res =
        efrac::runConvergenceStudy(spec, opt, csv);
    for (efrac::Scheme s : spec.schemes)
      for (double a : spec.anglesDeg)
        std::cout << "order " << efrac::schemeName(s) << " angle " << a
                  << ": " << res.order(s, a) << '\n';
    std::cout << "wrote " << csv << '\n';
    return 0;
  } catch (const efrac::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const efrac::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const efrac::GeometryError& e) {
    std::cerr << "geometry error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const efrac::SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  }
}
