/**
 * @file Simulator.cpp
 * @brief Time loop, output writing, and the convergence study.
 */
#include "efrac/Simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "efrac/Errors.hpp"
#include "efrac/Output.hpp"

namespace efrac {

namespace {

std::string snapshotPath(const std::string& dir, const std::string& prefix,
                         const char* kind, int idx) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_%s_%04d.vtk", kind, idx);
  return (std::filesystem::path(dir) / (prefix + buf)).string();
}

void writeSnapshot(const std::string& dir, const std::string& prefix, int idx,
                   const Model& model, const VecX& x, const History& h) {
  const Mesh& mesh = model.mesh();
  CellFields cf;
  PointVecFields pf;
  std::vector<Vec2> u(mesh.nodeCount());
  for (int a = 0; a < mesh.nodeCount(); ++a)
    u[a] = {x[model.dofs().uDof(a, 0)], x[model.dofs().uDof(a, 1)]};
  pf.emplace_back("displacement", std::move(u));
  if (model.hasFlow()) {
    std::vector<double> p(mesh.cellCount()), phi(mesh.cellCount());
    for (int c = 0; c < mesh.cellCount(); ++c) {
      p[c] = x[model.dofs().pmDof(c)];
      phi[c] = model.flow().porosity(x, h, c);
    }
    cf.emplace_back("pressure", std::move(p));
    cf.emplace_back("porosity", std::move(phi));
    if (!model.dofs().options().singlePhase) {
      std::vector<double> s(mesh.cellCount());
      for (int c = 0; c < mesh.cellCount(); ++c)
        s[c] = x[model.dofs().smDof(c)];
      cf.emplace_back("saturation", std::move(s));
    }
  }
  cf.emplace_back("perm", std::vector<double>(model.config().material.kx));
  writeMatrixVtk(snapshotPath(dir, prefix, "matrix", idx), mesh, cf, pf);

  const auto& segs = model.cutMap().segments;
  if (!segs.empty()) {
    CellFields sf;
    std::vector<double> wn(segs.size());
    for (size_t s = 0; s < segs.size(); ++s)
      wn[s] = model.mechanics().aperture(x, static_cast<int>(s));
    sf.emplace_back("aperture", std::move(wn));
    if (model.hasFlow()) {
      std::vector<double> wh(segs.size()), p(segs.size());
      for (size_t s = 0; s < segs.size(); ++s) {
        wh[s] = model.flow().hydraulicW(x, static_cast<int>(s));
        p[s] = x[model.dofs().pfDof(static_cast<int>(s))];
      }
      sf.emplace_back("hydraulic_aperture", std::move(wh));
      sf.emplace_back("pressure", std::move(p));
      if (!model.dofs().options().singlePhase) {
        std::vector<double> s2(segs.size());
        for (size_t s = 0; s < segs.size(); ++s)
          s2[s] = x[model.dofs().sfDof(static_cast<int>(s))];
        sf.emplace_back("saturation", std::move(s2));
      }
    }
    writeFractureVtk(snapshotPath(dir, prefix, "fracture", idx),
                     model.cutMap(), sf);
  }
}

}  // namespace

RunResult runCase(const CaseConfig& cfg, const RunOptions& opt) {
  RunResult res;
  res.model = std::make_unique<Model>(cfg);
  Model& model = *res.model;
  model.setThreads(std::max(1, opt.threads));

  VecX x = model.initialState();
  History h = model.initialHistory();

  const TimeConfig& tc = cfg.time;
  std::vector<double> vtkTimes = cfg.output.vtkTimes;
  std::sort(vtkTimes.begin(), vtkTimes.end());
  vtkTimes.erase(std::unique(vtkTimes.begin(), vtkTimes.end()),
                 vtkTimes.end());

  CsvWriter series, solverLog;
  if (opt.writeOutputs) {
    std::filesystem::create_directories(opt.outputDir);
    std::vector<std::string> cols{"step",     "time", "dt",
                                  "iters",    "mass_err", "res0",
                                  "res_final"};
    for (const WellConfig& w : cfg.wells) {
      cols.push_back(w.name + "_qw");
      cols.push_back(w.name + "_qnw");
    }
    if (cfg.output.series)
      series = CsvWriter(
          (std::filesystem::path(opt.outputDir) / (cfg.output.prefix + "_series.csv"))
              .string(),
          cols);
    if (cfg.output.solverLog)
      solverLog = CsvWriter(
          (std::filesystem::path(opt.outputDir) / (cfg.output.prefix + "_solver.csv"))
              .string(),
          {"step", "iter", "norm_u", "norm_w", "norm_mass_m", "norm_mass_f",
           "gamma", "sat_chops"});
  }

  int vtkIdx = 0;
  size_t nextVtk = 0;
  const double tScale = std::max(tc.tEnd, 1e-300);
  const auto timesEqual = [&](double a, double b) {
    return std::abs(a - b) <= 1e-9 * tScale;
  };
  if (opt.writeOutputs && nextVtk < vtkTimes.size() &&
      timesEqual(vtkTimes[nextVtk], 0.0)) {
    writeSnapshot(opt.outputDir, cfg.output.prefix, vtkIdx++, model, x, h);
    ++nextVtk;
  }

  const double dtMinEff = tc.dtMin > 0.0 ? tc.dtMin : 1e-9 * tc.dt0;
  double dt = tc.dt0;
  int step = 0;
  while (h.t < tc.tEnd - 1e-12 * tScale) {
    if (step >= tc.maxSteps) {
      res.error = "step budget exhausted before t_end";
      break;
    }
    double dtTry = std::min(dt, tc.tEnd - h.t);
    if (nextVtk < vtkTimes.size() && vtkTimes[nextVtk] > h.t &&
        h.t + dtTry > vtkTimes[nextVtk] - 1e-9 * tScale)
      dtTry = vtkTimes[nextVtk] - h.t;

    VecX xTrial = x;
    StepRecord rec;
    std::string failure;
    try {
      rec = model.step(xTrial, h, dtTry);
    } catch (const SolverError& e) {
      rec.converged = false;
      failure = e.what();
    }

    if (!rec.converged) {
      if (opt.logLevel >= 1)
        std::cout << "step " << step + 1 << " failed at dt = " << dtTry
                  << (failure.empty() ? "" : (": " + failure)) << "; cutting\n";
      dt = dtTry * tc.cut;
      if (dt < dtMinEff) {
        res.error = failure.empty()
                        ? "time step fell below the minimum"
                        : ("time step fell below the minimum: " + failure);
        break;
      }
      continue;
    }

    x = xTrial;
    model.acceptStep(x, h, dtTry);
    ++step;
    rec.step = step;
    rec.t = h.t;
    rec.dt = dtTry;
    res.steps.push_back(rec);

    if (opt.logLevel >= 1)
      std::cout << "step " << step << "  t = " << h.t << "  dt = " << dtTry
                << "  iters = " << rec.iters << "  mass_err = " << rec.massErr
                << '\n';

    if (opt.writeOutputs) {
      std::vector<double> row{static_cast<double>(step), h.t,     dtTry,
                              static_cast<double>(rec.iters), rec.massErr,
                              rec.newton.res0,                rec.newton.resFinal};
      if (model.hasFlow() && !cfg.wells.empty())
        for (const auto& wr : model.flow().wellRates(x)) {
          row.push_back(wr[0]);
          row.push_back(wr[1]);
        }
      if (series.isOpen()) series.row(row);
      if (solverLog.isOpen())
        for (const IterRecord& ir : rec.newton.iterations)
          solverLog.row({static_cast<double>(step),
                         static_cast<double>(ir.iter), ir.normU, ir.normW,
                         ir.normM, ir.normF, ir.gamma,
                         static_cast<double>(ir.satChops)});
      if (nextVtk < vtkTimes.size() && timesEqual(h.t, vtkTimes[nextVtk])) {
        writeSnapshot(opt.outputDir, cfg.output.prefix, vtkIdx++, model, x, h);
        ++nextVtk;
      }
    }

    dt = rec.iters <= tc.easyIters ? dtTry * tc.growth : dtTry;
  }

  res.finished = h.t >= tc.tEnd - 1e-12 * tScale && res.error.empty();
  res.x = std::move(x);
  res.h = std::move(h);
  return res;
}

double apertureError(const Model& model, const VecX& x,
                     const SneddonConfig& sn) {
  CrackProblem cp;
  cp.E = model.config().material.E();
  cp.nu = model.config().material.nu;
  cp.pressure = sn.pressure;
  cp.a = sn.halfExtent;
  const double rad = sn.angleDeg * 3.14159265358979323846 / 180.0;
  const Vec2 tang{std::cos(rad), std::sin(rad)};
  double num = 0.0, den = 0.0;
  const auto& segs = model.cutMap().segments;
  for (size_t s = 0; s < segs.size(); ++s) {
    const double xi = tang.dot(segs[s].center - sn.center);
    const double wAn = crackAperture(cp, xi);
    const double wNum = model.mechanics().aperture(x, static_cast<int>(s));
    num += segs[s].length * (wNum - wAn) * (wNum - wAn);
    den += segs[s].length * wAn * wAn;
  }
  if (den <= 0.0) throw SolverError("aperture error: empty reference profile");
  return std::sqrt(num / den);
}

double StudyResult::order(Scheme s, double angleDeg) const {
  std::vector<ConvergencePoint> pts;
  for (const StudyRow& r : rows)
    if (r.scheme == s && std::abs(r.angleDeg - angleDeg) < 1e-12)
      pts.push_back({r.h, r.err});
  return fitOrder(pts);
}

StudyResult runConvergenceStudy(const StudySpec& spec, const RunOptions& opt,
                                const std::string& outputCsv) {
  if (!spec.base.sneddon)
    throw ConfigError("convergence study needs the crack description");
  StudyResult result;
  for (Scheme scheme : spec.schemes) {
    for (double angle : spec.anglesDeg) {
      for (int n : spec.levels) {
        CaseConfig cfg = spec.base;
        cfg.nx = cfg.ny = n;
        const int ncell = n * n;
        cfg.material.kx.assign(ncell, cfg.material.kx.empty()
                                          ? 1e-14
                                          : cfg.material.kx[0]);
        cfg.material.ky = cfg.material.kx;
        cfg.scheme.scheme = scheme;
        cfg.sneddon->angleDeg = angle;
        const double rad = angle * 3.14159265358979323846 / 180.0;
        const Vec2 tang{std::cos(rad), std::sin(rad)};
        FractureSpec f;
        f.w0 = cfg.fractures.empty() ? 1e-4 : cfg.fractures[0].w0;
        f.points = {cfg.sneddon->center - cfg.sneddon->halfExtent * tang,
                    cfg.sneddon->center + cfg.sneddon->halfExtent * tang};
        cfg.fractures = {f};
        cfg.output.vtkTimes.clear();
        RunOptions ro = opt;
        ro.writeOutputs = false;
        ro.logLevel = std::max(0, opt.logLevel - 1);
        RunResult run = runCase(cfg, ro);
        if (!run.finished)
          throw SolverError("study case (scheme " +
                            std::string(schemeName(scheme)) + ", angle " +
                            std::to_string(angle) + ", n " +
                            std::to_string(n) + ") failed: " + run.error);
        StudyRow row;
        row.scheme = scheme;
        row.angleDeg = angle;
        row.n = n;
        row.h = run.model->mesh().h();
        row.err = apertureError(*run.model, run.x, *cfg.sneddon);
        if (opt.logLevel >= 1)
          std::cout << "study " << schemeName(scheme) << " angle " << angle
                    << " n " << n << "  err = " << row.err << '\n';
        result.rows.push_back(row);
      }
    }
  }
  if (!outputCsv.empty()) {
    CsvWriter csv(outputCsv, {"scheme", "angle_deg", "n", "h", "err"});
    for (const StudyRow& r : result.rows)
      csv.row({static_cast<double>(static_cast<int>(r.scheme)), r.angleDeg,
               static_cast<double>(r.n), r.h, r.err});
  }
  return result;
}

}  // namespace efrac
