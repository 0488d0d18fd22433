/**
 * @file Config.cpp
 * @brief JSON case parsing with field-path error reporting.
 */
#include "efrac/Config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "efrac/Errors.hpp"
#include "json.hpp"

namespace efrac {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

double num(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

double numOr(const json& j, const char* key, double dflt,
             const std::string& path) {
  if (!j.contains(key)) return dflt;
  return num(j.at(key), path + "." + key);
}

int intOr(const json& j, const char* key, int dflt, const std::string& path) {
  if (!j.contains(key)) return dflt;
  const json& v = j.at(key);
  if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
  return v.get<int>();
}

bool boolOr(const json& j, const char* key, bool dflt,
            const std::string& path) {
  if (!j.contains(key)) return dflt;
  const json& v = j.at(key);
  if (!v.is_boolean()) fail(path + "." + key, "expected a boolean");
  return v.get<bool>();
}

std::string strOr(const json& j, const char* key, const std::string& dflt,
                  const std::string& path) {
  if (!j.contains(key)) return dflt;
  const json& v = j.at(key);
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

Vec2 vec2(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected [x, y]");
  return {num(j[0], path + "[0]"), num(j[1], path + "[1]")};
}

const json& need(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) fail(path, "missing required key '" + std::string(key) + "'");
  return j.at(key);
}

int sideIndex(const std::string& name, const std::string& path) {
  if (name == "left") return 0;
  if (name == "right") return 1;
  if (name == "bottom") return 2;
  if (name == "top") return 3;
  fail(path, "unknown side '" + name + "'");
}

PhaseProps parsePhase(const json& j, const std::string& path) {
  PhaseProps p;
  p.rho0 = numOr(j, "rho0", p.rho0, path);
  p.pRef = numOr(j, "p0", p.pRef, path);
  p.K = numOr(j, "bulk", p.K, path);
  p.mu = numOr(j, "mu", p.mu, path);
  if (p.K <= 0.0) fail(path + ".bulk", "must be positive");
  if (p.mu <= 0.0) fail(path + ".mu", "must be positive");
  return p;
}

}  // namespace

std::vector<double> readPermCsv(const std::string& path, int nx, int ny) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open permeability raster '" + path + "'");
  std::vector<double> k;
  k.reserve(static_cast<size_t>(nx) * ny);
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    int col = 0;
    while (std::getline(ss, tok, ',')) {
      try {
        k.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw IoError("'" + path + "' row " + std::to_string(row) +
                      ": bad value '" + tok + "'");
      }
      ++col;
    }
    if (col != nx)
      throw IoError("'" + path + "' row " + std::to_string(row) + ": " +
                    std::to_string(col) + " values, expected " +
                    std::to_string(nx));
    ++row;
  }
  if (row != ny)
    throw IoError("'" + path + "': " + std::to_string(row) +
                  " rows, expected " + std::to_string(ny));
  for (double v : k)
    if (!(v > 0.0)) throw IoError("'" + path + "': non-positive permeability");
  return k;
}

CaseConfig parseCaseJson(const std::string& text, const std::string& baseDir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  CaseConfig c;

  const json& mesh = need(j, "mesh", "case");
  c.lx = num(need(mesh, "lx", "mesh"), "mesh.lx");
  c.ly = num(need(mesh, "ly", "mesh"), "mesh.ly");
  c.nx = intOr(mesh, "nx", 0, "mesh");
  c.ny = intOr(mesh, "ny", 0, "mesh");
  if (c.lx <= 0.0 || c.ly <= 0.0) fail("mesh", "domain extents must be positive");
  if (c.nx < 1 || c.ny < 1) fail("mesh", "nx and ny must be at least 1");

  const json& mat = need(j, "material", "case");
  c.material.Kdr = num(need(mat, "k_dr", "material"), "material.k_dr");
  c.material.nu = num(need(mat, "nu", "material"), "material.nu");
  c.material.biot = numOr(mat, "biot", 1.0, "material");
  c.material.phi0 = numOr(mat, "phi0", 0.0, "material");
  c.material.rhoS = numOr(mat, "rho_s", 2650.0, "material");
  c.material.friction = numOr(mat, "friction", 0.0, "material");
  if (c.material.Kdr <= 0.0) fail("material.k_dr", "must be positive");
  if (c.material.nu <= -1.0 || c.material.nu >= 0.5)
    fail("material.nu", "must lie in (-1, 0.5)");
  if (c.material.phi0 < 0.0 || c.material.phi0 >= 1.0)
    fail("material.phi0", "must lie in [0, 1)");
  const int ncell = c.nx * c.ny;
  const json& perm = need(mat, "perm", "material");
  if (perm.is_number()) {
    c.material.kx.assign(ncell, perm.get<double>());
  } else if (perm.is_object() && perm.contains("csv")) {
    const std::string rel = perm.at("csv").get<std::string>();
    const auto p = std::filesystem::path(baseDir) / rel;
    c.material.kx = readPermCsv(p.string(), c.nx, c.ny);
  } else if (perm.is_array()) {
    if (static_cast<int>(perm.size()) != ncell)
      fail("material.perm", "array must hold nx*ny values");
    c.material.kx.clear();
    for (size_t i = 0; i < perm.size(); ++i)
      c.material.kx.push_back(num(perm[i], "material.perm"));
  } else {
    fail("material.perm", "expected a number, an inline array, or {\"csv\": path}");
  }
  for (double v : c.material.kx)
    if (!(v > 0.0)) fail("material.perm", "permeability must be positive");
  c.material.ky = c.material.kx;

  if (j.contains("phases")) {
    const json& ph = j.at("phases");
    c.fluid[0] = parsePhase(need(ph, "wetting", "phases"), "phases.wetting");
    c.fluid[1] =
        parsePhase(need(ph, "nonwetting", "phases"), "phases.nonwetting");
  }
  c.gravity = numOr(j, "gravity", 0.0, "case");

  if (j.contains("initial")) {
    const json& ini = j.at("initial");
    c.p0 = numOr(ini, "pressure", 0.0, "initial");
    c.s0 = numOr(ini, "saturation", 1.0, "initial");
    if (c.s0 < 0.0 || c.s0 > 1.0) fail("initial.saturation", "must lie in [0, 1]");
    if (ini.contains("stress")) {
      const json& st = ini.at("stress");
      if (!st.is_array() || st.size() != 3)
        fail("initial.stress", "expected [sxx, syy, sxy]");
      c.material.sigma0 = {num(st[0], "initial.stress[0]"),
                           num(st[1], "initial.stress[1]"),
                           num(st[2], "initial.stress[2]")};
    }
  }

  if (j.contains("fractures")) {
    const json& fr = j.at("fractures");
    if (!fr.is_array()) fail("fractures", "expected an array");
    for (size_t i = 0; i < fr.size(); ++i) {
      const std::string path = "fractures[" + std::to_string(i) + "]";
      FractureSpec f;
      const json& pts = need(fr[i], "points", path);
      if (!pts.is_array() || pts.size() < 2)
        fail(path + ".points", "expected at least two [x, y] vertices");
      for (size_t k = 0; k < pts.size(); ++k)
        f.points.push_back(
            vec2(pts[k], path + ".points[" + std::to_string(k) + "]"));
      f.w0 = numOr(fr[i], "w0", 0.0, path);
      if (f.w0 <= 0.0) fail(path + ".w0", "must be positive");
      c.fractures.push_back(std::move(f));
    }
  }

  if (j.contains("scheme")) {
    const json& sc = j.at("scheme");
    const std::string type = strOr(sc, "type", "efem0", "scheme");
    if (type == "efem0") c.scheme.scheme = Scheme::EFEM0;
    else if (type == "efem1") c.scheme.scheme = Scheme::EFEM1;
    else if (type == "xfem") c.scheme.scheme = Scheme::XFEM;
    else fail("scheme.type", "unknown scheme '" + type + "'");
    c.scheme.stabilization =
        numOr(sc, "stabilization", c.scheme.stabilization, "scheme");
    c.scheme.penaltyKappa = numOr(sc, "penalty", c.scheme.penaltyKappa, "scheme");
    c.scheme.tangentRatio =
        numOr(sc, "tangent_ratio", c.scheme.tangentRatio, "scheme");
    if (c.scheme.penaltyKappa <= 0.0) fail("scheme.penalty", "must be positive");
  }

  if (j.contains("bc")) {
    const json& bc = j.at("bc");
    for (auto it = bc.begin(); it != bc.end(); ++it) {
      const int si = sideIndex(it.key(), "bc");
      const std::string path = "bc." + it.key();
      const json& side = it.value();
      if (side.contains("mech")) {
        const json& m = side.at("mech");
        MechBC& mb = c.mechBC[si];
        if (m.contains("ux")) mb.ux = num(m.at("ux"), path + ".mech.ux");
        if (m.contains("uy")) mb.uy = num(m.at("uy"), path + ".mech.uy");
        if (m.contains("traction"))
          mb.traction = vec2(m.at("traction"), path + ".mech.traction");
      }
      if (side.contains("flow")) {
        const json& fl = side.at("flow");
        FlowBC& fb = c.flowBC[si];
        const std::string kind = strOr(fl, "type", "noflow", path + ".flow");
        if (kind == "noflow") fb.kind = FlowBC::Kind::NoFlow;
        else if (kind == "pressure") fb.kind = FlowBC::Kind::Pressure;
        else if (kind == "influx") fb.kind = FlowBC::Kind::Influx;
        else fail(path + ".flow.type", "unknown type '" + kind + "'");
        fb.p = numOr(fl, "p", 0.0, path + ".flow");
        fb.s = numOr(fl, "s", 1.0, path + ".flow");
        fb.q = numOr(fl, "q", 0.0, path + ".flow");
        if (fb.kind == FlowBC::Kind::Pressure && !fl.contains("p"))
          fail(path + ".flow", "pressure condition needs 'p'");
        if (fb.kind == FlowBC::Kind::Influx && !fl.contains("q"))
          fail(path + ".flow", "influx condition needs 'q'");
      }
    }
  }

  c.mechanicsOnly = boolOr(j, "mechanics_only", false, "case");
  c.singlePhase = boolOr(j, "single_phase", false, "case");
  c.fracturePressure = numOr(j, "fracture_pressure", 0.0, "case");

  if (j.contains("wells")) {
    const json& ws = j.at("wells");
    if (!ws.is_array()) fail("wells", "expected an array");
    for (size_t i = 0; i < ws.size(); ++i) {
      const std::string path = "wells[" + std::to_string(i) + "]";
      WellConfig w;
      w.name = strOr(ws[i], "name", "well" + std::to_string(i), path);
      w.bhp = num(need(ws[i], "bhp", path), path + ".bhp");
      w.rw = numOr(ws[i], "radius", 0.1, path);
      if (w.rw <= 0.0) fail(path + ".radius", "must be positive");
      const json& ps = need(ws[i], "perforations", path);
      if (!ps.is_array() || ps.empty())
        fail(path + ".perforations", "expected a non-empty array");
      for (size_t k = 0; k < ps.size(); ++k) {
        const std::string pp = path + ".perforations[" + std::to_string(k) + "]";
        WellPerfSpec spec;
        const json& pj = ps[k];
        if (pj.contains("x") && pj.contains("y")) {
          spec.point = Vec2{num(pj.at("x"), pp + ".x"), num(pj.at("y"), pp + ".y")};
        } else if (pj.contains("fracture")) {
          spec.fracture = intOr(pj, "fracture", -1, pp);
          spec.segment = intOr(pj, "segment", -1, pp);
          if (spec.fracture < 0 || spec.segment < 0)
            fail(pp, "fracture perforation needs 'fracture' and 'segment'");
        } else {
          fail(pp, "expected {x, y} or {fracture, segment}");
        }
        w.perfs.push_back(spec);
      }
      c.wells.push_back(std::move(w));
    }
  }

  if (j.contains("time")) {
    const json& t = j.at("time");
    c.time.tEnd = num(need(t, "t_end", "time"), "time.t_end");
    c.time.dt0 = num(need(t, "dt0", "time"), "time.dt0");
    c.time.growth = numOr(t, "growth", 1.0, "time");
    c.time.cut = numOr(t, "cut", 0.5, "time");
    c.time.easyIters = intOr(t, "easy_iters", 5, "time");
    c.time.dtMin = numOr(t, "dt_min", 0.0, "time");
    c.time.maxSteps = intOr(t, "max_steps", 100000, "time");
    c.time.newtonTol = numOr(t, "newton_tol", 1e-8, "time");
    c.time.newtonMax = intOr(t, "newton_max", 25, "time");
    c.time.backtrackMax = intOr(t, "backtrack_max", 8, "time");
    if (c.time.tEnd <= 0.0) fail("time.t_end", "must be positive");
    if (c.time.dt0 <= 0.0) fail("time.dt0", "must be positive");
    if (c.time.growth < 1.0) fail("time.growth", "must be at least 1");
    if (c.time.cut <= 0.0 || c.time.cut >= 1.0)
      fail("time.cut", "must lie in (0, 1)");
  }

  if (j.contains("output")) {
    const json& o = j.at("output");
    c.output.prefix = strOr(o, "prefix", "out", "output");
    if (o.contains("vtk_times")) {
      const json& v = o.at("vtk_times");
      if (!v.is_array()) fail("output.vtk_times", "expected an array");
      for (size_t i = 0; i < v.size(); ++i)
        c.output.vtkTimes.push_back(num(v[i], "output.vtk_times"));
    }
    c.output.series = boolOr(o, "series", true, "output");
    c.output.solverLog = boolOr(o, "solver_log", true, "output");
  }

  if (j.contains("sneddon")) {
    const json& s = j.at("sneddon");
    SneddonConfig sn;
    sn.center = vec2(need(s, "center", "sneddon"), "sneddon.center");
    sn.halfExtent = num(need(s, "half_extent", "sneddon"), "sneddon.half_extent");
    sn.angleDeg = numOr(s, "angle_deg", 0.0, "sneddon");
    sn.pressure = num(need(s, "pressure", "sneddon"), "sneddon.pressure");
    sn.elements = intOr(s, "elements", 200, "sneddon");
    if (sn.halfExtent <= 0.0) fail("sneddon.half_extent", "must be positive");
    c.sneddon = sn;
  }

  return c;
}

CaseConfig parseCaseFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open case file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parseCaseJson(ss.str(),
                       std::filesystem::path(path).parent_path().string());
}

std::string caseToJson(const CaseConfig& c) {
  json j;
  j["mesh"] = {{"lx", c.lx}, {"ly", c.ly}, {"nx", c.nx}, {"ny", c.ny}};
  json mat = {{"k_dr", c.material.Kdr},    {"nu", c.material.nu},
              {"biot", c.material.biot},   {"phi0", c.material.phi0},
              {"rho_s", c.material.rhoS},  {"friction", c.material.friction}};
  bool uniform = true;
  for (double v : c.material.kx) uniform = uniform && v == c.material.kx[0];
  if (uniform && !c.material.kx.empty()) mat["perm"] = c.material.kx[0];
  else mat["perm"] = c.material.kx;
  j["material"] = mat;
  const auto phase = [](const PhaseProps& p) {
    return json{{"rho0", p.rho0}, {"p0", p.pRef}, {"bulk", p.K}, {"mu", p.mu}};
  };
  j["phases"] = {{"wetting", phase(c.fluid[0])},
                 {"nonwetting", phase(c.fluid[1])}};
  j["gravity"] = c.gravity;
  j["initial"] = {{"pressure", c.p0},
                  {"saturation", c.s0},
                  {"stress", {c.material.sigma0[0], c.material.sigma0[1],
                              c.material.sigma0[2]}}};
  j["fractures"] = json::array();
  for (const FractureSpec& f : c.fractures) {
    json pts = json::array();
    for (const Vec2& p : f.points) pts.push_back({p.x(), p.y()});
    j["fractures"].push_back({{"points", pts}, {"w0", f.w0}});
  }
  j["scheme"] = {{"type", schemeName(c.scheme.scheme)},
                 {"stabilization", c.scheme.stabilization},
                 {"penalty", c.scheme.penaltyKappa},
                 {"tangent_ratio", c.scheme.tangentRatio}};
  json bc;
  for (int si = 0; si < 4; ++si) {
    json side;
    json m;
    if (c.mechBC[si].ux) m["ux"] = *c.mechBC[si].ux;
    if (c.mechBC[si].uy) m["uy"] = *c.mechBC[si].uy;
    if (c.mechBC[si].traction != Vec2{0.0, 0.0})
      m["traction"] = {c.mechBC[si].traction.x(), c.mechBC[si].traction.y()};
    if (!m.empty()) side["mech"] = m;
    const FlowBC& fb = c.flowBC[si];
    if (fb.kind == FlowBC::Kind::Pressure)
      side["flow"] = {{"type", "pressure"}, {"p", fb.p}, {"s", fb.s}};
    else if (fb.kind == FlowBC::Kind::Influx)
      side["flow"] = {{"type", "influx"}, {"q", fb.q}};
    if (!side.empty()) bc[sideName(static_cast<Side>(si))] = side;
  }
  if (!bc.empty()) j["bc"] = bc;
  j["mechanics_only"] = c.mechanicsOnly;
  j["single_phase"] = c.singlePhase;
  j["fracture_pressure"] = c.fracturePressure;
  j["wells"] = json::array();
  for (const WellConfig& w : c.wells) {
    json perfs = json::array();
    for (const WellPerfSpec& p : w.perfs) {
      if (p.point)
        perfs.push_back({{"x", p.point->x()}, {"y", p.point->y()}});
      else
        perfs.push_back({{"fracture", p.fracture}, {"segment", p.segment}});
    }
    j["wells"].push_back({{"name", w.name},
                          {"bhp", w.bhp},
                          {"radius", w.rw},
                          {"perforations", perfs}});
  }
  j["time"] = {{"t_end", c.time.tEnd},
               {"dt0", c.time.dt0},
               {"growth", c.time.growth},
               {"cut", c.time.cut},
               {"easy_iters", c.time.easyIters},
               {"dt_min", c.time.dtMin},
               {"max_steps", c.time.maxSteps},
               {"newton_tol", c.time.newtonTol},
               {"newton_max", c.time.newtonMax},
               {"backtrack_max", c.time.backtrackMax}};
  j["output"] = {{"prefix", c.output.prefix},
                 {"vtk_times", c.output.vtkTimes},
                 {"series", c.output.series},
                 {"solver_log", c.output.solverLog}};
  if (c.sneddon) {
    j["sneddon"] = {{"center", {c.sneddon->center.x(), c.sneddon->center.y()}},
                    {"half_extent", c.sneddon->halfExtent},
                    {"angle_deg", c.sneddon->angleDeg},
                    {"pressure", c.sneddon->pressure},
                    {"elements", c.sneddon->elements}};
  }
  return j.dump(2);
}

}  // namespace efrac
