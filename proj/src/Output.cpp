/**
 * @file Output.cpp
 * @brief VTK and CSV writers.
 */
#include "efrac/Output.hpp"

#include <cstdio>

#include "efrac/Errors.hpp"

namespace efrac {

namespace {

void printNum(std::ofstream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

std::ofstream openOut(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

void writeMatrixVtk(const std::string& path, const Mesh& mesh,
                    const CellFields& cellFields,
                    const PointVecFields& pointFields) {
  std::ofstream out = openOut(path);
  out << "# vtk DataFile Version 3.0\nmatrix\nASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.nodeCount() << " double\n";
  for (int a = 0; a < mesh.nodeCount(); ++a) {
    const Vec2 p = mesh.node(a);
    printNum(out, p.x());
    out << ' ';
    printNum(out, p.y());
    out << " 0\n";
  }
  out << "CELLS " << mesh.cellCount() << ' ' << 5 * mesh.cellCount() << '\n';
  for (int c = 0; c < mesh.cellCount(); ++c) {
    const auto n = mesh.cellNodes(c);
    out << "4 " << n[0] << ' ' << n[1] << ' ' << n[2] << ' ' << n[3] << '\n';
  }
  out << "CELL_TYPES " << mesh.cellCount() << '\n';
  for (int c = 0; c < mesh.cellCount(); ++c) out << "9\n";
  if (!cellFields.empty()) {
    out << "CELL_DATA " << mesh.cellCount() << '\n';
    for (const auto& [name, vals] : cellFields) {
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : vals) {
        printNum(out, v);
        out << '\n';
      }
    }
  }
  if (!pointFields.empty()) {
    out << "POINT_DATA " << mesh.nodeCount() << '\n';
    for (const auto& [name, vals] : pointFields) {
      out << "VECTORS " << name << " double\n";
      for (const Vec2& v : vals) {
        printNum(out, v.x());
        out << ' ';
        printNum(out, v.y());
        out << " 0\n";
      }
    }
  }
}

void writeFractureVtk(const std::string& path, const CutCellMap& cut,
                      const CellFields& segFields) {
  std::ofstream out = openOut(path);
  const int ns = static_cast<int>(cut.segments.size());
  out << "# vtk DataFile Version 3.0\nfractures\nASCII\n"
      << "DATASET POLYDATA\n";
  out << "POINTS " << 2 * ns << " double\n";
  for (const FractureSegment& s : cut.segments) {
    for (const Vec2& p : {s.p0, s.p1}) {
      printNum(out, p.x());
      out << ' ';
      printNum(out, p.y());
      out << " 0\n";
    }
  }
  out << "LINES " << ns << ' ' << 3 * ns << '\n';
  for (int s = 0; s < ns; ++s)
    out << "2 " << 2 * s << ' ' << 2 * s + 1 << '\n';
  if (!segFields.empty()) {
    out << "CELL_DATA " << ns << '\n';
    for (const auto& [name, vals] : segFields) {
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : vals) {
        printNum(out, v);
        out << '\n';
      }
    }
  }
}

CsvWriter::CsvWriter(const std::string& path,
                     const std::vector<std::string>& header) {
  out_ = openOut(path);
  for (size_t i = 0; i < header.size(); ++i)
    out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out_ << ',';
    printNum(out_, values[i]);
  }
  out_ << '\n';
  out_.flush();
}

}  // namespace efrac
