/**
 * @file Output.hpp
 * @brief Result files: legacy-ASCII VTK snapshots of the matrix grid and the
 *        fracture polylines, and CSV writers with full-precision numbers.
 */
#ifndef EFRAC_OUTPUT_HPP
#define EFRAC_OUTPUT_HPP

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "efrac/Fracture.hpp"
#include "efrac/Mesh.hpp"

namespace efrac {

using CellFields = std::vector<std::pair<std::string, std::vector<double>>>;
using PointVecFields = std::vector<std::pair<std::string, std::vector<Vec2>>>;

/// Quadrilateral grid with per-cell scalars and per-node vectors.
void writeMatrixVtk(const std::string& path, const Mesh& mesh,
                    const CellFields& cellFields,
                    const PointVecFields& pointFields);

/// Fracture segments as line cells with per-segment scalars.
void writeFractureVtk(const std::string& path, const CutCellMap& cut,
                      const CellFields& segFields);

/// CSV file with a fixed header; numbers print with 17 significant digits so
/// round-trips are exact.
class CsvWriter {
 public:
  CsvWriter() = default;
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  bool isOpen() const { return out_.is_open(); }

 private:
  std::ofstream out_;
};

}  // namespace efrac

#endif
