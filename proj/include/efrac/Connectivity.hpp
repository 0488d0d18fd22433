/**
 * @file Connectivity.hpp
 * @brief Finite-volume connection lists: cell-cell, cell-fracture,
 *        fracture-fracture, and boundary connections with the constant
 *        geometric parts of their two-point transmissibilities.
 *
 * Fracture permeability depends on the hydraulic aperture, so connections
 * touching fractures store geometry only; the aperture-dependent composition
 * happens at assembly time.
 */
#ifndef EFRAC_CONNECTIVITY_HPP
#define EFRAC_CONNECTIVITY_HPP

#include <vector>

#include "efrac/Fracture.hpp"
#include "efrac/Mesh.hpp"

namespace efrac {

struct ConnectivitySets {
  /// Cell-cell connection across an interior face; T is the full two-point
  /// transmissibility (harmonic of the half-cell parts), permeability
  /// included.
  struct MM {
    int J, K;
    double T;
  };

  /// Cell-segment exchange. T(kf) = A * kapN * kf / (kapN + kf) with
  /// A = |k| / <d>, kapN the matrix permeability normal to the fracture.
  struct MF {
    int cell, seg;
    double A, kapN;
  };

  /// Segment-segment connection through a shared endpoint. Each side
  /// contributes T_i = a_c * kf_i / d_i with the half-distance d_i from the
  /// segment midpoint to the joint; a_c is the mean hydraulic aperture.
  struct FF {
    int a, b;
    double da, db;
  };

  /// Boundary face of a cell; Thalf is the half-transmissibility used by
  /// Dirichlet pressure conditions collocated at the face center.
  struct EM {
    int cell;
    Side side;
    double Thalf;
    double area;
    Vec2 center;
  };

  std::vector<MM> mm;
  std::vector<MF> mf;
  std::vector<FF> ff;
  std::vector<EM> em;
};

/// Builds all connection lists; kx/ky are per-cell permeabilities [m^2].
ConnectivitySets buildConnectivity(const Mesh& mesh, const CutCellMap& cut,
                                   const std::vector<double>& kx,
                                   const std::vector<double>& ky);

}  // namespace efrac

#endif
