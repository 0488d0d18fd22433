/**
 * @file DofMap.hpp
 * @brief Global unknown layout: nodal displacements, enrichment modes,
 *        matrix and fracture pressures and saturations, in that block order.
 *
 * Mass-balance equations reuse the pressure/saturation index space: the
 * non-wetting balance of a cell sits on its pressure row, the wetting
 * balance on its saturation row; in single-phase mode only the wetting
 * balance exists and sits on the pressure row.
 */
#ifndef EFRAC_DOFMAP_HPP
#define EFRAC_DOFMAP_HPP

#include <vector>

#include "efrac/Enrichment.hpp"
#include "efrac/Fracture.hpp"
#include "efrac/Mesh.hpp"

namespace efrac {

enum class Block { U, W, Pm, Pf, Sm, Sf };

struct DofMapOptions {
  Scheme scheme = Scheme::EFEM0;
  bool mechanicsOnly = false;
  bool singlePhase = false;
};

class DofMap {
 public:
  DofMap(const Mesh& mesh, const CutCellMap& cut, const FractureNetwork& net,
         const DofMapOptions& opt);

  const DofMapOptions& options() const { return opt_; }
  int total() const { return total_; }
  int nU() const { return nU_; }
  int nW() const { return nW_; }
  int nPm() const { return nPm_; }
  int nPf() const { return nPf_; }
  int nSm() const { return nSm_; }
  int nSf() const { return nSf_; }

  int uDof(int node, int comp) const { return 2 * node + comp; }
  /// Enrichment dofs of one cut, aligned with CutModes mode order. The
  /// element-local schemes own consecutive dofs per cut; the nodal scheme
  /// shares dofs between cuts of the same fracture through common nodes.
  const std::vector<int>& wDofs(int cutId) const { return wDofs_[cutId]; }
  int pmDof(int cell) const { return pmBase_ + cell; }
  int pfDof(int seg) const { return pfBase_ + seg; }
  int smDof(int cell) const { return smBase_ + cell; }
  int sfDof(int seg) const { return sfBase_ + seg; }

  /// Equation row of a mass balance. phase: 0 = wetting, 1 = non-wetting.
  int massRowCell(int cell, int phase) const {
    if (opt_.singlePhase || phase == 1) return pmDof(cell);
    return smDof(cell);
  }
  int massRowSeg(int seg, int phase) const {
    if (opt_.singlePhase || phase == 1) return pfDof(seg);
    return sfDof(seg);
  }

  Block blockOf(int dof) const;
  /// Jump directions for nodal enrichment of a fracture.
  const std::array<Vec2, 2>& frame(int fracture) const {
    return frames_[fracture];
  }

  void fix(int dof, double value);
  bool isFixed(int dof) const { return fixed_[dof] != 0; }
  double fixedValue(int dof) const { return fixedValue_[dof]; }
  const std::vector<int>& fixedDofs() const { return fixedList_; }

 private:
  DofMapOptions opt_;
  int nU_ = 0, nW_ = 0, nPm_ = 0, nPf_ = 0, nSm_ = 0, nSf_ = 0, total_ = 0;
  int pmBase_ = 0, pfBase_ = 0, smBase_ = 0, sfBase_ = 0;
  std::vector<std::vector<int>> wDofs_;
  std::vector<std::array<Vec2, 2>> frames_;
  std::vector<uint8_t> fixed_;
  std::vector<double> fixedValue_;
  std::vector<int> fixedList_;
};

}  // namespace efrac

#endif
