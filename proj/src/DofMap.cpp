#include "efrac/DofMap.hpp"

#include <map>

namespace efrac {

DofMap::DofMap(const Mesh& mesh, const CutCellMap& cut,
               const FractureNetwork& net, const DofMapOptions& opt)
    : opt_(opt) {
  nU_ = 2 * mesh.nodeCount();
  wDofs_.resize(cut.cuts.size());
  frames_.resize(net.size());
  for (size_t f = 0; f < net.size(); ++f) {
    frames_[f] = xfemFrame(net, static_cast<int>(f));
  }

  const int wBase = nU_;
  if (opt.scheme == Scheme::XFEM) {
    // One dof pair per (fracture, node of a cut cell); cuts of the same
    // fracture meeting at a node share them.
    std::map<std::pair<int, int>, int> nodeBase;
    int next = wBase;
    for (size_t c = 0; c < cut.cuts.size(); ++c) {
      const CellCut& cc = cut.cuts[c];
      const auto nodes = mesh.cellNodes(cc.cell);
      wDofs_[c].resize(8);
      for (int a = 0; a < 4; ++a) {
        auto [it, inserted] =
            nodeBase.try_emplace({cc.fracture, nodes[a]}, next);
        if (inserted) next += 2;
        wDofs_[c][2 * a] = it->second;
        wDofs_[c][2 * a + 1] = it->second + 1;
      }
    }
    nW_ = next - wBase;
  } else {
    const int modes = opt.scheme == Scheme::EFEM0 ? 2 : 4;
    int next = wBase;
    for (size_t c = 0; c < cut.cuts.size(); ++c) {
      wDofs_[c].resize(modes);
      for (int b = 0; b < modes; ++b) wDofs_[c][b] = next++;
    }
    nW_ = next - wBase;
  }

  const int nCells = mesh.cellCount();
  const int nSegs = static_cast<int>(cut.segments.size());
  if (!opt.mechanicsOnly) {
    nPm_ = nCells;
    nPf_ = nSegs;
    if (!opt.singlePhase) {
      nSm_ = nCells;
      nSf_ = nSegs;
    }
  }
  pmBase_ = nU_ + nW_;
  pfBase_ = pmBase_ + nPm_;
  smBase_ = pfBase_ + nPf_;
  sfBase_ = smBase_ + nSm_;
  total_ = sfBase_ + nSf_;

  fixed_.assign(total_, 0);
  fixedValue_.assign(total_, 0.0);
}

Block DofMap::blockOf(int dof) const {
  if (dof < nU_) return Block::U;
  if (dof < pmBase_) return Block::W;
  if (dof < pfBase_) return Block::Pm;
  if (dof < smBase_) return Block::Pf;
  if (dof < sfBase_) return Block::Sm;
  return Block::Sf;
}

void DofMap::fix(int dof, double value) {
  if (!fixed_[dof]) fixedList_.push_back(dof);
  fixed_[dof] = 1;
  fixedValue_[dof] = value;
}

}  // namespace efrac
