// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POLYMG_AGGLOMERATION_HPP
#define POLYMG_AGGLOMERATION_HPP

#include <iosfwd>
#include <string>
#include <vector>
#include "polymg/mesh.hpp"
#include "polymg/rtree.hpp"

namespace polymg
{

// Union of fine elements, with the MBR of its members.
struct Agglomerate
{
  std::vector<Index> elements;  // sorted ascending
  BoundingBox box;
};

struct AgglomerationLevel
{
  std::vector<Agglomerate> agglomerates;
  // Agglomerate id on the next coarser level; empty on the coarsest level.
  std::vector<Index> parent;
  // Agglomerate id owning each fine element.
  std::vector<Index> owner;
};

//
// Nested sequence of agglomerated meshes. Level 0 is the fine mesh itself (one singleton
// agglomerate per element, in element order); level k >= 1 groups elements by the R-tree
// nodes on tree level k - 1, ordered depth-first.
//
class AgglomerationHierarchy
{
public:
  AgglomerationHierarchy(const Mesh &mesh, RTreeOrder order, int num_levels,
                         RTree::Construction construction = RTree::Construction::Packed);

  int NumLevels() const { return static_cast<int>(levels.size()); }
  int RequestedLevels() const { return requested_levels; }

  // True if fewer levels than requested were available in the tree.
  bool Truncated() const { return NumLevels() < requested_levels; }
  const std::string &Warning() const { return warning; }

  const AgglomerationLevel &Level(int l) const { return levels.at(l); }
  Index Cardinality(int l) const
  {
    return static_cast<Index>(levels.at(l).agglomerates.size());
  }

  // Card(T_{l-1}) / Card(T_l) for l = 1..NumLevels()-1.
  std::vector<double> CoarseningRatios() const;

  int TreeHeight() const { return tree_height; }
  int Dimension() const { return dim; }

  // One line per agglomerate: "level id parent_id n_members member_ids...", parent_id = -1
  // on the coarsest level.
  void Write(std::ostream &out) const;

  // Partition, nestedness and MBR containment audit; empty string when valid.
  std::string Validate(const Mesh &mesh) const;

private:
  int dim = 0;
  int requested_levels = 0;
  int tree_height = 0;
  std::string warning;
  std::vector<AgglomerationLevel> levels;
};

}  // namespace polymg

#endif  // POLYMG_AGGLOMERATION_HPP
