// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POLYMG_RTREE_HPP
#define POLYMG_RTREE_HPP

#include <string>
#include <vector>
#include "polymg/mesh.hpp"

namespace polymg
{

// Minimum and maximum fill (m, M) of R-tree nodes.
struct RTreeOrder
{
  int min_entries = 2;
  int max_entries = 4;
};

// Default order for a given dimension: (2, 4) in 2D, (4, 8) in 3D.
RTreeOrder DefaultRTreeOrder(int dim);

//
// R-tree over a set of axis-aligned boxes. Level 0 holds the leaves, whose entries are
// the input box ids; the root sits on level Height() - 1. All leaves share one depth.
//
class RTree
{
public:
  enum class Construction
  {
    // Top-down packed bulk load: recursive median splits along the widest axis of the
    // entry centers, producing full nodes wherever the entry count allows it.
    Packed,
    // One-by-one insertion in input order with R*-style subtree choice and node split
    // (no forced reinsertion).
    RStarInsertion
  };

  struct Node
  {
    BoundingBox box;
    int level = 0;
    Index parent = -1;
    // Child node ids for internal nodes, box ids for leaves.
    std::vector<Index> children;
  };

  RTree(const std::vector<BoundingBox> &boxes, RTreeOrder order,
        Construction construction = Construction::Packed);

  int Height() const { return root < 0 ? 0 : nodes[root].level + 1; }
  Index Root() const { return root; }
  const Node &GetNode(Index n) const { return nodes[n]; }
  Index NumNodes() const { return static_cast<Index>(nodes.size()); }
  Index NumEntries() const { return num_entries; }
  RTreeOrder Order() const { return order; }

  // Nodes on level l in depth-first order from the root (children visited in stored order).
  std::vector<Index> NodesOnLevel(int l) const;

  // All entries below node n, which must lie on level l; depth-first order.
  std::vector<Index> ExtractLeafs(int l, Index n) const;

  // One entry list per node of N_l, in the order of NodesOnLevel(l).
  std::vector<std::vector<Index>> ComputeAgglomerates(int l) const;

  // Structural audit: fill bounds, MBR containment, uniform leaf depth and entry partition.
  // Returns an empty string when the tree is valid, otherwise a description of the first
  // violation.
  std::string Validate() const;

private:
  void BuildPacked();
  Index BuildPackedNode(std::vector<Index> &ids, std::size_t begin, std::size_t end,
                        int level, Index parent);
  void Insert(Index entry);
  Index ChooseLeaf(const BoundingBox &box) const;
  void SplitNode(Index n);
  const BoundingBox &ChildBox(const Node &node, Index child) const;
  void RecomputeUp(Index n);
  void CollectLeafs(Index n, std::vector<Index> &out) const;

  int dim = 0;
  RTreeOrder order;
  Index num_entries = 0;
  Index root = -1;
  std::vector<Node> nodes;
  std::vector<BoundingBox> entry_boxes;
};

}  // namespace polymg

#endif  // POLYMG_RTREE_HPP
