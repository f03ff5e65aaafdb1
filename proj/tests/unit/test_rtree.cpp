// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <set>
#include "catch2/catch_amalgamated.hpp"
#include "polymg/agglomeration.hpp"

using namespace polymg;

namespace
{

std::vector<BoundingBox> GridBoxes(int dim, int n)
{
  const Mesh m = Mesh::Structured(dim, {0, 0, 0}, {1, 1, 1}, {n, n, dim == 3 ? n : 1});
  std::vector<BoundingBox> boxes;
  for (Index k = 0; k < m.NumElements(); k++)
  {
    boxes.push_back(m.ElementBoundingBox(k));
  }
  return boxes;
}

// Naive depth-first oracle for leaf extraction: walk children recursively and collect the
// entries stored at level-0 nodes.
void OracleLeafs(const RTree &t, Index n, std::vector<Index> &out)
{
  const auto &node = t.GetNode(n);
  if (node.level == 0)
  {
    for (Index e : node.children)
    {
      out.push_back(e);
    }
    return;
  }
  for (Index c : node.children)
  {
    OracleLeafs(t, c, out);
  }
}

std::vector<std::vector<Index>> OracleGroups(const RTree &t, int l)
{
  std::vector<std::vector<Index>> groups;
  std::function<void(Index)> visit = [&](Index n)
  {
    if (t.GetNode(n).level == l)
    {
      groups.emplace_back();
      OracleLeafs(t, n, groups.back());
      return;
    }
    for (Index c : t.GetNode(n).children)
    {
      visit(c);
    }
  };
  visit(t.Root());
  return groups;
}

}  // namespace

TEST_CASE("r-tree on a 4x4 grid partitions the elements", "[rtree]")
{
  for (auto c : {RTree::Construction::Packed, RTree::Construction::RStarInsertion})
  {
    const RTree t(GridBoxes(2, 4), {2, 4}, c);
    CHECK(t.Validate().empty());
    const auto groups = t.ComputeAgglomerates(0);
    std::vector<int> count(16, 0);
    for (const auto &g : groups)
    {
      CHECK(g.size() <= 4);
      for (Index e : g)
      {
        count[e]++;
      }
    }
    CHECK(std::all_of(count.begin(), count.end(), [](int x) { return x == 1; }));
    // Depth-first oracle gives the same grouping in the same order.
    CHECK(groups == OracleGroups(t, 0));
  }
}

TEST_CASE("single box gives a height-one tree", "[rtree]")
{
  const RTree t(GridBoxes(2, 1), {2, 4});
  CHECK(t.Height() == 1);
  const auto groups = t.ComputeAgglomerates(0);
  REQUIRE(groups.size() == 1);
  CHECK(groups[0] == std::vector<Index>{0});
}

TEST_CASE("8x8 grid tree structure", "[rtree]")
{
  for (auto c : {RTree::Construction::Packed, RTree::Construction::RStarInsertion})
  {
    const RTree t(GridBoxes(2, 8), {2, 4}, c);
    CHECK(t.Height() >= 3);
    CHECK(t.Validate().empty());
    for (Index n = 0; n < t.NumNodes(); n++)
    {
      const auto &node = t.GetNode(n);
      if (n == t.Root() || node.children.empty())
      {
        continue;
      }
      CHECK(node.children.size() >= 2);
      CHECK(node.children.size() <= 4);
    }
    // The root level is a single agglomerate with every element.
    const auto top = t.ComputeAgglomerates(t.Height() - 1);
    REQUIRE(top.size() == 1);
    CHECK(top[0].size() == 64);
    for (int l = 0; l < t.Height(); l++)
    {
      CHECK(t.ComputeAgglomerates(l) == OracleGroups(t, l));
    }
  }
}

TEST_CASE("leaf extraction of a two-leaf node", "[rtree]")
{
  // Seven boxes along a line with (2, 4): the packed tree splits them into leaves of
  // sizes that sum to seven under one parent.
  std::vector<BoundingBox> boxes;
  for (int i = 0; i < 7; i++)
  {
    BoundingBox b = BoundingBox::Empty(2);
    b.Expand(Point{double(i), 0.0, 0.0});
    b.Expand(Point{double(i + 1), 1.0, 0.0});
    boxes.push_back(b);
  }
  const RTree t(boxes, {2, 4});
  REQUIRE(t.Height() == 2);
  const auto &root = t.GetNode(t.Root());
  CHECK(root.children.size() == 2);
  CHECK(t.ExtractLeafs(1, t.Root()).size() == 7);
  CHECK_THROWS(t.ExtractLeafs(0, t.Root()));
  CHECK_THROWS(t.NodesOnLevel(5));
}

TEST_CASE("invalid r-tree order is rejected", "[rtree]")
{
  CHECK_THROWS(RTree(GridBoxes(2, 2), {3, 4}));
  CHECK_THROWS(RTree(GridBoxes(2, 2), {0, 4}));
}

TEST_CASE("agglomeration hierarchy ratios and nesting", "[agglomeration]")
{
  const Mesh m2 = Mesh::Structured(2, {0, 0, 0}, {1, 1, 1}, {128, 128, 1});
  const AgglomerationHierarchy h2(m2, {2, 4}, 3);
  REQUIRE(h2.NumLevels() == 3);
  for (double r : h2.CoarseningRatios())
  {
    CHECK(r >= 3.5);
    CHECK(r <= 4.5);
  }
  CHECK(h2.Validate(m2).empty());

  const Mesh m3 = Mesh::Structured(3, {0, 0, 0}, {1, 1, 1}, {8, 8, 8});
  const AgglomerationHierarchy h3(m3, {4, 8}, 3);
  for (double r : h3.CoarseningRatios())
  {
    CHECK(r >= 7.0);
    CHECK(r <= 8.5);
  }
}

TEST_CASE("two-level hierarchy partitions the fine level", "[agglomeration]")
{
  const Mesh m = Mesh::Structured(2, {0, 0, 0}, {1, 1, 1}, {8, 8, 1});
  const AgglomerationHierarchy h(m, {2, 4}, 2);
  REQUIRE(h.NumLevels() == 2);
  const auto &fine = h.Level(0);
  REQUIRE(fine.parent.size() == 64);
  std::set<Index> parents(fine.parent.begin(), fine.parent.end());
  CHECK(static_cast<Index>(parents.size()) == h.Cardinality(1));
  for (Index e = 0; e < m.NumElements(); e++)
  {
    CHECK(h.Level(1).owner[e] == fine.parent[e]);
  }
}

TEST_CASE("too many requested levels are truncated with a warning", "[agglomeration]")
{
  const Mesh m = Mesh::Structured(2, {0, 0, 0}, {1, 1, 1}, {4, 4, 1});
  const AgglomerationHierarchy h(m, {2, 4}, 10);
  CHECK(h.Truncated());
  CHECK_FALSE(h.Warning().empty());
  CHECK(h.NumLevels() == h.TreeHeight() + 1);
  CHECK(h.Validate(m).empty());
}
