// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#include "polymg/rtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace polymg
{

RTreeOrder DefaultRTreeOrder(int dim)
{
  return dim == 3 ? RTreeOrder{4, 8} : RTreeOrder{2, 4};
}

RTree::RTree(const std::vector<BoundingBox> &boxes, RTreeOrder order_,
             Construction construction)
  : order(order_), entry_boxes(boxes)
{
  if (boxes.empty())
  {
    throw std::invalid_argument("R-tree needs at least one box");
  }
  if (order.max_entries < 2 || order.min_entries < 1 ||
      order.min_entries > (order.max_entries + 1) / 2)
  {
    throw std::invalid_argument("R-tree order must satisfy 1 <= m <= ceil(M/2), M >= 2");
  }
  dim = boxes.front().dim;
  for (const auto &b : boxes)
  {
    if (b.dim != dim)
    {
      throw std::invalid_argument("R-tree boxes must share one dimension");
    }
  }
  num_entries = static_cast<Index>(boxes.size());
  if (construction == Construction::Packed)
  {
    BuildPacked();
  }
  else
  {
    root = 0;
    nodes.push_back({BoundingBox::Empty(dim), 0, -1, {}});
    for (Index e = 0; e < num_entries; e++)
    {
      Insert(e);
    }
  }
}

const BoundingBox &RTree::ChildBox(const Node &node, Index child) const
{
  return node.level == 0 ? entry_boxes[child] : nodes[child].box;
}

void RTree::RecomputeUp(Index n)
{
  while (n >= 0)
  {
    Node &node = nodes[n];
    node.box = BoundingBox::Empty(dim);
    for (Index c : node.children)
    {
      node.box.Expand(ChildBox(node, c));
    }
    n = node.parent;
  }
}

void RTree::BuildPacked()
{
  const Offset M = order.max_entries;
  int height = 1;
  for (Offset cap = M; cap < num_entries; cap *= M)
  {
    height++;
  }
  std::vector<Index> ids(num_entries);
  std::iota(ids.begin(), ids.end(), 0);
  nodes.reserve(2 * static_cast<std::size_t>(num_entries) / std::max<Offset>(M - 1, 1) + 2);
  root = BuildPackedNode(ids, 0, ids.size(), height - 1, -1);
}

Index RTree::BuildPackedNode(std::vector<Index> &ids, std::size_t begin, std::size_t end,
                             int level, Index parent)
{
  const Index id = static_cast<Index>(nodes.size());
  nodes.push_back({BoundingBox::Empty(dim), level, parent, {}});
  if (level == 0)
  {
    std::vector<Index> entries(ids.begin() + begin, ids.begin() + end);
    std::sort(entries.begin(), entries.end());
    for (Index e : entries)
    {
      nodes[id].box.Expand(entry_boxes[e]);
    }
    nodes[id].children = std::move(entries);
    return id;
  }

  Offset cap = 1;
  for (int i = 0; i < level; i++)
  {
    cap *= order.max_entries;
  }
  const std::size_t n = end - begin;
  const std::size_t groups = static_cast<std::size_t>((static_cast<Offset>(n) + cap - 1) / cap);

  // Split [b, e) into g balanced groups (sizes differ by at most one) by recursive median
  // cuts along the widest axis of the entry centers; ties broken by entry id.
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  auto partition = [&](auto &&self, std::size_t b, std::size_t e, std::size_t g) -> void
  {
    if (g == 1)
    {
      ranges.emplace_back(b, e);
      return;
    }
    const std::size_t cnt = e - b, g1 = g / 2;
    const std::size_t first = g1 * (cnt / g) + std::min(g1, cnt % g);
    BoundingBox centers = BoundingBox::Empty(dim);
    for (std::size_t i = b; i < e; i++)
    {
      centers.Expand(entry_boxes[ids[i]].Center());
    }
    int axis = 0;
    for (int d = 1; d < dim; d++)
    {
      if (centers.Extent(d) > centers.Extent(axis))
      {
        axis = d;
      }
    }
    std::sort(ids.begin() + b, ids.begin() + e,
              [&](Index x, Index y)
              {
                const double cx = entry_boxes[x].lo[axis] + entry_boxes[x].hi[axis];
                const double cy = entry_boxes[y].lo[axis] + entry_boxes[y].hi[axis];
                return cx != cy ? cx < cy : x < y;
              });
    self(self, b, b + first, g1);
    self(self, b + first, e, g - g1);
  };
  partition(partition, begin, end, groups);

  std::vector<Index> children;
  children.reserve(ranges.size());
  for (const auto &[b, e] : ranges)
  {
    children.push_back(BuildPackedNode(ids, b, e, level - 1, id));
  }
  for (Index c : children)
  {
    nodes[id].box.Expand(nodes[c].box);
  }
  nodes[id].children = std::move(children);
  return id;
}

Index RTree::ChooseLeaf(const BoundingBox &box) const
{
  Index n = root;
  while (nodes[n].level > 0)
  {
    const Node &node = nodes[n];
    const bool above_leaves = node.level == 1;
    Index best = -1;
    double best_overlap = 0.0, best_enlarge = 0.0, best_area = 0.0;
    for (Index c : node.children)
    {
      const BoundingBox &cb = nodes[c].box;
      const BoundingBox grown = Union(cb, box);
      const double area = cb.Volume();
      const double enlarge = grown.Volume() - area;
      double overlap = 0.0;
      if (above_leaves)
      {
        for (Index o : node.children)
        {
          if (o != c)
          {
            overlap += grown.OverlapVolume(nodes[o].box) - cb.OverlapVolume(nodes[o].box);
          }
        }
      }
      bool better = best < 0;
      if (!better)
      {
        if (overlap != best_overlap)
        {
          better = overlap < best_overlap;
        }
        else if (enlarge != best_enlarge)
        {
          better = enlarge < best_enlarge;
        }
        else if (area != best_area)
        {
          better = area < best_area;
        }
        else
        {
          better = c < best;
        }
      }
      if (better)
      {
        best = c;
        best_overlap = overlap;
        best_enlarge = enlarge;
        best_area = area;
      }
    }
    n = best;
  }
  return n;
}

void RTree::Insert(Index entry)
{
  const Index leaf = ChooseLeaf(entry_boxes[entry]);
  nodes[leaf].children.push_back(entry);
  for (Index n = leaf; n >= 0; n = nodes[n].parent)
  {
    nodes[n].box.Expand(entry_boxes[entry]);
  }
  if (static_cast<int>(nodes[leaf].children.size()) > order.max_entries)
  {
    SplitNode(leaf);
  }
}

void RTree::SplitNode(Index n)
{
  const int m = order.min_entries, M = order.max_entries;
  const std::vector<Index> items = nodes[n].children;
  const int count = static_cast<int>(items.size());
  const Node snapshot = nodes[n];

  auto sorted = [&](int axis, bool by_hi)
  {
    std::vector<Index> s = items;
    std::stable_sort(s.begin(), s.end(),
                     [&](Index a, Index b)
                     {
                       const BoundingBox &ba = ChildBox(snapshot, a), &bb = ChildBox(snapshot, b);
                       const double ka = by_hi ? ba.hi[axis] : ba.lo[axis];
                       const double kb = by_hi ? bb.hi[axis] : bb.lo[axis];
                       if (ka != kb)
                       {
                         return ka < kb;
                       }
                       const double la = by_hi ? ba.lo[axis] : ba.hi[axis];
                       const double lb = by_hi ? bb.lo[axis] : bb.hi[axis];
                       return la != lb ? la < lb : a < b;
                     });
    return s;
  };
  auto group_box = [&](const std::vector<Index> &s, int b, int e)
  {
    BoundingBox box = BoundingBox::Empty(dim);
    for (int i = b; i < e; i++)
    {
      box.Expand(ChildBox(snapshot, s[i]));
    }
    return box;
  };

  // Axis with the smallest total margin over all admissible distributions.
  int best_axis = 0;
  double best_margin = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < dim; axis++)
  {
    double margin = 0.0;
    for (bool by_hi : {false, true})
    {
      const auto s = sorted(axis, by_hi);
      for (int k = m; k <= M + 1 - m && k < count; k++)
      {
        margin += group_box(s, 0, k).Margin() + group_box(s, k, count).Margin();
      }
    }
    if (margin < best_margin)
    {
      best_margin = margin;
      best_axis = axis;
    }
  }

  std::vector<Index> best_order;
  int best_k = -1;
  double best_overlap = 0.0, best_area = 0.0;
  for (bool by_hi : {false, true})
  {
    const auto s = sorted(best_axis, by_hi);
    for (int k = m; k <= M + 1 - m && k < count; k++)
    {
      const BoundingBox b1 = group_box(s, 0, k), b2 = group_box(s, k, count);
      const double overlap = b1.OverlapVolume(b2), area = b1.Volume() + b2.Volume();
      if (best_k < 0 || overlap < best_overlap ||
          (overlap == best_overlap && area < best_area))
      {
        best_k = k;
        best_overlap = overlap;
        best_area = area;
        best_order = s;
      }
    }
  }

  const Index sibling = static_cast<Index>(nodes.size());
  nodes.push_back({BoundingBox::Empty(dim), snapshot.level, snapshot.parent, {}});
  nodes[n].children.assign(best_order.begin(), best_order.begin() + best_k);
  nodes[sibling].children.assign(best_order.begin() + best_k, best_order.end());
  if (snapshot.level > 0)
  {
    for (Index c : nodes[sibling].children)
    {
      nodes[c].parent = sibling;
    }
  }

  if (snapshot.parent < 0)
  {
    const Index new_root = static_cast<Index>(nodes.size());
    nodes.push_back({BoundingBox::Empty(dim), snapshot.level + 1, -1, {n, sibling}});
    nodes[n].parent = new_root;
    nodes[sibling].parent = new_root;
    root = new_root;
    RecomputeUp(n);
    RecomputeUp(sibling);
    return;
  }
  auto &siblings = nodes[snapshot.parent].children;
  siblings.insert(std::find(siblings.begin(), siblings.end(), n) + 1, sibling);
  RecomputeUp(n);
  RecomputeUp(sibling);
  if (static_cast<int>(siblings.size()) > M)
  {
    SplitNode(snapshot.parent);
  }
}

std::vector<Index> RTree::NodesOnLevel(int l) const
{
  if (l < 0 || l >= Height())
  {
    throw std::invalid_argument("R-tree level " + std::to_string(l) + " out of range [0, " +
                                std::to_string(Height() - 1) + "]");
  }
  std::vector<Index> out, stack{root};
  while (!stack.empty())
  {
    const Index n = stack.back();
    stack.pop_back();
    if (nodes[n].level == l)
    {
      out.push_back(n);
      continue;
    }
    const auto &ch = nodes[n].children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it)
    {
      stack.push_back(*it);
    }
  }
  return out;
}

void RTree::CollectLeafs(Index n, std::vector<Index> &out) const
{
  const Node &node = nodes[n];
  if (node.level == 0)
  {
    out.insert(out.end(), node.children.begin(), node.children.end());
    return;
  }
  for (Index c : node.children)
  {
    CollectLeafs(c, out);
  }
}

std::vector<Index> RTree::ExtractLeafs(int l, Index n) const
{
  if (n < 0 || n >= NumNodes() || nodes[n].level != l)
  {
    throw std::invalid_argument("Node " + std::to_string(n) + " is not on level " +
                                std::to_string(l));
  }
  std::vector<Index> out;
  CollectLeafs(n, out);
  return out;
}

std::vector<std::vector<Index>> RTree::ComputeAgglomerates(int l) const
{
  std::vector<std::vector<Index>> v;
  for (Index n : NodesOnLevel(l))
  {
    v.push_back(ExtractLeafs(l, n));
  }
  return v;
}

std::string RTree::Validate() const
{
  if (root < 0)
  {
    return "tree has no root";
  }
  std::vector<int> seen(num_entries, 0);
  std::vector<Index> stack{root};
  while (!stack.empty())
  {
    const Index n = stack.back();
    stack.pop_back();
    const Node &node = nodes[n];
    const int size = static_cast<int>(node.children.size());
    const std::string where = "node " + std::to_string(n) + ": ";
    if (size > order.max_entries)
    {
      return where + "more than M children";
    }
    if (n == root)
    {
      if (node.level > 0 && size < 2)
      {
        return where + "internal root with fewer than 2 children";
      }
      if (size < 1)
      {
        return where + "empty root";
      }
    }
    else if (size < order.min_entries)
    {
      return where + "fewer than m children";
    }
    for (Index c : node.children)
    {
      if (node.level == 0)
      {
        if (c < 0 || c >= num_entries || seen[c]++)
        {
          return where + "entry " + std::to_string(c) + " invalid or repeated";
        }
      }
      else
      {
        if (nodes[c].level != node.level - 1 || nodes[c].parent != n)
        {
          return where + "inconsistent child level or parent link";
        }
        stack.push_back(c);
      }
      if (!node.box.Contains(ChildBox(node, c)))
      {
        return where + "box does not contain child " + std::to_string(c);
      }
    }
  }
  for (Index e = 0; e < num_entries; e++)
  {
    if (!seen[e])
    {
      return "entry " + std::to_string(e) + " missing from the leaves";
    }
  }
  return {};
}

}  // namespace polymg
