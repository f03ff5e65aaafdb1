// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#include "polymg/agglomeration.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace polymg
{

AgglomerationHierarchy::AgglomerationHierarchy(const Mesh &mesh, RTreeOrder order,
                                               int num_levels,
                                               RTree::Construction construction)
  : dim(mesh.Dimension()), requested_levels(num_levels)
{
  if (num_levels < 1)
  {
    throw std::invalid_argument("Hierarchy needs at least one level");
  }
  const Index ne = mesh.NumElements();
  std::vector<BoundingBox> boxes(ne);
  for (Index k = 0; k < ne; k++)
  {
    boxes[k] = mesh.ElementBoundingBox(k);
  }

  AgglomerationLevel fine;
  fine.agglomerates.resize(ne);
  fine.owner.resize(ne);
  for (Index k = 0; k < ne; k++)
  {
    fine.agglomerates[k] = {{k}, boxes[k]};
    fine.owner[k] = k;
  }
  levels.push_back(std::move(fine));
  if (num_levels == 1)
  {
    return;
  }

  const RTree tree(boxes, order, construction);
  tree_height = tree.Height();
  const int available = tree_height + 1;
  const int built = std::min(num_levels, available);
  if (built < num_levels)
  {
    warning = "requested " + std::to_string(num_levels) + " levels but the R-tree of height " +
              std::to_string(tree_height) + " supports only " + std::to_string(available);
  }

  // Position of each tree node within its level's depth-first ordering.
  std::vector<Index> position(tree.NumNodes(), -1);
  std::vector<std::vector<Index>> level_nodes(built);
  for (int k = 1; k < built; k++)
  {
    level_nodes[k] = tree.NodesOnLevel(k - 1);
    for (std::size_t i = 0; i < level_nodes[k].size(); i++)
    {
      position[level_nodes[k][i]] = static_cast<Index>(i);
    }
  }

  for (int k = 1; k < built; k++)
  {
    AgglomerationLevel lev;
    lev.owner.assign(ne, -1);
    const auto groups = tree.ComputeAgglomerates(k - 1);
    lev.agglomerates.resize(groups.size());
    for (std::size_t a = 0; a < groups.size(); a++)
    {
      Agglomerate &agg = lev.agglomerates[a];
      agg.elements = groups[a];
      std::sort(agg.elements.begin(), agg.elements.end());
      agg.box = BoundingBox::Empty(dim);
      for (Index e : agg.elements)
      {
        agg.box.Expand(boxes[e]);
        lev.owner[e] = static_cast<Index>(a);
      }
    }
    levels.push_back(std::move(lev));
  }

  // Parent maps: fine elements map to their leaf, tree nodes to their parent node.
  for (int k = 0; k + 1 < built; k++)
  {
    auto &lev = levels[k];
    lev.parent.resize(lev.agglomerates.size());
    for (std::size_t a = 0; a < lev.agglomerates.size(); a++)
    {
      if (k == 0)
      {
        lev.parent[a] = levels[1].owner[static_cast<Index>(a)];
      }
      else
      {
        lev.parent[a] = position[tree.GetNode(level_nodes[k][a]).parent];
      }
    }
  }
}

std::vector<double> AgglomerationHierarchy::CoarseningRatios() const
{
  std::vector<double> r;
  for (int l = 1; l < NumLevels(); l++)
  {
    r.push_back(static_cast<double>(Cardinality(l - 1)) / Cardinality(l));
  }
  return r;
}

void AgglomerationHierarchy::Write(std::ostream &out) const
{
  for (int l = 0; l < NumLevels(); l++)
  {
    const auto &lev = levels[l];
    for (std::size_t a = 0; a < lev.agglomerates.size(); a++)
    {
      const auto &agg = lev.agglomerates[a];
      out << l << ' ' << a << ' ' << (lev.parent.empty() ? -1 : lev.parent[a]) << ' '
          << agg.elements.size();
      for (Index e : agg.elements)
      {
        out << ' ' << e;
      }
      out << '\n';
    }
  }
}

std::string AgglomerationHierarchy::Validate(const Mesh &mesh) const
{
  const Index ne = mesh.NumElements();
  for (int l = 0; l < NumLevels(); l++)
  {
    const auto &lev = levels[l];
    const std::string where = "level " + std::to_string(l) + ": ";
    std::vector<Index> all;
    for (std::size_t a = 0; a < lev.agglomerates.size(); a++)
    {
      const auto &agg = lev.agglomerates[a];
      if (agg.elements.empty())
      {
        return where + "empty agglomerate";
      }
      for (Index e : agg.elements)
      {
        all.push_back(e);
        if (lev.owner[e] != static_cast<Index>(a))
        {
          return where + "owner map inconsistent";
        }
        if (!agg.box.Contains(mesh.ElementBoundingBox(e)))
        {
          return where + "agglomerate box misses element " + std::to_string(e);
        }
      }
    }
    std::sort(all.begin(), all.end());
    if (static_cast<Index>(all.size()) != ne ||
        std::adjacent_find(all.begin(), all.end()) != all.end())
    {
      return where + "agglomerates do not partition the elements";
    }
    if (l + 1 < NumLevels())
    {
      // Children of each coarse agglomerate must reproduce its member list.
      const auto &coarse = levels[l + 1];
      std::vector<std::vector<Index>> merged(coarse.agglomerates.size());
      for (std::size_t a = 0; a < lev.agglomerates.size(); a++)
      {
        const Index p = lev.parent[a];
        if (p < 0 || p >= static_cast<Index>(merged.size()))
        {
          return where + "parent map not total";
        }
        const auto &el = lev.agglomerates[a].elements;
        merged[p].insert(merged[p].end(), el.begin(), el.end());
      }
      for (std::size_t c = 0; c < merged.size(); c++)
      {
        std::sort(merged[c].begin(), merged[c].end());
        if (merged[c] != coarse.agglomerates[c].elements)
        {
          return where + "coarse agglomerate " + std::to_string(c) +
                 " is not the union of its children";
        }
      }
    }
  }
  return {};
}

}  // namespace polymg
