// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#include "polymg/dg_space.hpp"

#include <stdexcept>
#include <string>

namespace polymg
{

DGSpace::DGSpace(const Mesh &mesh_, int degree)
  : mesh(&mesh_), level(0), num_entities(mesh_.NumElements()),
    basis(mesh_.Dimension(), degree)
{
}

DGSpace::DGSpace(const Mesh &mesh_, const AgglomerationHierarchy &hierarchy, int level_,
                 int degree)
  : mesh(&mesh_), level(level_), num_entities(hierarchy.Cardinality(level_)),
    basis(mesh_.Dimension(), degree)
{
  if (hierarchy.Dimension() != mesh_.Dimension())
  {
    throw std::invalid_argument("Hierarchy and mesh dimensions differ");
  }
  if (level > 0)
  {
    const auto &lev = hierarchy.Level(level);
    boxes.reserve(num_entities);
    for (const auto &agg : lev.agglomerates)
    {
      boxes.push_back(agg.box);
    }
    owner = lev.owner;
  }
}

Offset DGSpace::TotalDofs(Offset entities, int degree, int dim)
{
  Offset n = entities;
  for (int d = 0; d < dim; d++)
  {
    n *= degree + 1;
  }
  return n;
}

Point DGSpace::ToReference(Index a, const Point &x) const
{
  if (level == 0)
  {
    auto xi = mesh->MapToReference(a, x);
    if (!xi)
    {
      throw std::runtime_error("Point could not be mapped to element " + std::to_string(a));
    }
    return *xi;
  }
  const BoundingBox &b = boxes[a];
  Point xi{0.0, 0.0, 0.0};
  for (int d = 0; d < Dimension(); d++)
  {
    xi[d] = (x[d] - b.lo[d]) / (b.hi[d] - b.lo[d]);
  }
  return xi;
}

Point DGSpace::SupportPoint(Index dof) const
{
  const Index a = dof / DofsPerEntity();
  const Point xi = basis.SupportNode(dof % DofsPerEntity());
  if (level == 0)
  {
    return mesh->MapToPhysical(a, xi);
  }
  const BoundingBox &b = boxes[a];
  Point x{0.0, 0.0, 0.0};
  for (int d = 0; d < Dimension(); d++)
  {
    x[d] = b.lo[d] + xi[d] * (b.hi[d] - b.lo[d]);
  }
  return x;
}

void DGSpace::EvaluateBasis(Index a, const Point &x, std::span<double> out) const
{
  basis.Values(ToReference(a, x), out);
}

std::vector<double> DGSpace::AgglomerateLocalToFineEval(Index a, Index fine_element,
                                                        const Point &xi) const
{
  if (a < 0 || a >= num_entities || fine_element < 0 || fine_element >= mesh->NumElements())
  {
    throw std::invalid_argument("Entity id out of range");
  }
  if (OwnerOf(fine_element) != a)
  {
    throw std::invalid_argument("Element " + std::to_string(fine_element) +
                                " is not a member of agglomerate " + std::to_string(a));
  }
  std::vector<double> out(DofsPerEntity());
  if (level == 0)
  {
    basis.Values(xi, out);
  }
  else
  {
    basis.Values(ToReference(a, mesh->MapToPhysical(fine_element, xi)), out);
  }
  return out;
}

Vector DGSpace::Interpolate(const std::function<double(const Point &)> &f) const
{
  Vector u(TotalDofs());
  for (Index i = 0; i < TotalDofs(); i++)
  {
    u[i] = f(SupportPoint(i));
  }
  return u;
}

double DGSpace::Evaluate(std::span<const double> u, Index a, const Point &x) const
{
  std::vector<double> phi(DofsPerEntity());
  EvaluateBasis(a, x, phi);
  double v = 0.0;
  for (int i = 0; i < DofsPerEntity(); i++)
  {
    v += u[static_cast<std::size_t>(a) * DofsPerEntity() + i] * phi[i];
  }
  return v;
}

}  // namespace polymg
