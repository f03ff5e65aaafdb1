// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POLYMG_DG_SPACE_HPP
#define POLYMG_DG_SPACE_HPP

#include <functional>
#include <span>
#include <vector>
#include "polymg/agglomeration.hpp"
#include "polymg/basis.hpp"
#include "polymg/mesh.hpp"

namespace polymg
{

//
// Discontinuous Q_p space on one level of the hierarchy. On level 0 the entities are mesh
// elements and the basis lives on each element's reference cell. On coarser levels the
// entities are agglomerates and the basis is Q_p on the agglomerate's bounding box,
// restricted to the agglomerate. DoFs are entity-major: entity a owns the contiguous range
// [a (p+1)^d, (a+1) (p+1)^d).
//
class DGSpace
{
public:
  // Level-0 space on the mesh elements.
  DGSpace(const Mesh &mesh, int degree);

  // Space on level l of the hierarchy; l = 0 gives the element space.
  DGSpace(const Mesh &mesh, const AgglomerationHierarchy &hierarchy, int level, int degree);
  // The space keeps a pointer to the mesh, which must outlive it.
  DGSpace(Mesh &&, int) = delete;
  DGSpace(Mesh &&, const AgglomerationHierarchy &, int, int) = delete;

  static Offset TotalDofs(Offset entities, int degree, int dim);

  int Level() const { return level; }
  int Degree() const { return basis.Degree(); }
  int Dimension() const { return basis.Dimension(); }
  Index NumEntities() const { return num_entities; }
  int DofsPerEntity() const { return basis.NumFunctions(); }
  Index TotalDofs() const { return num_entities * DofsPerEntity(); }
  const TensorBasis &Basis() const { return basis; }
  const Mesh &GetMesh() const { return *mesh; }

  // Bounding box carrying the basis of a coarse entity (level >= 1).
  const BoundingBox &EntityBox(Index a) const { return boxes.at(a); }

  // Entity owning a fine element (identity on level 0).
  Index OwnerOf(Index element) const { return level == 0 ? element : owner[element]; }

  // Physical support node of a DoF.
  Point SupportPoint(Index dof) const;

  // Values of all basis functions of entity a at physical point x. On level 0 the point
  // is mapped back to the element's reference cell.
  void EvaluateBasis(Index a, const Point &x, std::span<double> out) const;

  // Values of the coarse basis of agglomerate a at the image of the fine element's
  // reference point xi. Throws if the element is not a member of a.
  std::vector<double> AgglomerateLocalToFineEval(Index a, Index fine_element,
                                                 const Point &xi) const;

  // Nodal interpolant of f.
  Vector Interpolate(const std::function<double(const Point &)> &f) const;

  // Value of the finite element function u at physical point x inside entity a.
  double Evaluate(std::span<const double> u, Index a, const Point &x) const;

private:
  Point ToReference(Index a, const Point &x) const;

  const Mesh *mesh;
  int level;
  Index num_entities;
  TensorBasis basis;
  std::vector<BoundingBox> boxes;
  std::vector<Index> owner;
};

}  // namespace polymg

#endif  // POLYMG_DG_SPACE_HPP
