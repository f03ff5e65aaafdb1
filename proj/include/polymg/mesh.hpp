// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POLYMG_MESH_HPP
#define POLYMG_MESH_HPP

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>
#include "polymg/common.hpp"

namespace polymg
{

//
// Axis-aligned d-dimensional box. Used as element/agglomerate minimum bounding rectangle
// and as the key of R-tree nodes.
//
struct BoundingBox
{
  int dim = 0;
  Point lo{0.0, 0.0, 0.0};
  Point hi{0.0, 0.0, 0.0};

  // Box containing nothing; expanding it by any box yields that box.
  static BoundingBox Empty(int dim);

  void Expand(const BoundingBox &other);
  void Expand(const Point &p);
  bool Contains(const BoundingBox &other, double tol = 0.0) const;
  bool Contains(const Point &p, double tol = 0.0) const;

  // d-dimensional measure of the box.
  double Volume() const;

  // Sum of edge lengths (R*-tree "margin").
  double Margin() const;

  // Measure of the intersection with another box (0 when disjoint).
  double OverlapVolume(const BoundingBox &other) const;
  Point Center() const;
  double Extent(int axis) const { return hi[axis] - lo[axis]; }
};

BoundingBox Union(const BoundingBox &a, const BoundingBox &b);

// Interior face shared by two elements. The face normal used in the DG forms is the
// outward normal of the "plus" element.
struct InteriorFace
{
  Index plus, minus;
  int face_plus, face_minus;
};

struct BoundaryFace
{
  Index element;
  int face;
};

//
// Conforming quadrilateral (d = 2) or hexahedral (d = 3) mesh. Element corners are stored
// in lexicographic order (x fastest) and local faces are numbered (-x, +x, -y, +y, -z, +z).
// Faces are derived from the element connectivity at construction. Immutable afterwards.
//
class Mesh
{
public:
  Mesh(int dim, std::vector<Point> vertices, std::vector<Index> element_corners);

  // Cartesian mesh of the box [lo, hi] with the given number of cells per axis.
  static Mesh Structured(int dim, const Point &lo, const Point &hi,
                         const std::array<int, 3> &subdivisions);

  // Plain-text format: "dim n_vertices n_elements", then vertex coordinates, then element
  // corner indices (0-based, lexicographic).
  static Mesh Read(std::istream &in);
  void Write(std::ostream &out) const;

  int Dimension() const { return dim; }
  int CornersPerElement() const { return 1 << dim; }
  int FacesPerElement() const { return 2 * dim; }
  Index NumVertices() const { return static_cast<Index>(vertices.size()); }
  Index NumElements() const { return num_elements; }
  Index NumInteriorFaces() const { return static_cast<Index>(interior_faces.size()); }
  Index NumBoundaryFaces() const { return static_cast<Index>(boundary_faces.size()); }

  const std::vector<Point> &Vertices() const { return vertices; }
  std::span<const Index> ElementCorners(Index k) const;
  const Point &Corner(Index k, int c) const;
  const std::vector<InteriorFace> &InteriorFaces() const { return interior_faces; }
  const std::vector<BoundaryFace> &BoundaryFaces() const { return boundary_faces; }

  // Neighbor across local face f of element k, or -1 on the boundary.
  Index Neighbor(Index k, int f) const { return neighbors[k * FacesPerElement() + f]; }

  // True if the element map is x = lo + diag(h) xi with h > 0.
  bool IsBox(Index k) const { return is_box[k] != 0; }
  bool AllBoxes() const { return all_boxes; }

  // Measures |K|_d and |F|_{d-1}. Face ids: [0, NumInteriorFaces()) are interior faces,
  // the following NumBoundaryFaces() ids are boundary faces.
  double ElementMeasure(Index k) const;
  double FaceMeasure(Index f) const;
  double LocalFaceMeasure(Index k, int local_face) const;
  BoundingBox ElementBoundingBox(Index k) const;

  // Multilinear element map and its Jacobian (dx_i / dxi_j, stored J[i][j]).
  Point MapToPhysical(Index k, const Point &xi) const;
  Tensor Jacobian(Index k, const Point &xi) const;

  // Inverse of the element map (Newton for non-box elements); nullopt if the iteration
  // fails to converge.
  std::optional<Point> MapToReference(Index k, const Point &x) const;

  // Outward unit normal of local face f of element k at the reference point xi (which
  // must lie on that face).
  Point OutwardNormal(Index k, int local_face, const Point &xi) const;

  // Element containing x (first hit in index order), or -1.
  Index FindElement(const Point &x, double tol = 1e-12) const;

  BoundingBox DomainBoundingBox() const;

private:
  void BuildFaces();

  int dim;
  Index num_elements;
  std::vector<Point> vertices;
  std::vector<Index> corners;
  std::vector<InteriorFace> interior_faces;
  std::vector<BoundaryFace> boundary_faces;
  std::vector<Index> neighbors;
  std::vector<char> is_box;
  bool all_boxes = true;
};

// Corners (local indices) of local face f, in lexicographic order of the remaining axes.
std::vector<int> LocalFaceCorners(int dim, int local_face);

}  // namespace polymg

#endif  // POLYMG_MESH_HPP
