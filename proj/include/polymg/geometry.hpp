// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POLYMG_GEOMETRY_HPP
#define POLYMG_GEOMETRY_HPP

#include <vector>
#include "polymg/basis.hpp"
#include "polymg/mesh.hpp"

namespace polymg
{

// Inverse Jacobian J^{-1} of the element map (J[i][j] = dx_i / dxi_j).
Tensor InverseJacobian(int dim, const Tensor &J, double &det);

// Physical gradient J^{-T} g_ref.
Point PhysicalGradient(int dim, const Tensor &inv_J, const Point &g_ref);

// Quadrature data of one element: physical points, JxW and inverse Jacobians.
struct CellQuadrature
{
  std::vector<Point> xi;
  std::vector<Point> x;
  std::vector<double> JxW;
  std::vector<Tensor> inv_J;
};

CellQuadrature ComputeCellQuadrature(const Mesh &mesh, Index k, const QuadratureRule &rule);

// Quadrature data of an interior face, with reference points on both sides. Points are
// a tensor Gauss rule on the plus side's reference face; normal is outward from plus.
struct FaceQuadrature
{
  std::vector<Point> xi_plus;
  std::vector<Point> xi_minus;
  std::vector<Point> x;
  std::vector<Point> normal;
  std::vector<double> JxW;
  std::vector<Tensor> inv_J_plus;
  std::vector<Tensor> inv_J_minus;
};

FaceQuadrature ComputeFaceQuadrature(const Mesh &mesh, const InteriorFace &face,
                                     int points_per_axis);

// Reference point on local face lf of a cell: coordinate lf/2 fixed to lf%2, the remaining
// coordinates taken from s in increasing axis order.
Point FacePoint(int dim, int local_face, double s0, double s1);

}  // namespace polymg

#endif  // POLYMG_GEOMETRY_HPP
