// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#include "polymg/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace polymg
{

Tensor InverseJacobian(int dim, const Tensor &J, double &det)
{
  Tensor inv{};
  if (dim == 2)
  {
    det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    inv[0][0] = J[1][1] / det;
    inv[0][1] = -J[0][1] / det;
    inv[1][0] = -J[1][0] / det;
    inv[1][1] = J[0][0] / det;
    return inv;
  }
  inv[0][0] = J[1][1] * J[2][2] - J[1][2] * J[2][1];
  inv[0][1] = J[0][2] * J[2][1] - J[0][1] * J[2][2];
  inv[0][2] = J[0][1] * J[1][2] - J[0][2] * J[1][1];
  inv[1][0] = J[1][2] * J[2][0] - J[1][0] * J[2][2];
  inv[1][1] = J[0][0] * J[2][2] - J[0][2] * J[2][0];
  inv[1][2] = J[0][2] * J[1][0] - J[0][0] * J[1][2];
  inv[2][0] = J[1][0] * J[2][1] - J[1][1] * J[2][0];
  inv[2][1] = J[0][1] * J[2][0] - J[0][0] * J[2][1];
  inv[2][2] = J[0][0] * J[1][1] - J[0][1] * J[1][0];
  det = J[0][0] * inv[0][0] + J[0][1] * inv[1][0] + J[0][2] * inv[2][0];
  for (auto &row : inv)
  {
    for (auto &v : row)
    {
      v /= det;
    }
  }
  return inv;
}

Point PhysicalGradient(int dim, const Tensor &inv_J, const Point &g_ref)
{
  Point g{0.0, 0.0, 0.0};
  for (int i = 0; i < dim; i++)
  {
    for (int j = 0; j < dim; j++)
    {
      g[i] += inv_J[j][i] * g_ref[j];
    }
  }
  return g;
}

Point FacePoint(int dim, int local_face, double s0, double s1)
{
  const int dir = local_face / 2;
  Point xi{0.0, 0.0, 0.0};
  const double s[2] = {s0, s1};
  int t = 0;
  for (int d = 0; d < dim; d++)
  {
    xi[d] = d == dir ? static_cast<double>(local_face % 2) : s[t++];
  }
  return xi;
}

CellQuadrature ComputeCellQuadrature(const Mesh &mesh, Index k, const QuadratureRule &rule)
{
  const int dim = mesh.Dimension();
  const std::size_t nq = rule.points.size();
  CellQuadrature q;
  q.xi = rule.points;
  q.x.resize(nq);
  q.JxW.resize(nq);
  q.inv_J.resize(nq);
  for (std::size_t i = 0; i < nq; i++)
  {
    double det = 0.0;
    q.inv_J[i] = InverseJacobian(dim, mesh.Jacobian(k, rule.points[i]), det);
    if (det <= 0.0)
    {
      throw std::runtime_error("Nonpositive Jacobian in element " + std::to_string(k));
    }
    q.JxW[i] = det * rule.weights[i];
    q.x[i] = mesh.MapToPhysical(k, rule.points[i]);
  }
  return q;
}

FaceQuadrature ComputeFaceQuadrature(const Mesh &mesh, const InteriorFace &face,
                                     int points_per_axis)
{
  const int dim = mesh.Dimension();
  const auto g = GaussLegendre(points_per_axis);
  const int n1 = dim == 3 ? points_per_axis : 1;
  const int dir = face.face_plus / 2;
  const int dir_minus = face.face_minus / 2;
  FaceQuadrature q;
  for (int b = 0; b < n1; b++)
  {
    for (int a = 0; a < points_per_axis; a++)
    {
      const Point xi = FacePoint(dim, face.face_plus, g.points[a], dim == 3 ? g.points[b] : 0.0);
      const double w = g.weights[a] * (dim == 3 ? g.weights[b] : 1.0);
      const Tensor J = mesh.Jacobian(face.plus, xi);
      double ds = 0.0;
      if (dim == 2)
      {
        const int t = 1 - dir;
        ds = std::hypot(J[0][t], J[1][t]);
      }
      else
      {
        const int t1 = (dir + 1) % 3, t2 = (dir + 2) % 3;
        const double c0 = J[1][t1] * J[2][t2] - J[2][t1] * J[1][t2];
        const double c1 = J[2][t1] * J[0][t2] - J[0][t1] * J[2][t2];
        const double c2 = J[0][t1] * J[1][t2] - J[1][t1] * J[0][t2];
        ds = std::sqrt(c0 * c0 + c1 * c1 + c2 * c2);
      }
      const Point x = mesh.MapToPhysical(face.plus, xi);
      auto xm = mesh.MapToReference(face.minus, x);
      if (!xm)
      {
        throw std::runtime_error("Face point could not be located in the neighbor element");
      }
      (*xm)[dir_minus] = static_cast<double>(face.face_minus % 2);
      double det = 0.0;
      q.xi_plus.push_back(xi);
      q.xi_minus.push_back(*xm);
      q.x.push_back(x);
      q.normal.push_back(mesh.OutwardNormal(face.plus, face.face_plus, xi));
      q.JxW.push_back(w * ds);
      q.inv_J_plus.push_back(InverseJacobian(dim, J, det));
      q.inv_J_minus.push_back(InverseJacobian(dim, mesh.Jacobian(face.minus, *xm), det));
    }
  }
  return q;
}

}  // namespace polymg
