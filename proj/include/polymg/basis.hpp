// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POLYMG_BASIS_HPP
#define POLYMG_BASIS_HPP

#include <array>
#include <span>
#include <vector>
#include "polymg/common.hpp"

namespace polymg
{

// One-dimensional rule on [0, 1]; weights sum to 1.
struct QuadratureRule1D
{
  std::vector<double> points;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [0, 1] (exact up to degree 2n - 1).
QuadratureRule1D GaussLegendre(int n);

// n-point Gauss-Lobatto rule on [0, 1], n >= 2; includes both endpoints.
QuadratureRule1D GaussLobatto(int n);

//
// Lagrange polynomials through a set of distinct nodes.
//
class LagrangeBasis1D
{
public:
  explicit LagrangeBasis1D(std::vector<double> nodes);

  int Size() const { return static_cast<int>(nodes.size()); }
  const std::vector<double> &Nodes() const { return nodes; }
  double Value(int i, double x) const;
  double Derivative(int i, double x) const;

  // All basis values (derivatives) at x.
  void Values(double x, std::span<double> out) const;
  void Derivatives(double x, std::span<double> out) const;

private:
  std::vector<double> nodes;
  std::vector<double> denominators;
};

//
// Tensor-product Q_p Lagrange basis on the reference box [0, 1]^d with Gauss-Lobatto
// support nodes. Local index i = i_0 + (p+1) (i_1 + (p+1) i_2).
//
class TensorBasis
{
public:
  TensorBasis(int dim, int degree);

  int Dimension() const { return dim; }
  int Degree() const { return degree; }
  int NumFunctions() const { return num_functions; }
  const LagrangeBasis1D &Basis1D() const { return basis1d; }

  std::array<int, 3> MultiIndex(int i) const;
  double Value(int i, const Point &xi) const;
  Point Gradient(int i, const Point &xi) const;

  // Reference support node of basis function i.
  Point SupportNode(int i) const;

  // Values of all basis functions at xi.
  void Values(const Point &xi, std::span<double> out) const;

private:
  int dim;
  int degree;
  int num_functions;
  LagrangeBasis1D basis1d;
};

// Tensor Gauss-Legendre rule on [0, 1]^d with n points per axis (x fastest).
struct QuadratureRule
{
  std::vector<Point> points;
  std::vector<double> weights;
};

QuadratureRule TensorGauss(int dim, int n);

}  // namespace polymg

#endif  // POLYMG_BASIS_HPP
