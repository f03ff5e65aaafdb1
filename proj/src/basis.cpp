// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#include "polymg/basis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace polymg
{

namespace
{

// Legendre P_n and P_n' at x in [-1, 1].
std::pair<double, double> Legendre(int n, double x)
{
  double p0 = 1.0, p1 = x;
  if (n == 0)
  {
    return {1.0, 0.0};
  }
  for (int k = 1; k < n; k++)
  {
    const double p2 = ((2 * k + 1) * x * p1 - k * p0) / (k + 1);
    p0 = p1;
    p1 = p2;
  }
  // Derivative from the three-term identity; valid for |x| < 1.
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

}  // namespace

QuadratureRule1D GaussLegendre(int n)
{
  if (n < 1)
  {
    throw std::invalid_argument("Gauss rule needs at least one point");
  }
  QuadratureRule1D rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; i++)
  {
    double x = -std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; it++)
    {
      const auto [p, dp] = Legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
      {
        break;
      }
    }
    const auto [p, dp] = Legendre(n, x);
    (void)p;
    rule.points[i] = 0.5 * (x + 1.0);
    rule.weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

QuadratureRule1D GaussLobatto(int n)
{
  if (n < 2)
  {
    throw std::invalid_argument("Gauss-Lobatto rule needs at least two points");
  }
  const int N = n - 1;
  QuadratureRule1D rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  rule.points[0] = 0.0;
  rule.points[N] = 1.0;
  for (int i = 1; i < N; i++)
  {
    // Interior nodes are the roots of P_N'.
    double x = -std::cos(std::numbers::pi * i / N);
    for (int it = 0; it < 100; it++)
    {
      const auto [p, dp] = Legendre(N, x);
      const double ddp = (2.0 * x * dp - N * (N + 1) * p) / (1.0 - x * x);
      const double dx = dp / ddp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
      {
        break;
      }
    }
    rule.points[i] = 0.5 * (x + 1.0);
  }
  for (int i = 0; i <= N; i++)
  {
    const double x = 2.0 * rule.points[i] - 1.0;
    const double p = i == 0 ? (N % 2 ? -1.0 : 1.0) : (i == N ? 1.0 : Legendre(N, x).first);
    rule.weights[i] = 1.0 / (N * (N + 1) * p * p);
  }
  return rule;
}

LagrangeBasis1D::LagrangeBasis1D(std::vector<double> nodes_) : nodes(std::move(nodes_))
{
  const int n = Size();
  denominators.assign(n, 1.0);
  for (int i = 0; i < n; i++)
  {
    for (int j = 0; j < n; j++)
    {
      if (j != i)
      {
        if (nodes[i] == nodes[j])
        {
          throw std::invalid_argument("Lagrange nodes must be distinct");
        }
        denominators[i] *= nodes[i] - nodes[j];
      }
    }
  }
}

double LagrangeBasis1D::Value(int i, double x) const
{
  double v = 1.0;
  for (int j = 0; j < Size(); j++)
  {
    if (j != i)
    {
      v *= x - nodes[j];
    }
  }
  return v / denominators[i];
}

double LagrangeBasis1D::Derivative(int i, double x) const
{
  double d = 0.0;
  for (int k = 0; k < Size(); k++)
  {
    if (k == i)
    {
      continue;
    }
    double v = 1.0;
    for (int j = 0; j < Size(); j++)
    {
      if (j != i && j != k)
      {
        v *= x - nodes[j];
      }
    }
    d += v;
  }
  return d / denominators[i];
}

void LagrangeBasis1D::Values(double x, std::span<double> out) const
{
  for (int i = 0; i < Size(); i++)
  {
    out[i] = Value(i, x);
  }
}

void LagrangeBasis1D::Derivatives(double x, std::span<double> out) const
{
  for (int i = 0; i < Size(); i++)
  {
    out[i] = Derivative(i, x);
  }
}

TensorBasis::TensorBasis(int dim_, int degree_)
  : dim(dim_), degree(degree_), num_functions(1),
    basis1d(degree_ >= 1 ? GaussLobatto(degree_ + 1).points : std::vector<double>{0.5})
{
  if (dim < 1 || dim > 3)
  {
    throw std::invalid_argument("Basis dimension must be 1, 2 or 3");
  }
  if (degree < 1 || degree > 7)
  {
    throw std::invalid_argument("Polynomial degree must lie in [1, 7]");
  }
  for (int d = 0; d < dim; d++)
  {
    num_functions *= degree + 1;
  }
}

std::array<int, 3> TensorBasis::MultiIndex(int i) const
{
  if (i < 0 || i >= num_functions)
  {
    throw std::out_of_range("Basis index out of range");
  }
  const int n = degree + 1;
  std::array<int, 3> m{0, 0, 0};
  for (int d = 0; d < dim; d++)
  {
    m[d] = i % n;
    i /= n;
  }
  return m;
}

double TensorBasis::Value(int i, const Point &xi) const
{
  const auto m = MultiIndex(i);
  double v = 1.0;
  for (int d = 0; d < dim; d++)
  {
    v *= basis1d.Value(m[d], xi[d]);
  }
  return v;
}

Point TensorBasis::Gradient(int i, const Point &xi) const
{
  const auto m = MultiIndex(i);
  Point g{0.0, 0.0, 0.0};
  for (int c = 0; c < dim; c++)
  {
    double v = 1.0;
    for (int d = 0; d < dim; d++)
    {
      v *= d == c ? basis1d.Derivative(m[d], xi[d]) : basis1d.Value(m[d], xi[d]);
    }
    g[c] = v;
  }
  return g;
}

Point TensorBasis::SupportNode(int i) const
{
  const auto m = MultiIndex(i);
  Point x{0.0, 0.0, 0.0};
  for (int d = 0; d < dim; d++)
  {
    x[d] = basis1d.Nodes()[m[d]];
  }
  return x;
}

void TensorBasis::Values(const Point &xi, std::span<double> out) const
{
  const int n = degree + 1;
  std::array<std::array<double, 8>, 3> v1{};
  for (int d = 0; d < dim; d++)
  {
    for (int a = 0; a < n; a++)
    {
      v1[d][a] = basis1d.Value(a, xi[d]);
    }
  }
  for (int i = 0; i < num_functions; i++)
  {
    int r = i;
    double v = 1.0;
    for (int d = 0; d < dim; d++)
    {
      v *= v1[d][r % n];
      r /= n;
    }
    out[i] = v;
  }
}

QuadratureRule TensorGauss(int dim, int n)
{
  const auto g = GaussLegendre(n);
  QuadratureRule q;
  const int nz = dim >= 3 ? n : 1, ny = dim >= 2 ? n : 1;
  for (int k = 0; k < nz; k++)
  {
    for (int j = 0; j < ny; j++)
    {
      for (int i = 0; i < n; i++)
      {
        Point x{g.points[i], dim >= 2 ? g.points[j] : 0.0, dim >= 3 ? g.points[k] : 0.0};
        q.points.push_back(x);
        q.weights.push_back(g.weights[i] * (dim >= 2 ? g.weights[j] : 1.0) *
                            (dim >= 3 ? g.weights[k] : 1.0));
      }
    }
  }
  return q;
}

}  // namespace polymg
