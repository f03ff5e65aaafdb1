// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#include "polymg/chebyshev.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <Eigen/Dense>
#include "polymg/parallel.hpp"

namespace polymg
{

namespace
{

Vector RandomUnitVector(std::size_t n, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  Vector v(n);
  for (auto &x : v)
  {
    // Map the raw 64-bit draw to [-1, 1) explicitly; the standard distributions are not
    // portable across library implementations.
    x = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
  }
  const double nrm = Norm2(v);
  for (auto &x : v)
  {
    x /= nrm;
  }
  return v;
}

}  // namespace

SpectrumEstimate EstimateSpectrum(const LinearOperator &A, std::span<const double> diag_inv,
                                  int iterations, std::uint64_t seed)
{
  const std::size_t n = diag_inv.size();
  if (n == 0 || iterations < 1)
  {
    throw std::invalid_argument("EstimateSpectrum: empty operator or no iterations");
  }
  Vector s(n);
  for (std::size_t i = 0; i < n; i++)
  {
    if (!(diag_inv[i] > 0.0))
    {
      throw std::invalid_argument("EstimateSpectrum: inverse diagonal must be positive");
    }
    s[i] = std::sqrt(diag_inv[i]);
  }
  Vector tmp(n), w(n);
  // w = S A S v
  auto apply = [&](const Vector &v, Vector &out)
  {
    for (std::size_t i = 0; i < n; i++)
    {
      tmp[i] = s[i] * v[i];
    }
    A(tmp, out);
    for (std::size_t i = 0; i < n; i++)
    {
      out[i] *= s[i];
    }
  };

  const int m = static_cast<int>(std::min<std::size_t>(iterations, n));
  std::vector<Vector> V;
  V.reserve(m);
  V.push_back(RandomUnitVector(n, seed));
  std::vector<double> alpha, beta;
  bool breakdown = false;
  for (int j = 0; j < m; j++)
  {
    apply(V[j], w);
    const double a = Dot(w, V[j]);
    alpha.push_back(a);
    // Full reorthogonalization (two passes of classical Gram-Schmidt).
    for (int pass = 0; pass < 2; pass++)
    {
      for (int i = 0; i <= j; i++)
      {
        Axpy(-Dot(w, V[i]), V[i], w);
      }
    }
    const double b = Norm2(w);
    if (j + 1 == m)
    {
      break;
    }
    if (b <= 1e-10 * std::max(std::abs(a), 1e-300))
    {
      breakdown = true;
      break;
    }
    beta.push_back(b);
    Vector next(w);
    for (auto &x : next)
    {
      x /= b;
    }
    V.push_back(std::move(next));
  }

  const int k = static_cast<int>(alpha.size());
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; i++)
  {
    T(i, i) = alpha[i];
    if (i + 1 < k)
    {
      T(i, i + 1) = T(i + 1, i) = beta[i];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(T, Eigen::EigenvaluesOnly);
  SpectrumEstimate est;
  est.iterations = k;
  est.ritz_min = eig.eigenvalues().minCoeff();
  est.ritz_max = eig.eigenvalues().maxCoeff();
  est.single_point = breakdown && k == 1;

  if (breakdown && k > 1)
  {
    // The start vector lay in an invariant subspace; power iteration from a second seeded
    // vector guards against missing the top of the spectrum.
    Vector v = RandomUnitVector(n, seed + 1);
    double rq = 0.0;
    for (int it = 0; it < 2 * iterations; it++)
    {
      apply(v, w);
      rq = Dot(v, w);
      const double nrm = Norm2(w);
      if (!(nrm > 0.0))
      {
        break;
      }
      for (std::size_t i = 0; i < n; i++)
      {
        v[i] = w[i] / nrm;
      }
    }
    est.ritz_max = std::max(est.ritz_max, rq);
    est.used_power_iteration = true;
  }
  return est;
}

double EstimateEigMax(const LinearOperator &A, std::span<const double> diag_inv, int iterations,
                      std::uint64_t seed)
{
  return 1.2 * EstimateSpectrum(A, diag_inv, iterations, seed).ritz_max;
}

ChebyshevSmoother::ChebyshevSmoother(LinearOperator A, Vector diag,
                                     const ChebyshevOptions &options)
  : A(std::move(A)), diag_inv(std::move(diag)), degree(options.degree)
{
  if (degree < 1 || options.range_divisor < 1.0)
  {
    throw std::invalid_argument("ChebyshevSmoother: degree >= 1 and range divisor >= 1 required");
  }
  for (auto &v : diag_inv)
  {
    if (!(v > 0.0))
    {
      throw std::invalid_argument("ChebyshevSmoother: diagonal must be positive");
    }
    v = 1.0 / v;
  }
  estimate = EstimateSpectrum(this->A, diag_inv, options.lanczos_iterations, options.seed);
  if (estimate.single_point)
  {
    lambda_max = lambda_min = estimate.ritz_max;
  }
  else
  {
    lambda_max = options.safety * estimate.ritz_max;
    lambda_min = lambda_max / options.range_divisor;
  }
  if (!(lambda_max > 0.0))
  {
    throw std::runtime_error("ChebyshevSmoother: nonpositive eigenvalue estimate");
  }
}

void ChebyshevSmoother::Apply(std::span<const double> b, std::span<double> x,
                              bool zero_guess) const
{
  const std::size_t n = diag_inv.size();
  Vector r(n), d(n);
  auto residual = [&]()
  {
    A(x, r);
    ParallelFor(0, static_cast<Index>(n),
                [&](Index first, Index last)
                {
                  for (Index i = first; i < last; i++)
                  {
                    r[i] = b[i] - r[i];
                  }
                });
  };
  if (zero_guess)
  {
    std::copy(b.begin(), b.end(), r.begin());
    std::fill(x.begin(), x.end(), 0.0);
  }
  else
  {
    residual();
  }

  const double theta = 0.5 * (lambda_max + lambda_min);
  const double delta = 0.5 * (lambda_max - lambda_min);
  if (delta <= 1e-14 * theta)
  {
    // Single-point spectrum: damped Jacobi with the exact eigenvalue.
    for (int k = 0; k < degree; k++)
    {
      if (k > 0)
      {
        residual();
      }
      for (std::size_t i = 0; i < n; i++)
      {
        x[i] += diag_inv[i] * r[i] / theta;
      }
    }
    return;
  }

  const double sigma = theta / delta;
  double rho = 1.0 / sigma;
  for (std::size_t i = 0; i < n; i++)
  {
    d[i] = diag_inv[i] * r[i] / theta;
    x[i] += d[i];
  }
  for (int k = 1; k < degree; k++)
  {
    residual();
    const double rho_new = 1.0 / (2.0 * sigma - rho);
    const double c1 = rho_new * rho, c2 = 2.0 * rho_new / delta;
    ParallelFor(0, static_cast<Index>(n),
                [&](Index first, Index last)
                {
                  for (Index i = first; i < last; i++)
                  {
                    d[i] = c1 * d[i] + c2 * diag_inv[i] * r[i];
                    x[i] += d[i];
                  }
                });
    rho = rho_new;
  }
}

}  // namespace polymg
