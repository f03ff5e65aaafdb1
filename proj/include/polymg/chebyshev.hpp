// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POLYMG_CHEBYSHEV_HPP
#define POLYMG_CHEBYSHEV_HPP

#include <cstdint>
#include <span>
#include "polymg/solver.hpp"

namespace polymg
{

// Extremal Ritz values of D^{-1} A.
struct SpectrumEstimate
{
  double ritz_max = 0.0;
  double ritz_min = 0.0;
  int iterations = 0;
  // The Krylov space collapsed after one step: D^{-1} A acts as ritz_max times identity on
  // the start vector, which for a random start means a single-point spectrum.
  bool single_point = false;
  bool used_power_iteration = false;
};

// Lanczos with full reorthogonalization on D^{-1/2} A D^{-1/2}, from a seeded random start.
// Breakdown after more than one step falls back to power iteration.
SpectrumEstimate EstimateSpectrum(const LinearOperator &A, std::span<const double> diag_inv,
                                  int iterations = 12, std::uint64_t seed = 42);

// 1.2 times the largest Ritz value.
double EstimateEigMax(const LinearOperator &A, std::span<const double> diag_inv,
                      int iterations = 12, std::uint64_t seed = 42);

struct ChebyshevOptions
{
  int degree = 3;
  double range_divisor = 20.0;
  double safety = 1.2;
  int lanczos_iterations = 12;
  std::uint64_t seed = 42;
};

//
// Chebyshev-accelerated Jacobi smoother targeting [eig_max / range_divisor, eig_max] of
// D^{-1} A, where eig_max = safety * (largest Ritz value).
//
class ChebyshevSmoother
{
public:
  ChebyshevSmoother(LinearOperator A, Vector diag, const ChebyshevOptions &options = {});

  // One degree-`degree` sweep: x <- x + p(D^{-1} A) D^{-1} (b - A x). With zero_guess the
  // initial residual is b and x is overwritten.
  void Apply(std::span<const double> b, std::span<double> x, bool zero_guess = false) const;

  double EigMax() const { return lambda_max; }
  double EigMin() const { return lambda_min; }
  int Degree() const { return degree; }
  const SpectrumEstimate &Estimate() const { return estimate; }

private:
  LinearOperator A;
  Vector diag_inv;
  int degree;
  double lambda_max, lambda_min;
  SpectrumEstimate estimate;
};

}  // namespace polymg

#endif  // POLYMG_CHEBYSHEV_HPP
