// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POLYMG_SOLVER_HPP
#define POLYMG_SOLVER_HPP

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>
#include "polymg/sparse_matrix.hpp"

namespace polymg
{

// y = Op x. Implementations must not alias x and y.
using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

LinearOperator MatrixOperator(const SparseMatrix &A);
LinearOperator IdentityOperator();

struct SolveOptions
{
  double abs_tol = 1e-14;
  // Optional relative criterion ||r|| <= rel_tol ||b||; the looser of the two applies.
  double rel_tol = 0.0;
  int max_iter = 1000;
  // Polak-Ribiere update of the search direction, for nonstationary preconditioners.
  bool flexible = false;
  bool record_history = false;
  // Debug check <M r, r> > 0 at every iteration.
  bool check_preconditioner = false;
};

struct SolveReport
{
  int iterations = 0;
  double initial_residual_norm = 0.0;
  double final_residual_norm = 0.0;
  bool converged = false;
  std::vector<double> residual_history;
};

// p^T A p <= 0 (or <M r, r> <= 0 when checked) at the given iteration.
class IndefiniteOperatorError : public std::runtime_error
{
public:
  IndefiniteOperatorError(const std::string &what, int iteration)
    : std::runtime_error(what), iteration(iteration)
  {
  }
  int Iteration() const { return iteration; }

private:
  int iteration;
};

//
// Preconditioned conjugate gradients from the initial guess in x. Convergence is tested on
// the recursively updated residual. Returns immediately if the initial residual already
// satisfies the tolerance.
//
SolveReport Pcg(const LinearOperator &A, const LinearOperator &M, std::span<const double> b,
                std::span<double> x, const SolveOptions &options);

// Pcg with options.flexible forced on.
SolveReport FlexiblePcg(const LinearOperator &A, const LinearOperator &M,
                        std::span<const double> b, std::span<double> x, SolveOptions options);

//
// Block-Jacobi preconditioner with exact dense Cholesky solves of the diagonal blocks of
// size block x block.
//
class BlockJacobi
{
public:
  BlockJacobi(const SparseMatrix &A, int block);

  // z = blockdiag(A)^{-1} r
  void Apply(std::span<const double> r, std::span<double> z) const;

  LinearOperator AsOperator() const;

  Index Size() const { return num_blocks * block; }

private:
  int block;
  Index num_blocks;
  // Lower Cholesky factors, row-major, block^2 per entity.
  std::vector<double> factors;
};

}  // namespace polymg

#endif  // POLYMG_SOLVER_HPP
