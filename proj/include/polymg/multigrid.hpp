// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POLYMG_MULTIGRID_HPP
#define POLYMG_MULTIGRID_HPP

#include <memory>
#include <string>
#include <vector>
#include "polymg/chebyshev.hpp"
#include "polymg/dg_space.hpp"
#include "polymg/solver.hpp"

namespace polymg
{

enum class CoarseSolverKind
{
  Auto,    // direct up to coarse_direct_max DoFs, PCG otherwise
  Direct,  // sparse Cholesky
  Pcg      // PCG with block-Jacobi
};

struct MultigridOptions
{
  int smoother_degree = 3;
  // Applications of the Chebyshev polynomial per pre- and post-smoothing phase.
  int smoother_sweeps = 3;
  double cheby_range_divisor = 20.0;
  double cheby_safety = 1.2;
  int lanczos_iterations = 12;
  std::uint64_t seed = 42;
  CoarseSolverKind coarse_solver = CoarseSolverKind::Auto;
  Index coarse_direct_max = 20000;
  // Relative residual reduction of the iterative coarse solve.
  double coarse_tol = 1e-12;
  int coarse_max_iter = 10000;
};

// Nodal interpolation from the coarse space into the fine space: block (a, parent(a))
// holds the coarse basis of parent(a) evaluated at the support nodes of fine entity a.
// The spaces must be consecutive levels of the hierarchy.
SparseMatrix BuildProlongation(const DGSpace &fine, const DGSpace &coarse,
                               const AgglomerationHierarchy &hierarchy);

//
// Agglomeration-based multigrid: one V-cycle with Chebyshev-Jacobi smoothing on the
// inherited operators A_{l+1} = P^T A_l P.
//
class MultigridPreconditioner
{
public:
  // A0 is the assembled level-0 system. If fine_apply is given it replaces A0 in the
  // level-0 smoother and residual, and A0 may then be released after construction.
  MultigridPreconditioner(const Mesh &mesh, const AgglomerationHierarchy &hierarchy,
                          int degree, SparseMatrix A0, const MultigridOptions &options = {},
                          LinearOperator fine_apply = {});
  ~MultigridPreconditioner();

  int NumLevels() const { return static_cast<int>(spaces.size()); }
  const DGSpace &Space(int l) const { return *spaces.at(l); }
  const SparseMatrix &LevelMatrix(int l) const { return matrices.at(l); }
  // Prolongation from level l to level l - 1 (l >= 1).
  const SparseMatrix &Prolongation(int l) const { return prolongations.at(l); }
  const ChebyshevSmoother &Smoother(int l) const { return *smoothers.at(l); }

  // Stored nonzeros of A_l (recorded at construction, so valid after release).
  Offset LevelNnz(int l) const { return level_nnz.at(l); }
  // sum_l nnz(A_l) / nnz(A_0)
  double OperatorComplexity() const;

  std::string CoarseSolverName() const;

  // Drop the values of the assembled A_0 (matrix-free mode). Returns the bytes freed.
  std::size_t ReleaseFineMatrix();
  bool FineMatrixReleased() const { return fine_released; }

  // x = B b for the V-cycle operator B (x is overwritten).
  void Apply(std::span<const double> b, std::span<double> x) const;
  LinearOperator AsOperator() const;

private:
  void Cycle(int l, std::span<const double> b, std::span<double> x) const;
  void CoarseSolve(std::span<const double> b, std::span<double> x) const;
  LinearOperator LevelOperator(int l) const;

  MultigridOptions options;
  LinearOperator fine_apply;
  std::vector<std::unique_ptr<DGSpace>> spaces;
  std::vector<SparseMatrix> matrices;
  std::vector<SparseMatrix> prolongations;
  std::vector<std::unique_ptr<ChebyshevSmoother>> smoothers;
  std::vector<Offset> level_nnz;
  bool fine_released = false;

  struct DirectSolver;
  std::unique_ptr<DirectSolver> direct;
  std::unique_ptr<BlockJacobi> coarse_bj;
};

}  // namespace polymg

#endif  // POLYMG_MULTIGRID_HPP
