// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#include "polymg/multigrid.hpp"

#include <algorithm>
#include <stdexcept>
#include <Eigen/SparseCholesky>
#include "polymg/parallel.hpp"

namespace polymg
{

struct MultigridPreconditioner::DirectSolver
{
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double, Eigen::ColMajor, int>> llt;
};

SparseMatrix BuildProlongation(const DGSpace &fine, const DGSpace &coarse,
                               const AgglomerationHierarchy &hierarchy)
{
  const int lf = fine.Level();
  if (coarse.Level() != lf + 1 || lf + 1 >= hierarchy.NumLevels() ||
      fine.Degree() != coarse.Degree())
  {
    throw std::invalid_argument("BuildProlongation: spaces are not consecutive levels");
  }
  const auto &parent = hierarchy.Level(lf).parent;
  const int nf = fine.DofsPerEntity();
  const Index ne = fine.NumEntities();
  std::vector<std::vector<Index>> pattern(ne);
  for (Index a = 0; a < ne; a++)
  {
    pattern[a] = {parent.at(a)};
  }
  SparseMatrix P = SparseMatrix::BlockPattern(pattern, nf, coarse.NumEntities(), nf);
  std::vector<double> values(nf);
  auto &vals = P.Values();
  for (Index a = 0; a < ne; a++)
  {
    const Index c = parent[a];
    for (int i = 0; i < nf; i++)
    {
      const Index row = a * nf + i;
      coarse.EvaluateBasis(c, fine.SupportPoint(row), values);
      // Each row holds exactly the nf entries of the parent block, in column order.
      const Offset k0 = P.RowPtr()[row];
      for (int j = 0; j < nf; j++)
      {
        vals[k0 + j] = values[j];
      }
    }
  }
  return P;
}

MultigridPreconditioner::MultigridPreconditioner(const Mesh &mesh,
                                                 const AgglomerationHierarchy &hierarchy,
                                                 int degree, SparseMatrix A0,
                                                 const MultigridOptions &options,
                                                 LinearOperator fine_apply)
  : options(options), fine_apply(std::move(fine_apply))
{
  const int L = hierarchy.NumLevels();
  if (L < 1)
  {
    throw std::invalid_argument("MultigridPreconditioner: empty hierarchy");
  }
  for (int l = 0; l < L; l++)
  {
    spaces.push_back(std::make_unique<DGSpace>(mesh, hierarchy, l, degree));
  }
  if (A0.Rows() != spaces[0]->TotalDofs() || A0.Cols() != A0.Rows())
  {
    throw std::invalid_argument("MultigridPreconditioner: A0 does not match the fine space");
  }
  matrices.push_back(std::move(A0));
  prolongations.emplace_back();
  for (int l = 1; l < L; l++)
  {
    prolongations.push_back(BuildProlongation(*spaces[l - 1], *spaces[l], hierarchy));
    matrices.push_back(GalerkinProduct(matrices[l - 1], prolongations[l]));
  }
  for (const auto &A : matrices)
  {
    level_nnz.push_back(A.Nnz());
  }

  ChebyshevOptions cheb;
  cheb.degree = options.smoother_degree;
  cheb.range_divisor = options.cheby_range_divisor;
  cheb.safety = options.cheby_safety;
  cheb.lanczos_iterations = options.lanczos_iterations;
  cheb.seed = options.seed;
  for (int l = 0; l + 1 < L; l++)
  {
    smoothers.push_back(
        std::make_unique<ChebyshevSmoother>(LevelOperator(l), matrices[l].DiagonalEntries(), cheb));
  }

  const SparseMatrix &Ac = matrices.back();
  const bool use_direct =
      options.coarse_solver == CoarseSolverKind::Direct ||
      (options.coarse_solver == CoarseSolverKind::Auto && Ac.Rows() <= options.coarse_direct_max);
  if (use_direct)
  {
    direct = std::make_unique<DirectSolver>();
    direct->llt.compute(Ac.ToEigen());
    if (direct->llt.info() != Eigen::Success)
    {
      throw std::runtime_error("Coarse Cholesky factorization failed (operator not SPD)");
    }
  }
  else
  {
    coarse_bj = std::make_unique<BlockJacobi>(Ac, spaces.back()->DofsPerEntity());
  }
}

MultigridPreconditioner::~MultigridPreconditioner() = default;

double MultigridPreconditioner::OperatorComplexity() const
{
  Offset total = 0;
  for (Offset n : level_nnz)
  {
    total += n;
  }
  return static_cast<double>(total) / static_cast<double>(level_nnz[0]);
}

std::string MultigridPreconditioner::CoarseSolverName() const
{
  return direct ? "sparse-cholesky" : "pcg+bjacobi";
}

std::size_t MultigridPreconditioner::ReleaseFineMatrix()
{
  if (!fine_apply)
  {
    throw std::logic_error("ReleaseFineMatrix: no matrix-free fine operator was supplied");
  }
  if (NumLevels() == 1)
  {
    throw std::logic_error("ReleaseFineMatrix: the fine matrix is the coarse system");
  }
  const std::size_t bytes = matrices[0].MemoryBytes();
  matrices[0].Release();
  fine_released = true;
  return bytes;
}

LinearOperator MultigridPreconditioner::LevelOperator(int l) const
{
  if (l == 0 && fine_apply)
  {
    return fine_apply;
  }
  const SparseMatrix *A = &matrices[l];
  return [A](std::span<const double> x, std::span<double> y) { A->Mult(x, y); };
}

void MultigridPreconditioner::CoarseSolve(std::span<const double> b, std::span<double> x) const
{
  if (direct)
  {
    Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())) =
        direct->llt.solve(rhs);
    return;
  }
  std::fill(x.begin(), x.end(), 0.0);
  SolveOptions so;
  so.abs_tol = 0.0;
  so.rel_tol = options.coarse_tol;
  so.max_iter = options.coarse_max_iter;
  const SparseMatrix &A = matrices.back();
  Pcg([&A](std::span<const double> v, std::span<double> w) { A.Mult(v, w); },
      coarse_bj->AsOperator(), b, x, so);
}

void MultigridPreconditioner::Cycle(int l, std::span<const double> b, std::span<double> x) const
{
  if (l == NumLevels() - 1)
  {
    CoarseSolve(b, x);
    return;
  }
  const ChebyshevSmoother &S = *smoothers[l];
  const int sweeps = options.smoother_sweeps;
  for (int k = 0; k < sweeps; k++)
  {
    S.Apply(b, x, k == 0);
  }
  if (sweeps == 0)
  {
    std::fill(x.begin(), x.end(), 0.0);
  }

  const std::size_t n = b.size();
  Vector r(n);
  LevelOperator(l)(x, r);
  ParallelFor(0, static_cast<Index>(n),
              [&](Index first, Index last)
              {
                for (Index i = first; i < last; i++)
                {
                  r[i] = b[i] - r[i];
                }
              });
  const SparseMatrix &P = prolongations[l + 1];
  Vector bc(P.Cols()), xc(P.Cols());
  P.MultTranspose(r, bc);
  Cycle(l + 1, bc, xc);
  P.AddMult(1.0, xc, x);

  for (int k = 0; k < sweeps; k++)
  {
    S.Apply(b, x, false);
  }
}

void MultigridPreconditioner::Apply(std::span<const double> b, std::span<double> x) const
{
  if (b.size() != x.size() || static_cast<Index>(b.size()) != spaces[0]->TotalDofs())
  {
    throw std::invalid_argument("MultigridPreconditioner::Apply: size mismatch");
  }
  Cycle(0, b, x);
}

LinearOperator MultigridPreconditioner::AsOperator() const
{
  return [this](std::span<const double> b, std::span<double> x) { Apply(b, x); };
}

}  // namespace polymg
