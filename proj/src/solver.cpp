// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#include "polymg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <Eigen/Dense>
#include "polymg/parallel.hpp"

namespace polymg
{

LinearOperator MatrixOperator(const SparseMatrix &A)
{
  return [&A](std::span<const double> x, std::span<double> y) { A.Mult(x, y); };
}

LinearOperator IdentityOperator()
{
  return [](std::span<const double> x, std::span<double> y)
  { std::copy(x.begin(), x.end(), y.begin()); };
}

SolveReport Pcg(const LinearOperator &A, const LinearOperator &M, std::span<const double> b,
                std::span<double> x, const SolveOptions &options)
{
  const std::size_t n = b.size();
  if (x.size() != n)
  {
    throw std::invalid_argument("Pcg: size mismatch between b and x");
  }
  SolveReport report;
  Vector r(n), z(n), p(n), q(n), r_old;

  A(x, q);
  for (std::size_t i = 0; i < n; i++)
  {
    r[i] = b[i] - q[i];
  }
  double r_norm = Norm2(r);
  const double tol = std::max(options.abs_tol, options.rel_tol * Norm2(b));
  report.initial_residual_norm = r_norm;
  report.final_residual_norm = r_norm;
  if (options.record_history)
  {
    report.residual_history.push_back(r_norm);
  }
  if (r_norm <= tol)
  {
    report.converged = true;
    return report;
  }

  M(r, z);
  double rz = Dot(r, z);
  if (options.check_preconditioner && !(rz > 0.0))
  {
    throw IndefiniteOperatorError("Preconditioner is not positive definite at iteration 0", 0);
  }
  p = z;
  for (int k = 1; k <= options.max_iter; k++)
  {
    A(p, q);
    const double pq = Dot(p, q);
    if (!(pq > 0.0))
    {
      throw IndefiniteOperatorError(
          "Operator is not positive definite: p^T A p = " + std::to_string(pq) +
              " at iteration " + std::to_string(k),
          k);
    }
    const double alpha = rz / pq;
    if (options.flexible)
    {
      r_old = r;
    }
    Axpy(alpha, p, x);
    Axpy(-alpha, q, r);
    r_norm = Norm2(r);
    report.iterations = k;
    report.final_residual_norm = r_norm;
    if (options.record_history)
    {
      report.residual_history.push_back(r_norm);
    }
    if (r_norm <= tol)
    {
      report.converged = true;
      return report;
    }
    M(r, z);
    const double rz_new = Dot(r, z);
    if (options.check_preconditioner && !(rz_new > 0.0))
    {
      throw IndefiniteOperatorError("Preconditioner is not positive definite at iteration " +
                                        std::to_string(k),
                                    k);
    }
    double beta = rz_new / rz;
    if (options.flexible)
    {
      beta = (rz_new - Dot(z, r_old)) / rz;
    }
    rz = rz_new;
    Xpby(z, beta, p);
  }
  return report;
}

SolveReport FlexiblePcg(const LinearOperator &A, const LinearOperator &M,
                        std::span<const double> b, std::span<double> x, SolveOptions options)
{
  options.flexible = true;
  return Pcg(A, M, b, x, options);
}

BlockJacobi::BlockJacobi(const SparseMatrix &A, int block) : block(block)
{
  if (block < 1 || A.Rows() != A.Cols() || A.Rows() % block != 0)
  {
    throw std::invalid_argument("BlockJacobi: matrix size is not a multiple of the block size");
  }
  num_blocks = A.Rows() / block;
  const std::size_t bb = static_cast<std::size_t>(block) * block;
  factors.assign(bb * num_blocks, 0.0);
  const auto &row_ptr = A.RowPtr();
  const auto &cols = A.ColIdx();
  const auto &vals = A.Values();
  std::vector<Index> failed;
  ParallelFor(
      0, num_blocks,
      [&](Index first, Index last)
      {
        Eigen::MatrixXd D(block, block);
        for (Index a = first; a < last; a++)
        {
          D.setZero();
          const Index r0 = a * block;
          for (int i = 0; i < block; i++)
          {
            for (Offset k = row_ptr[r0 + i]; k < row_ptr[r0 + i + 1]; k++)
            {
              const Index c = cols[k] - r0;
              if (c >= 0 && c < block)
              {
                D(i, c) = vals[k];
              }
            }
          }
          Eigen::LLT<Eigen::MatrixXd> llt(D);
          if (llt.info() != Eigen::Success)
          {
            // Reported after the loop; marking with NaN keeps the loop race-free.
            factors[bb * a] = std::nan("");
            continue;
          }
          const Eigen::MatrixXd L = llt.matrixL();
          double *dst = factors.data() + bb * a;
          for (int i = 0; i < block; i++)
          {
            for (int j = 0; j < block; j++)
            {
              dst[i * block + j] = L(i, j);
            }
          }
        }
      },
      64);
  for (Index a = 0; a < num_blocks; a++)
  {
    if (std::isnan(factors[bb * a]))
    {
      throw std::runtime_error("BlockJacobi: diagonal block " + std::to_string(a) +
                               " is not positive definite");
    }
  }
}

void BlockJacobi::Apply(std::span<const double> r, std::span<double> z) const
{
  const std::size_t bb = static_cast<std::size_t>(block) * block;
  ParallelFor(
      0, num_blocks,
      [&](Index first, Index last)
      {
        for (Index a = first; a < last; a++)
        {
          const double *L = factors.data() + bb * a;
          const double *ra = r.data() + static_cast<std::size_t>(a) * block;
          double *za = z.data() + static_cast<std::size_t>(a) * block;
          // L y = r, then L^T z = y.
          for (int i = 0; i < block; i++)
          {
            double s = ra[i];
            for (int j = 0; j < i; j++)
            {
              s -= L[i * block + j] * za[j];
            }
            za[i] = s / L[i * block + i];
          }
          for (int i = block - 1; i >= 0; i--)
          {
            double s = za[i];
            for (int j = i + 1; j < block; j++)
            {
              s -= L[j * block + i] * za[j];
            }
            za[i] = s / L[i * block + i];
          }
        }
      },
      256);
}

LinearOperator BlockJacobi::AsOperator() const
{
  return [this](std::span<const double> r, std::span<double> z) { Apply(r, z); };
}

}  // namespace polymg
