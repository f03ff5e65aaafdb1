// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#include "polymg/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include "polymg/parallel.hpp"

namespace polymg
{

SparseMatrix::SparseMatrix(Index rows_, Index cols_, std::vector<Offset> row_ptr_,
                           std::vector<Index> col_idx_, std::vector<double> values_)
  : rows(rows_), cols(cols_), row_ptr(std::move(row_ptr_)), col_idx(std::move(col_idx_)),
    values(std::move(values_))
{
  if (static_cast<Index>(row_ptr.size()) != rows + 1 ||
      static_cast<Offset>(col_idx.size()) != row_ptr.back() || values.size() != col_idx.size())
  {
    throw std::invalid_argument("Inconsistent CSR arrays");
  }
}

SparseMatrix SparseMatrix::Identity(Index n)
{
  std::vector<double> d(n, 1.0);
  return Diagonal(d);
}

SparseMatrix SparseMatrix::Diagonal(std::span<const double> d)
{
  const Index n = static_cast<Index>(d.size());
  std::vector<Offset> ptr(n + 1);
  std::vector<Index> col(n);
  for (Index i = 0; i < n; i++)
  {
    ptr[i + 1] = i + 1;
    col[i] = i;
  }
  return SparseMatrix(n, n, std::move(ptr), std::move(col), std::vector<double>(d.begin(), d.end()));
}

SparseMatrix SparseMatrix::BlockPattern(const std::vector<std::vector<Index>> &neighbors,
                                        int row_block, Index col_blocks, int col_block)
{
  const Index nb = static_cast<Index>(neighbors.size());
  SparseMatrix A;
  A.rows = nb * row_block;
  A.cols = col_blocks * col_block;
  A.row_ptr.assign(A.rows + 1, 0);
  for (Index a = 0; a < nb; a++)
  {
    const Offset len = static_cast<Offset>(neighbors[a].size()) * col_block;
    for (int r = 0; r < row_block; r++)
    {
      const Index i = a * row_block + r;
      A.row_ptr[i + 1] = A.row_ptr[i] + len;
    }
  }
  A.col_idx.resize(A.row_ptr.back());
  A.values.assign(A.row_ptr.back(), 0.0);
  ParallelFor(0, nb,
              [&](Index b0, Index b1)
              {
                for (Index a = b0; a < b1; a++)
                {
                  for (int r = 0; r < row_block; r++)
                  {
                    Offset k = A.row_ptr[a * row_block + r];
                    for (Index b : neighbors[a])
                    {
                      for (int c = 0; c < col_block; c++)
                      {
                        A.col_idx[k++] = b * col_block + c;
                      }
                    }
                  }
                }
              },
              256);
  return A;
}

Offset SparseMatrix::Find(Index i, Index j) const
{
  const auto b = col_idx.begin() + row_ptr[i], e = col_idx.begin() + row_ptr[i + 1];
  const auto it = std::lower_bound(b, e, j);
  return (it != e && *it == j) ? static_cast<Offset>(it - col_idx.begin()) : -1;
}

double SparseMatrix::Entry(Index i, Index j) const
{
  const Offset k = Find(i, j);
  return k < 0 ? 0.0 : values[k];
}

void SparseMatrix::AddBlock(Index row0, Index col0, int nr, int nc,
                            std::span<const double> block, double scale)
{
  for (int r = 0; r < nr; r++)
  {
    const Offset k = Find(row0 + r, col0);
    if (k < 0)
    {
      throw std::logic_error("Block outside the sparsity pattern");
    }
    for (int c = 0; c < nc; c++)
    {
      // Blocks are stored contiguously within a row.
      values[k + c] += scale * block[static_cast<std::size_t>(r) * nc + c];
    }
  }
}

void SparseMatrix::Mult(std::span<const double> x, std::span<double> y) const
{
  ParallelFor(0, rows,
              [&](Index b, Index e)
              {
                for (Index i = b; i < e; i++)
                {
                  double s = 0.0;
                  for (Offset k = row_ptr[i]; k < row_ptr[i + 1]; k++)
                  {
                    s += values[k] * x[col_idx[k]];
                  }
                  y[i] = s;
                }
              },
              1024);
}

void SparseMatrix::AddMult(double a, std::span<const double> x, std::span<double> y) const
{
  ParallelFor(0, rows,
              [&](Index b, Index e)
              {
                for (Index i = b; i < e; i++)
                {
                  double s = 0.0;
                  for (Offset k = row_ptr[i]; k < row_ptr[i + 1]; k++)
                  {
                    s += values[k] * x[col_idx[k]];
                  }
                  y[i] += a * s;
                }
              },
              1024);
}

void SparseMatrix::MultTranspose(std::span<const double> x, std::span<double> y) const
{
  std::fill(y.begin(), y.end(), 0.0);
  for (Index i = 0; i < rows; i++)
  {
    const double xi = x[i];
    for (Offset k = row_ptr[i]; k < row_ptr[i + 1]; k++)
    {
      y[col_idx[k]] += values[k] * xi;
    }
  }
}

Vector SparseMatrix::DiagonalEntries() const
{
  Vector d(std::min(rows, cols), 0.0);
  for (Index i = 0; i < static_cast<Index>(d.size()); i++)
  {
    d[i] = Entry(i, i);
  }
  return d;
}

double SparseMatrix::MaxAbs() const
{
  double m = 0.0;
  for (double v : values)
  {
    m = std::max(m, std::abs(v));
  }
  return m;
}

double SparseMatrix::AsymmetryMax() const
{
  double m = 0.0;
  for (Index i = 0; i < rows; i++)
  {
    for (Offset k = row_ptr[i]; k < row_ptr[i + 1]; k++)
    {
      const Index j = col_idx[k];
      const double aji = j < rows ? Entry(j, i) : 0.0;
      m = std::max(m, std::abs(values[k] - aji));
    }
  }
  return m;
}

SparseMatrix SparseMatrix::Transpose() const
{
  std::vector<Offset> ptr(cols + 1, 0);
  for (Index j : col_idx)
  {
    ptr[j + 1]++;
  }
  for (Index j = 0; j < cols; j++)
  {
    ptr[j + 1] += ptr[j];
  }
  std::vector<Index> col(col_idx.size());
  std::vector<double> val(values.size());
  std::vector<Offset> next(ptr.begin(), ptr.end() - 1);
  for (Index i = 0; i < rows; i++)
  {
    for (Offset k = row_ptr[i]; k < row_ptr[i + 1]; k++)
    {
      const Offset pos = next[col_idx[k]]++;
      col[pos] = i;
      val[pos] = values[k];
    }
  }
  return SparseMatrix(cols, rows, std::move(ptr), std::move(col), std::move(val));
}

std::size_t SparseMatrix::MemoryBytes() const
{
  return row_ptr.capacity() * sizeof(Offset) + col_idx.capacity() * sizeof(Index) +
         values.capacity() * sizeof(double);
}

void SparseMatrix::Release()
{
  std::vector<Offset>().swap(row_ptr);
  std::vector<Index>().swap(col_idx);
  std::vector<double>().swap(values);
  row_ptr.assign(1, 0);
  rows = 0;
}

Eigen::SparseMatrix<double, Eigen::ColMajor, int> SparseMatrix::ToEigen() const
{
  std::vector<Eigen::Triplet<double, int>> t;
  t.reserve(col_idx.size());
  for (Index i = 0; i < rows; i++)
  {
    for (Offset k = row_ptr[i]; k < row_ptr[i + 1]; k++)
    {
      t.emplace_back(i, col_idx[k], values[k]);
    }
  }
  Eigen::SparseMatrix<double, Eigen::ColMajor, int> E(rows, cols);
  E.setFromTriplets(t.begin(), t.end());
  return E;
}

SparseMatrix Multiply(const SparseMatrix &A, const SparseMatrix &B)
{
  if (A.Cols() != B.Rows())
  {
    throw std::invalid_argument("Sparse product shape mismatch");
  }
  const Index n = A.Rows(), m = B.Cols();
  const auto &ap = A.RowPtr();
  const auto &ac = A.ColIdx();
  const auto &av = A.Values();
  const auto &bp = B.RowPtr();
  const auto &bc = B.ColIdx();
  const auto &bv = B.Values();

  // Symbolic pass: row lengths.
  std::vector<Offset> ptr(n + 1, 0);
  ParallelFor(0, n,
              [&](Index r0, Index r1)
              {
                std::vector<Index> mark(m, -1);
                for (Index i = r0; i < r1; i++)
                {
                  Offset len = 0;
                  for (Offset k = ap[i]; k < ap[i + 1]; k++)
                  {
                    const Index j = ac[k];
                    for (Offset l = bp[j]; l < bp[j + 1]; l++)
                    {
                      if (mark[bc[l]] != i)
                      {
                        mark[bc[l]] = i;
                        len++;
                      }
                    }
                  }
                  ptr[i + 1] = len;
                }
              },
              512);
  for (Index i = 0; i < n; i++)
  {
    ptr[i + 1] += ptr[i];
  }
  std::vector<Index> col(ptr.back());
  std::vector<double> val(ptr.back());

  // Numeric pass with a dense accumulator.
  ParallelFor(0, n,
              [&](Index r0, Index r1)
              {
                std::vector<double> acc(m, 0.0);
                std::vector<Index> mark(m, -1);
                for (Index i = r0; i < r1; i++)
                {
                  Offset pos = ptr[i];
                  for (Offset k = ap[i]; k < ap[i + 1]; k++)
                  {
                    const Index j = ac[k];
                    const double a = av[k];
                    for (Offset l = bp[j]; l < bp[j + 1]; l++)
                    {
                      const Index c = bc[l];
                      if (mark[c] != i)
                      {
                        mark[c] = i;
                        col[pos++] = c;
                        acc[c] = 0.0;
                      }
                      acc[c] += a * bv[l];
                    }
                  }
                  std::sort(col.begin() + ptr[i], col.begin() + ptr[i + 1]);
                  for (Offset k = ptr[i]; k < ptr[i + 1]; k++)
                  {
                    val[k] = acc[col[k]];
                  }
                }
              },
              512);
  return SparseMatrix(n, m, std::move(ptr), std::move(col), std::move(val));
}

SparseMatrix Add(double a, const SparseMatrix &A, double b, const SparseMatrix &B)
{
  if (A.Rows() != B.Rows() || A.Cols() != B.Cols())
  {
    throw std::invalid_argument("Sparse sum shape mismatch");
  }
  const Index n = A.Rows();
  std::vector<Offset> ptr(n + 1, 0);
  std::vector<Index> col;
  std::vector<double> val;
  col.reserve(std::max(A.Nnz(), B.Nnz()));
  val.reserve(std::max(A.Nnz(), B.Nnz()));
  for (Index i = 0; i < n; i++)
  {
    Offset ka = A.RowPtr()[i], kb = B.RowPtr()[i];
    const Offset ea = A.RowPtr()[i + 1], eb = B.RowPtr()[i + 1];
    while (ka < ea || kb < eb)
    {
      const Index ca = ka < ea ? A.ColIdx()[ka] : std::numeric_limits<Index>::max();
      const Index cb = kb < eb ? B.ColIdx()[kb] : std::numeric_limits<Index>::max();
      if (ca == cb)
      {
        col.push_back(ca);
        val.push_back(a * A.Values()[ka++] + b * B.Values()[kb++]);
      }
      else if (ca < cb)
      {
        col.push_back(ca);
        val.push_back(a * A.Values()[ka++]);
      }
      else
      {
        col.push_back(cb);
        val.push_back(b * B.Values()[kb++]);
      }
    }
    ptr[i + 1] = static_cast<Offset>(col.size());
  }
  return SparseMatrix(n, A.Cols(), std::move(ptr), std::move(col), std::move(val));
}

SparseMatrix GalerkinProduct(const SparseMatrix &A, const SparseMatrix &P)
{
  if (A.Rows() != A.Cols() || A.Cols() != P.Rows())
  {
    throw std::invalid_argument("Galerkin product shape mismatch");
  }
  const SparseMatrix AP = Multiply(A, P);
  const SparseMatrix X = Multiply(P.Transpose(), AP);
  return Add(0.5, X, 0.5, X.Transpose());
}

}  // namespace polymg
