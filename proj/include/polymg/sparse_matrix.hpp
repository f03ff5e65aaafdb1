// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POLYMG_SPARSE_MATRIX_HPP
#define POLYMG_SPARSE_MATRIX_HPP

#include <span>
#include <vector>
#include <Eigen/SparseCore>
#include "polymg/common.hpp"

namespace polymg
{

//
// Compressed sparse row matrix. Column indices are sorted and unique within each row.
//
class SparseMatrix
{
public:
  SparseMatrix() = default;
  SparseMatrix(Index rows, Index cols, std::vector<Offset> row_ptr, std::vector<Index> col_idx,
               std::vector<double> values);

  static SparseMatrix Identity(Index n);
  static SparseMatrix Diagonal(std::span<const double> d);

  // Entity-block pattern: row block a couples to every column block listed in
  // neighbors[a] (sorted, unique) with dense blocks of size row_block x col_block.
  // Values start at zero.
  static SparseMatrix BlockPattern(const std::vector<std::vector<Index>> &neighbors,
                                   int row_block, Index col_blocks, int col_block);

  Index Rows() const { return rows; }
  Index Cols() const { return cols; }
  Offset Nnz() const { return static_cast<Offset>(col_idx.size()); }
  const std::vector<Offset> &RowPtr() const { return row_ptr; }
  const std::vector<Index> &ColIdx() const { return col_idx; }
  const std::vector<double> &Values() const { return values; }
  std::vector<double> &Values() { return values; }

  // Position of entry (i, j) in the value array, or -1 if structurally zero.
  Offset Find(Index i, Index j) const;
  double Entry(Index i, Index j) const;

  // Add a dense block (row-major, ldim = number of columns) at block position.
  void AddBlock(Index row0, Index col0, int nr, int nc, std::span<const double> block,
                double scale = 1.0);

  // y = A x, y += a A x.
  void Mult(std::span<const double> x, std::span<double> y) const;
  void AddMult(double a, std::span<const double> x, std::span<double> y) const;

  // y = A^T x.
  void MultTranspose(std::span<const double> x, std::span<double> y) const;

  Vector DiagonalEntries() const;
  double MaxAbs() const;

  // max |A_ij - A_ji|, evaluated over the stored pattern.
  double AsymmetryMax() const;

  SparseMatrix Transpose() const;

  // Bytes held by the value/index arrays.
  std::size_t MemoryBytes() const;

  // Drop all storage (dimensions are kept).
  void Release();

  Eigen::SparseMatrix<double, Eigen::ColMajor, int> ToEigen() const;

private:
  Index rows = 0, cols = 0;
  std::vector<Offset> row_ptr{0};
  std::vector<Index> col_idx;
  std::vector<double> values;
};

// C = A B (Gustavson row-by-row product).
SparseMatrix Multiply(const SparseMatrix &A, const SparseMatrix &B);

// a A + b B on the union pattern.
SparseMatrix Add(double a, const SparseMatrix &A, double b, const SparseMatrix &B);

// P^T A P, symmetrized as (X + X^T) / 2.
SparseMatrix GalerkinProduct(const SparseMatrix &A, const SparseMatrix &P);

}  // namespace polymg

#endif  // POLYMG_SPARSE_MATRIX_HPP
