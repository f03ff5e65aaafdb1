// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POLYMG_MATRIXFREE_HPP
#define POLYMG_MATRIXFREE_HPP

#include <span>
#include <vector>
#include "polymg/assembly.hpp"

namespace polymg
{

// Per-element operation counts of one operator evaluation.
struct OperationCount
{
  long long naive = 0;       // (p+1)^{2d}
  long long factorized = 0;  // d (p+1)^{d+1}
};

OperationCount OperationCountEstimate(int degree, int dim);

//
// Assembly-free evaluation of A_0 = shift M + A on the level-0 space. Cell integrals use
// sum factorization over (p+1)^d Gauss points; faces between axis-aligned boxes use
// tensor-product trace kernels, other faces fall back to precomputed local face matrices.
//
class MatrixFreeOperator
{
public:
  MatrixFreeOperator(const DGSpace &space, const ConductivityField &D,
                     const ModelConstants &constants);

  Index Size() const { return n_dofs; }

  // y = A_0 x
  void Mult(std::span<const double> x, std::span<double> y) const;

  // Bytes of precomputed geometry and coefficient data.
  std::size_t MemoryBytes() const;

  // Number of faces served by the tensor-product trace kernel.
  Index NumFastFaces() const { return static_cast<Index>(fast_faces.size()); }

private:
  struct FastFace
  {
    Index plus, minus;
    int dir;
    int side_plus;
    double sigma;
    double area;  // product of tangential extents
    // D n on each face quadrature point (only when D varies); else const_Dn is used.
    Offset dn_offset;
  };

  struct GenericFace
  {
    Index plus, minus;
    Offset block_offset;  // 4 nf^2 values: (++, +-, -+, --), row-major
  };

  template <int dim, int n>
  void MultImpl(std::span<const double> x, std::span<double> y) const;

  const DGSpace *space;
  int dim;
  int n1;  // p + 1
  int nf;
  Index n_dofs;
  double shift;

  // 1D matrices at Gauss points: [q * n1 + i].
  std::vector<double> phi, dphi;
  std::vector<double> qweights;
  // l_i'(0) and l_i'(1).
  std::vector<double> dphi_end[2];

  bool constant_D;
  Tensor D_const{};

  // Cell data: compressed boxes (h, detJ) or per-quadrature-point metric terms.
  std::vector<char> cell_compressed;
  std::vector<Point> cell_h;
  std::vector<double> cell_det;
  std::vector<Offset> cell_offset;
  // Per point: mass weight followed by the symmetric metric d(d+1)/2 entries.
  std::vector<double> cell_data;

  std::vector<FastFace> fast_faces;
  std::vector<double> face_dn;
  std::vector<GenericFace> generic_faces;
  std::vector<double> face_blocks;
};

}  // namespace polymg

#endif  // POLYMG_MATRIXFREE_HPP
