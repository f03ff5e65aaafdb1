// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#include "polymg/matrixfree.hpp"

#include <algorithm>
#include <stdexcept>
#include "polymg/geometry.hpp"
#include "polymg/parallel.hpp"

namespace polymg
{

OperationCount OperationCountEstimate(int degree, int dim)
{
  if (degree < 1 || dim < 1)
  {
    throw std::invalid_argument("Operation count needs p >= 1 and d >= 1");
  }
  long long n = degree + 1, a = 1, b = 1;
  for (int d = 0; d < dim; d++)
  {
    a *= n * n;
    b *= n;
  }
  return {a, dim * b * n};
}

namespace
{

constexpr int IPow(int n, int e)
{
  int r = 1;
  for (int i = 0; i < e; i++)
  {
    r *= n;
  }
  return r;
}

// One-dimensional contraction along an axis of an n^dim tensor (axis 0 fastest).
// Forward: out[.., q, ..] = sum_i M[q n + i] in[.., i, ..]; transposed uses M[i n + q].
template <int n, int dim, int axis, bool transpose, bool add>
inline void Contract(const double *M, const double *in, double *out)
{
  constexpr int stride = IPow(n, axis);
  constexpr int outer = IPow(n, dim) / (stride * n);
  for (int o = 0; o < outer; o++)
  {
    for (int s = 0; s < stride; s++)
    {
      const double *ip = in + o * stride * n + s;
      double *op = out + o * stride * n + s;
      double x[n];
      for (int i = 0; i < n; i++)
      {
        x[i] = ip[i * stride];
      }
      for (int q = 0; q < n; q++)
      {
        double sum = 0.0;
        for (int i = 0; i < n; i++)
        {
          sum += (transpose ? M[i * n + q] : M[q * n + i]) * x[i];
        }
        if constexpr (add)
        {
          op[q * stride] += sum;
        }
        else
        {
          op[q * stride] = sum;
        }
      }
    }
  }
}

int SymIndex(int dim, int a, int b)
{
  if (a > b)
  {
    std::swap(a, b);
  }
  if (dim == 2)
  {
    return a == 0 ? b : 2;
  }
  static constexpr int idx[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
  return idx[a][b];
}

}  // namespace

MatrixFreeOperator::MatrixFreeOperator(const DGSpace &space_, const ConductivityField &D,
                                       const ModelConstants &constants)
  : space(&space_), dim(space_.Dimension()), n1(space_.Degree() + 1),
    nf(space_.DofsPerEntity()), n_dofs(space_.TotalDofs()), shift(constants.Shift())
{
  if (space_.Level() != 0)
  {
    throw std::invalid_argument("Matrix-free operator acts on the level-0 space");
  }
  constants.Validate();
  const Mesh &mesh = space_.GetMesh();
  const auto &b1 = space_.Basis().Basis1D();
  const auto g = GaussLegendre(n1);
  qweights = g.weights;
  phi.resize(n1 * n1);
  dphi.resize(n1 * n1);
  for (int q = 0; q < n1; q++)
  {
    for (int i = 0; i < n1; i++)
    {
      phi[q * n1 + i] = b1.Value(i, g.points[q]);
      dphi[q * n1 + i] = b1.Derivative(i, g.points[q]);
    }
  }
  for (int s = 0; s < 2; s++)
  {
    dphi_end[s].resize(n1);
    for (int i = 0; i < n1; i++)
    {
      dphi_end[s][i] = b1.Derivative(i, static_cast<double>(s));
    }
  }

  constant_D = D.IsConstant();
  if (constant_D)
  {
    D_const = D.Evaluate(dim, mesh.Vertices().front());
  }

  // Cell data.
  const Index ne = mesh.NumElements();
  const QuadratureRule rule = TensorGauss(dim, n1);
  const int nq = static_cast<int>(rule.points.size());
  const int nsym = dim * (dim + 1) / 2;
  cell_compressed.assign(ne, 0);
  cell_h.assign(ne, Point{0.0, 0.0, 0.0});
  cell_det.assign(ne, 0.0);
  cell_offset.assign(ne, -1);
  for (Index k = 0; k < ne; k++)
  {
    if (mesh.IsBox(k))
    {
      const Tensor J = mesh.Jacobian(k, Point{0.5, 0.5, 0.5});
      double det = 1.0;
      for (int d = 0; d < dim; d++)
      {
        cell_h[k][d] = J[d][d];
        det *= J[d][d];
      }
      cell_det[k] = det;
    }
    if (mesh.IsBox(k) && constant_D)
    {
      cell_compressed[k] = 1;
      continue;
    }
    cell_offset[k] = static_cast<Offset>(cell_data.size());
    const CellQuadrature cq = ComputeCellQuadrature(mesh, k, rule);
    for (int q = 0; q < nq; q++)
    {
      const Tensor Dq = constant_D ? D_const : D.Evaluate(dim, cq.x[q]);
      cell_data.push_back(shift * cq.JxW[q]);
      const Tensor &iJ = cq.inv_J[q];
      for (int a = 0; a < dim; a++)
      {
        for (int b = a; b < dim; b++)
        {
          double s = 0.0;
          for (int i = 0; i < dim; i++)
          {
            for (int j = 0; j < dim; j++)
            {
              s += iJ[a][i] * Dq[i][j] * iJ[b][j];
            }
          }
          cell_data.push_back(cq.JxW[q] * s);
        }
      }
      (void)nsym;
    }
  }

  // Face data.
  const auto gf = GaussLegendre(n1);
  const int nqf = IPow(n1, dim - 1);
  std::vector<double> blocks;
  for (Index f = 0; f < mesh.NumInteriorFaces(); f++)
  {
    const auto &face = mesh.InteriorFaces()[f];
    const bool fast = mesh.IsBox(face.plus) && mesh.IsBox(face.minus) &&
                      face.face_minus == (face.face_plus ^ 1);
    if (!fast)
    {
      GenericFace gfc{face.plus, face.minus, static_cast<Offset>(face_blocks.size())};
      FaceMatrices(space_, D, face, blocks);
      face_blocks.insert(face_blocks.end(), blocks.begin(), blocks.end());
      generic_faces.push_back(gfc);
      continue;
    }
    FastFace ff;
    ff.plus = face.plus;
    ff.minus = face.minus;
    ff.dir = face.face_plus / 2;
    ff.side_plus = face.face_plus % 2;
    ff.sigma = FacePenalty(space_, D, f);
    ff.area = 1.0;
    for (int d = 0; d < dim; d++)
    {
      if (d != ff.dir)
      {
        ff.area *= cell_h[face.plus][d];
      }
    }
    ff.dn_offset = -1;
    if (!constant_D)
    {
      ff.dn_offset = static_cast<Offset>(face_dn.size());
      const double sign = ff.side_plus ? 1.0 : -1.0;
      for (int q = 0; q < nqf; q++)
      {
        const int a = q % n1, b = q / n1;
        const Point xi = FacePoint(dim, face.face_plus, gf.points[a],
                                   dim == 3 ? gf.points[b] : 0.0);
        const Tensor Dq = D.Evaluate(dim, mesh.MapToPhysical(face.plus, xi));
        for (int c = 0; c < dim; c++)
        {
          face_dn.push_back(sign * Dq[c][ff.dir]);
        }
      }
    }
    fast_faces.push_back(ff);
  }
}

std::size_t MatrixFreeOperator::MemoryBytes() const
{
  return cell_data.capacity() * sizeof(double) + face_dn.capacity() * sizeof(double) +
         face_blocks.capacity() * sizeof(double) + cell_h.capacity() * sizeof(Point) +
         fast_faces.capacity() * sizeof(FastFace) + generic_faces.capacity() * sizeof(GenericFace);
}

void MatrixFreeOperator::Mult(std::span<const double> x, std::span<double> y) const
{
  if (static_cast<Index>(x.size()) != n_dofs || static_cast<Index>(y.size()) != n_dofs)
  {
    throw std::invalid_argument("Matrix-free operator: vector size mismatch");
  }
#define POLYMG_MF_CASE(D, N)        \
  if (dim == D && n1 == N)          \
  {                                 \
    MultImpl<D, N>(x, y);           \
    return;                         \
  }
  POLYMG_MF_CASE(2, 2)
  POLYMG_MF_CASE(2, 3)
  POLYMG_MF_CASE(2, 4)
  POLYMG_MF_CASE(2, 5)
  POLYMG_MF_CASE(2, 6)
  POLYMG_MF_CASE(2, 7)
  POLYMG_MF_CASE(2, 8)
  POLYMG_MF_CASE(3, 2)
  POLYMG_MF_CASE(3, 3)
  POLYMG_MF_CASE(3, 4)
  POLYMG_MF_CASE(3, 5)
  POLYMG_MF_CASE(3, 6)
  POLYMG_MF_CASE(3, 7)
  POLYMG_MF_CASE(3, 8)
#undef POLYMG_MF_CASE
  throw std::logic_error("Matrix-free operator: unsupported dimension/degree");
}

template <int dim, int n>
void MatrixFreeOperator::MultImpl(std::span<const double> x, std::span<double> y) const
{
  constexpr int nd = IPow(n, dim);
  constexpr int nsym = dim * (dim + 1) / 2;
  const double *P = phi.data();
  const double *DP = dphi.data();
  const Index ne = space->NumEntities();

  // Cell integrals; each element owns its output block.
  ParallelFor(0, ne,
              [&](Index k0, Index k1)
              {
                double t0[nd], t1[nd], t2[nd], u[nd], g[3][nd];
                for (Index k = k0; k < k1; k++)
                {
                  const double *v = x.data() + static_cast<std::size_t>(k) * nd;
                  double *out = y.data() + static_cast<std::size_t>(k) * nd;
                  if constexpr (dim == 2)
                  {
                    Contract<n, 2, 0, false, false>(P, v, t0);
                    Contract<n, 2, 0, false, false>(DP, v, t1);
                    Contract<n, 2, 1, false, false>(P, t0, u);
                    Contract<n, 2, 1, false, false>(P, t1, g[0]);
                    Contract<n, 2, 1, false, false>(DP, t0, g[1]);
                  }
                  else
                  {
                    Contract<n, 3, 0, false, false>(P, v, t0);
                    Contract<n, 3, 0, false, false>(DP, v, t1);
                    Contract<n, 3, 1, false, false>(P, t0, t2);   // B00
                    Contract<n, 3, 1, false, false>(DP, t0, u);   // B01 (temporarily)
                    Contract<n, 3, 2, false, false>(DP, t2, g[2]);
                    Contract<n, 3, 2, false, false>(P, u, g[1]);
                    Contract<n, 3, 1, false, false>(P, t1, t0);   // B10
                    Contract<n, 3, 2, false, false>(P, t0, g[0]);
                    Contract<n, 3, 2, false, false>(P, t2, u);
                  }

                  // Quadrature point operations.
                  if (cell_compressed[k])
                  {
                    const Point &h = cell_h[k];
                    const double det = cell_det[k];
                    double Gc[3][3];
                    for (int a = 0; a < dim; a++)
                    {
                      for (int b = 0; b < dim; b++)
                      {
                        Gc[a][b] = det * D_const[a][b] / (h[a] * h[b]);
                      }
                    }
                    const bool diagonal =
                      dim == 2 ? Gc[0][1] == 0.0
                               : (Gc[0][1] == 0.0 && Gc[0][2] == 0.0 && Gc[1][2] == 0.0);
                    for (int q = 0; q < nd; q++)
                    {
                      int r = q;
                      double w = 1.0;
                      for (int d = 0; d < dim; d++)
                      {
                        w *= qweights[r % n];
                        r /= n;
                      }
                      u[q] *= shift * det * w;
                      if (diagonal)
                      {
                        for (int a = 0; a < dim; a++)
                        {
                          g[a][q] *= w * Gc[a][a];
                        }
                      }
                      else
                      {
                        double gr[3] = {g[0][q], g[1][q], dim == 3 ? g[2][q] : 0.0};
                        for (int a = 0; a < dim; a++)
                        {
                          double s = 0.0;
                          for (int b = 0; b < dim; b++)
                          {
                            s += Gc[a][b] * gr[b];
                          }
                          g[a][q] = w * s;
                        }
                      }
                    }
                  }
                  else
                  {
                    const double *cd = cell_data.data() + cell_offset[k];
                    for (int q = 0; q < nd; q++)
                    {
                      const double *c = cd + q * (1 + nsym);
                      u[q] *= c[0];
                      double gr[3] = {g[0][q], g[1][q], dim == 3 ? g[2][q] : 0.0};
                      for (int a = 0; a < dim; a++)
                      {
                        double s = 0.0;
                        for (int b = 0; b < dim; b++)
                        {
                          s += c[1 + SymIndex(dim, a, b)] * gr[b];
                        }
                        g[a][q] = s;
                      }
                    }
                  }

                  // Integrate against test functions (transposed contractions).
                  if constexpr (dim == 2)
                  {
                    Contract<n, 2, 1, true, false>(P, u, t0);
                    Contract<n, 2, 1, true, true>(DP, g[1], t0);
                    Contract<n, 2, 1, true, false>(P, g[0], t1);
                    Contract<n, 2, 0, true, false>(P, t0, out);
                    Contract<n, 2, 0, true, true>(DP, t1, out);
                  }
                  else
                  {
                    Contract<n, 3, 2, true, false>(P, u, t0);     // C00
                    Contract<n, 3, 2, true, true>(DP, g[2], t0);
                    Contract<n, 3, 2, true, false>(P, g[0], t1);  // C10
                    Contract<n, 3, 2, true, false>(P, g[1], t2);  // C01
                    Contract<n, 3, 1, true, false>(P, t0, u);     // D0
                    Contract<n, 3, 1, true, true>(DP, t2, u);
                    Contract<n, 3, 1, true, false>(P, t1, t0);    // D1
                    Contract<n, 3, 0, true, false>(P, u, out);
                    Contract<n, 3, 0, true, true>(DP, t0, out);
                  }
                }
              },
              64);

  // Faces between aligned boxes: tensor-product trace kernels.
  constexpr int nt = IPow(n, dim - 1);
  const Mesh &mesh = space->GetMesh();
  (void)mesh;
  int stride[3] = {1, n, n * n};
  for (const FastFace &ff : fast_faces)
  {
    const int dir = ff.dir;
    int tax[2] = {0, 0};
    {
      int t = 0;
      for (int d = 0; d < dim; d++)
      {
        if (d != dir)
        {
          tax[t++] = d;
        }
      }
    }
    const Index elem[2] = {ff.plus, ff.minus};
    const int side[2] = {ff.side_plus, 1 - ff.side_plus};
    const Point *h[2] = {&cell_h[ff.plus], &cell_h[ff.minus]};
    auto node = [&](int k, int t) -> int
    {
      const int a = t % n, b = dim == 3 ? t / n : 0;
      return k * stride[dir] + a * stride[tax[0]] + (dim == 3 ? b * stride[tax[1]] : 0);
    };

    // Traces and reference derivatives at face quadrature points.
    double uq[2][nt], nq[2][nt], tq[2][2][nt];
    double tr[nt], nr[nt], tmp[nt];
    for (int e = 0; e < 2; e++)
    {
      const double *v = x.data() + static_cast<std::size_t>(elem[e]) * nd;
      const double *ld = dphi_end[side[e]].data();
      for (int t = 0; t < nt; t++)
      {
        tr[t] = v[node(side[e] * (n - 1), t)];
        double s = 0.0;
        for (int k = 0; k < n; k++)
        {
          s += ld[k] * v[node(k, t)];
        }
        nr[t] = s;
      }
      if constexpr (dim == 2)
      {
        Contract<n, 1, 0, false, false>(P, tr, uq[e]);
        Contract<n, 1, 0, false, false>(P, nr, nq[e]);
        Contract<n, 1, 0, false, false>(DP, tr, tq[e][0]);
      }
      else
      {
        Contract<n, 2, 0, false, false>(P, tr, tmp);
        Contract<n, 2, 1, false, false>(P, tmp, uq[e]);
        Contract<n, 2, 1, false, false>(DP, tmp, tq[e][1]);
        Contract<n, 2, 0, false, false>(DP, tr, tmp);
        Contract<n, 2, 1, false, false>(P, tmp, tq[e][0]);
        Contract<n, 2, 0, false, false>(P, nr, tmp);
        Contract<n, 2, 1, false, false>(P, tmp, nq[e]);
      }
    }

    // Quadrature point fluxes.
    double cv[nt], cgn[2][nt], cgt[2][2][nt];
    const double sign = ff.side_plus ? 1.0 : -1.0;
    for (int q = 0; q < nt; q++)
    {
      double Dn[3];
      if (ff.dn_offset < 0)
      {
        for (int c = 0; c < dim; c++)
        {
          Dn[c] = sign * D_const[c][dir];
        }
      }
      else
      {
        for (int c = 0; c < dim; c++)
        {
          Dn[c] = face_dn[ff.dn_offset + q * dim + c];
        }
      }
      double w = ff.area;
      {
        int r = q;
        for (int d = 0; d < dim - 1; d++)
        {
          w *= qweights[r % n];
          r /= n;
        }
      }
      double flux = 0.0;
      for (int e = 0; e < 2; e++)
      {
        const Point &he = *h[e];
        double s = Dn[dir] * nq[e][q] / he[dir];
        for (int t = 0; t < dim - 1; t++)
        {
          s += Dn[tax[t]] * tq[e][t][q] / he[tax[t]];
        }
        flux += 0.5 * s;
      }
      const double jump = uq[0][q] - uq[1][q];
      cv[q] = w * (-flux + ff.sigma * jump);
      for (int e = 0; e < 2; e++)
      {
        const Point &he = *h[e];
        cgn[e][q] = -0.5 * jump * w * Dn[dir] / he[dir];
        for (int t = 0; t < dim - 1; t++)
        {
          cgt[e][t][q] = -0.5 * jump * w * Dn[tax[t]] / he[tax[t]];
        }
      }
    }

    // Back to element coefficients.
    for (int e = 0; e < 2; e++)
    {
      double *out = y.data() + static_cast<std::size_t>(elem[e]) * nd;
      const double *ld = dphi_end[side[e]].data();
      double vals[nt];
      for (int q = 0; q < nt; q++)
      {
        vals[q] = e == 0 ? cv[q] : -cv[q];
      }
      if constexpr (dim == 2)
      {
        Contract<n, 1, 0, true, false>(P, vals, tr);
        Contract<n, 1, 0, true, true>(DP, cgt[e][0], tr);
        Contract<n, 1, 0, true, false>(P, cgn[e], nr);
      }
      else
      {
        Contract<n, 2, 1, true, false>(P, vals, tmp);
        Contract<n, 2, 1, true, true>(DP, cgt[e][1], tmp);
        Contract<n, 2, 0, true, false>(P, tmp, tr);
        Contract<n, 2, 1, true, false>(P, cgt[e][0], tmp);
        Contract<n, 2, 0, true, true>(DP, tmp, tr);
        Contract<n, 2, 1, true, false>(P, cgn[e], tmp);
        Contract<n, 2, 0, true, false>(P, tmp, nr);
      }
      for (int t = 0; t < nt; t++)
      {
        out[node(side[e] * (n - 1), t)] += tr[t];
        for (int k = 0; k < n; k++)
        {
          out[node(k, t)] += ld[k] * nr[t];
        }
      }
    }
  }

  // Remaining faces: precomputed local matrices.
  for (const GenericFace &gf : generic_faces)
  {
    const Index elem[2] = {gf.plus, gf.minus};
    for (int r = 0; r < 2; r++)
    {
      double *out = y.data() + static_cast<std::size_t>(elem[r]) * nd;
      for (int s = 0; s < 2; s++)
      {
        const double *B = face_blocks.data() + gf.block_offset +
                          static_cast<std::size_t>(2 * r + s) * nd * nd;
        const double *v = x.data() + static_cast<std::size_t>(elem[s]) * nd;
        for (int i = 0; i < nd; i++)
        {
          double sum = 0.0;
          for (int j = 0; j < nd; j++)
          {
            sum += B[i * nd + j] * v[j];
          }
          out[i] += sum;
        }
      }
    }
  }
}

}  // namespace polymg
