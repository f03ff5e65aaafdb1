// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#include "polymg/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include "polymg/geometry.hpp"
#include "polymg/parallel.hpp"

namespace polymg
{

ConductivityField ConductivityField::Isotropic(double sigma)
{
  if (!(sigma >= 0.0))
  {
    throw std::invalid_argument("Conductivity must be nonnegative");
  }
  ConductivityField f;
  f.isotropic = true;
  f.sigma_iso = sigma;
  return f;
}

ConductivityField ConductivityField::Orthotropic(double sigma_l, double sigma_t,
                                                 double sigma_n,
                                                 std::function<FiberFrame(const Point &)> frame,
                                                 bool constant_frame)
{
  if (!(sigma_l >= 0.0 && sigma_t >= 0.0 && sigma_n >= 0.0))
  {
    throw std::invalid_argument("Conductivities must be nonnegative");
  }
  if (!frame)
  {
    throw std::invalid_argument("Orthotropic conductivity needs a fiber frame");
  }
  ConductivityField f;
  f.isotropic = false;
  f.constant_frame = constant_frame;
  f.sigma = {sigma_l, sigma_t, sigma_n};
  f.frame = std::move(frame);
  return f;
}

Tensor ConductivityField::Evaluate(int dim, const Point &x) const
{
  if (isotropic)
  {
    return IdentityTensor(dim, sigma_iso);
  }
  const FiberFrame v = frame(x);
  for (int a = 0; a < dim; a++)
  {
    for (int b = 0; b < dim; b++)
    {
      double dot = 0.0;
      for (int i = 0; i < dim; i++)
      {
        dot += v[a][i] * v[b][i];
      }
      if (std::abs(dot - (a == b ? 1.0 : 0.0)) > 1e-12)
      {
        throw std::invalid_argument("Fiber frame is not orthonormal");
      }
    }
  }
  Tensor D{};
  for (int q = 0; q < dim; q++)
  {
    for (int i = 0; i < dim; i++)
    {
      for (int j = 0; j < dim; j++)
      {
        D[i][j] += sigma[q] * v[q][i] * v[q][j];
      }
    }
  }
  return D;
}

void ModelConstants::Validate() const
{
  if (!(chi_m > 0.0 && C_m > 0.0 && dt > 0.0 && T_final > 0.0))
  {
    throw std::invalid_argument("Model constants chi_m, C_m, dt, T_final must be positive");
  }
  if (dt > T_final)
  {
    throw std::invalid_argument("Time step exceeds the final time");
  }
}

double PenaltyAlpha(int degree, double face_measure, double measure_plus, double measure_minus)
{
  if (!(face_measure > 0.0) || !(measure_plus > 0.0) || !(measure_minus > 0.0))
  {
    throw std::invalid_argument("Degenerate face or element measure in penalty");
  }
  return degree * (degree + 1.0) * face_measure *
         std::max(1.0 / measure_plus, 1.0 / measure_minus);
}

std::vector<std::vector<Index>> ElementAdjacency(const Mesh &mesh)
{
  std::vector<std::vector<Index>> adj(mesh.NumElements());
  for (Index k = 0; k < mesh.NumElements(); k++)
  {
    adj[k].push_back(k);
    for (int f = 0; f < mesh.FacesPerElement(); f++)
    {
      const Index n = mesh.Neighbor(k, f);
      if (n >= 0)
      {
        adj[k].push_back(n);
      }
    }
    std::sort(adj[k].begin(), adj[k].end());
    adj[k].erase(std::unique(adj[k].begin(), adj[k].end()), adj[k].end());
  }
  return adj;
}

namespace
{

void RequireFineSpace(const DGSpace &space)
{
  if (space.Level() != 0)
  {
    throw std::invalid_argument("Assembly operates on the level-0 space");
  }
}

// Basis values and reference gradients at a set of reference points.
struct BasisTable
{
  int nq = 0, nf = 0;
  std::vector<double> phi;     // [q * nf + i]
  std::vector<Point> grad;     // [q * nf + i]
};

BasisTable Tabulate(const TensorBasis &basis, const std::vector<Point> &points)
{
  BasisTable t;
  t.nq = static_cast<int>(points.size());
  t.nf = basis.NumFunctions();
  t.phi.resize(static_cast<std::size_t>(t.nq) * t.nf);
  t.grad.resize(t.phi.size());
  for (int q = 0; q < t.nq; q++)
  {
    for (int i = 0; i < t.nf; i++)
    {
      t.phi[q * t.nf + i] = basis.Value(i, points[q]);
      t.grad[q * t.nf + i] = basis.Gradient(i, points[q]);
    }
  }
  return t;
}

Point Apply(int dim, const Tensor &D, const Point &v)
{
  Point r{0.0, 0.0, 0.0};
  for (int i = 0; i < dim; i++)
  {
    for (int j = 0; j < dim; j++)
    {
      r[i] += D[i][j] * v[j];
    }
  }
  return r;
}

double DotP(int dim, const Point &a, const Point &b)
{
  double s = 0.0;
  for (int i = 0; i < dim; i++)
  {
    s += a[i] * b[i];
  }
  return s;
}

double PenaltyFromQuadrature(const DGSpace &space, const ConductivityField &D,
                             const InteriorFace &face, const FaceQuadrature &fq)
{
  const int dim = space.Dimension();
  const Mesh &mesh = space.GetMesh();
  double area = 0.0, ndn = 0.0;
  for (std::size_t q = 0; q < fq.JxW.size(); q++)
  {
    const Tensor Dq = D.Evaluate(dim, fq.x[q]);
    area += fq.JxW[q];
    ndn += fq.JxW[q] * DotP(dim, fq.normal[q], Apply(dim, Dq, fq.normal[q]));
  }
  const double alpha = PenaltyAlpha(space.Degree(), area, mesh.ElementMeasure(face.plus),
                                    mesh.ElementMeasure(face.minus));
  return alpha * ndn / area;
}

}  // namespace

double FacePenalty(const DGSpace &space, const ConductivityField &D, Index f)
{
  RequireFineSpace(space);
  const Mesh &mesh = space.GetMesh();
  if (f < 0 || f >= mesh.NumInteriorFaces())
  {
    throw std::invalid_argument("Penalty requires an interior face id");
  }
  const auto &face = mesh.InteriorFaces()[f];
  return PenaltyFromQuadrature(space, D, face,
                               ComputeFaceQuadrature(mesh, face, space.Degree() + 1));
}

void FaceMatrices(const DGSpace &space, const ConductivityField &D, const InteriorFace &face,
                  std::vector<double> &blocks)
{
  RequireFineSpace(space);
  const int dim = space.Dimension();
  const int nf = space.DofsPerEntity();
  const FaceQuadrature fq = ComputeFaceQuadrature(space.GetMesh(), face, space.Degree() + 1);
  const double sigma = PenaltyFromQuadrature(space, D, face, fq);
  blocks.assign(4 * static_cast<std::size_t>(nf) * nf, 0.0);
  std::vector<double> phi[2], dn[2];
  for (int s = 0; s < 2; s++)
  {
    phi[s].resize(nf);
    dn[s].resize(nf);
  }
  // -{D grad u}.[v] - [u].{D grad v} + sigma [u].[v]
  for (std::size_t q = 0; q < fq.JxW.size(); q++)
  {
    const Tensor Dq = D.Evaluate(dim, fq.x[q]);
    const Point Dn = Apply(dim, Dq, fq.normal[q]);
    for (int s = 0; s < 2; s++)
    {
      const Point &xi = s == 0 ? fq.xi_plus[q] : fq.xi_minus[q];
      const Tensor &iJ = s == 0 ? fq.inv_J_plus[q] : fq.inv_J_minus[q];
      for (int i = 0; i < nf; i++)
      {
        phi[s][i] = space.Basis().Value(i, xi);
        dn[s][i] = DotP(dim, PhysicalGradient(dim, iJ, space.Basis().Gradient(i, xi)), Dn);
      }
    }
    const double w = fq.JxW[q];
    for (int r = 0; r < 2; r++)
    {
      const double sr = r == 0 ? 1.0 : -1.0;
      for (int s = 0; s < 2; s++)
      {
        const double ss = s == 0 ? 1.0 : -1.0;
        double *B = blocks.data() + static_cast<std::size_t>(2 * r + s) * nf * nf;
        for (int i = 0; i < nf; i++)
        {
          for (int j = 0; j < nf; j++)
          {
            B[i * nf + j] += w * (-0.5 * sr * dn[s][j] * phi[r][i] -
                                  0.5 * ss * phi[s][j] * dn[r][i] +
                                  sigma * sr * ss * phi[s][j] * phi[r][i]);
          }
        }
      }
    }
  }
}

SparseMatrix AssembleStiffness(const DGSpace &space, const ConductivityField &D)
{
  RequireFineSpace(space);
  const Mesh &mesh = space.GetMesh();
  const int dim = space.Dimension();
  const int nf = space.DofsPerEntity();
  const int nq1 = space.Degree() + 1;
  SparseMatrix A = SparseMatrix::BlockPattern(ElementAdjacency(mesh), nf, mesh.NumElements(), nf);

  const QuadratureRule rule = TensorGauss(dim, nq1);
  const BasisTable cell = Tabulate(space.Basis(), rule.points);
  ParallelFor(0, mesh.NumElements(),
              [&](Index k0, Index k1)
              {
                std::vector<double> local(static_cast<std::size_t>(nf) * nf);
                std::vector<Point> g(nf), Dg(nf);
                for (Index k = k0; k < k1; k++)
                {
                  std::fill(local.begin(), local.end(), 0.0);
                  const CellQuadrature cq = ComputeCellQuadrature(mesh, k, rule);
                  for (int q = 0; q < cell.nq; q++)
                  {
                    const Tensor Dq = D.Evaluate(dim, cq.x[q]);
                    for (int i = 0; i < nf; i++)
                    {
                      g[i] = PhysicalGradient(dim, cq.inv_J[q], cell.grad[q * nf + i]);
                      Dg[i] = Apply(dim, Dq, g[i]);
                    }
                    for (int i = 0; i < nf; i++)
                    {
                      for (int j = 0; j < nf; j++)
                      {
                        local[i * nf + j] += cq.JxW[q] * DotP(dim, Dg[j], g[i]);
                      }
                    }
                  }
                  A.AddBlock(k * nf, k * nf, nf, nf, local);
                }
              },
              64);

  std::vector<double> blocks;
  for (const auto &face : mesh.InteriorFaces())
  {
    FaceMatrices(space, D, face, blocks);
    const Index e[2] = {face.plus, face.minus};
    for (int r = 0; r < 2; r++)
    {
      for (int s = 0; s < 2; s++)
      {
        A.AddBlock(e[r] * nf, e[s] * nf, nf, nf,
                   std::span<const double>(blocks.data() +
                                               static_cast<std::size_t>(2 * r + s) * nf * nf,
                                           static_cast<std::size_t>(nf) * nf));
      }
    }
  }
  return A;
}

SparseMatrix AssembleMass(const DGSpace &space)
{
  RequireFineSpace(space);
  const Mesh &mesh = space.GetMesh();
  const int nf = space.DofsPerEntity();
  std::vector<std::vector<Index>> self(mesh.NumElements());
  for (Index k = 0; k < mesh.NumElements(); k++)
  {
    self[k] = {k};
  }
  SparseMatrix M = SparseMatrix::BlockPattern(self, nf, mesh.NumElements(), nf);
  const MassOperator op(space);
  std::vector<double> e(op.Size(), 0.0), col(op.Size(), 0.0);
  // Entity-local blocks: probe with unit vectors of the reference block, all entities at once.
  for (int j = 0; j < nf; j++)
  {
    std::fill(e.begin(), e.end(), 0.0);
    for (Index k = 0; k < mesh.NumElements(); k++)
    {
      e[static_cast<std::size_t>(k) * nf + j] = 1.0;
    }
    op.Mult(e, col);
    for (Index k = 0; k < mesh.NumElements(); k++)
    {
      for (int i = 0; i < nf; i++)
      {
        const Offset pos = M.Find(k * nf + i, k * nf + j);
        M.Values()[pos] = col[static_cast<std::size_t>(k) * nf + i];
      }
    }
  }
  return M;
}

SparseMatrix AssembleSystem(const SparseMatrix &M, const SparseMatrix &A,
                            const ModelConstants &constants)
{
  if (M.Rows() != A.Rows() || M.Cols() != A.Cols())
  {
    throw std::invalid_argument("Mass and stiffness dimensions differ");
  }
  constants.Validate();
  return Add(constants.Shift(), M, 1.0, A);
}

MassOperator::MassOperator(const DGSpace &space)
  : num_entities(space.NumEntities()), block(space.DofsPerEntity())
{
  RequireFineSpace(space);
  const Mesh &mesh = space.GetMesh();
  const int dim = space.Dimension();
  const QuadratureRule rule = TensorGauss(dim, space.Degree() + 1);
  const BasisTable t = Tabulate(space.Basis(), rule.points);
  const int nf = block;
  shared = mesh.AllBoxes();
  auto fill = [&](double *B, const std::vector<double> &JxW)
  {
    for (int q = 0; q < t.nq; q++)
    {
      for (int i = 0; i < nf; i++)
      {
        for (int j = 0; j < nf; j++)
        {
          B[i * nf + j] += JxW[q] * t.phi[q * nf + i] * t.phi[q * nf + j];
        }
      }
    }
  };
  if (shared)
  {
    blocks.assign(static_cast<std::size_t>(nf) * nf, 0.0);
    fill(blocks.data(), rule.weights);
    scale.resize(num_entities);
    for (Index k = 0; k < num_entities; k++)
    {
      scale[k] = mesh.ElementMeasure(k);
    }
    return;
  }
  blocks.assign(static_cast<std::size_t>(num_entities) * nf * nf, 0.0);
  for (Index k = 0; k < num_entities; k++)
  {
    fill(blocks.data() + static_cast<std::size_t>(k) * nf * nf,
         ComputeCellQuadrature(mesh, k, rule).JxW);
  }
}

const double *MassOperator::Block(Index k) const
{
  return shared ? blocks.data() : blocks.data() + static_cast<std::size_t>(k) * block * block;
}

void MassOperator::Mult(std::span<const double> x, std::span<double> y) const
{
  std::fill(y.begin(), y.end(), 0.0);
  AddMult(1.0, x, y);
}

void MassOperator::AddMult(double a, std::span<const double> x, std::span<double> y) const
{
  const int nf = block;
  ParallelFor(0, num_entities,
              [&](Index k0, Index k1)
              {
                for (Index k = k0; k < k1; k++)
                {
                  const double *B = Block(k);
                  const double c = a * (shared ? scale[k] : 1.0);
                  const double *xk = x.data() + static_cast<std::size_t>(k) * nf;
                  double *yk = y.data() + static_cast<std::size_t>(k) * nf;
                  for (int i = 0; i < nf; i++)
                  {
                    double s = 0.0;
                    for (int j = 0; j < nf; j++)
                    {
                      s += B[i * nf + j] * xk[j];
                    }
                    yk[i] += c * s;
                  }
                }
              },
              256);
}

bool StimulusRegion::Contains(int dim, const Point &x) const
{
  if (shape == Shape::Box)
  {
    return box.Contains(x);
  }
  double r2 = 0.0;
  for (int d = 0; d < dim; d++)
  {
    r2 += (x[d] - center[d]) * (x[d] - center[d]);
  }
  return r2 <= radius * radius;
}

bool Stimulus::Active(double t) const
{
  return t >= t_start && t <= t_end;
}

double Stimulus::Evaluate(int dim, const Point &x, double t) const
{
  if (!Active(t))
  {
    return 0.0;
  }
  for (const auto &r : regions)
  {
    if (r.Contains(dim, x))
    {
      return amplitude;
    }
  }
  return 0.0;
}

Vector AssembleStimulusLoad(const DGSpace &space, const Stimulus &stimulus)
{
  RequireFineSpace(space);
  const Mesh &mesh = space.GetMesh();
  const int dim = space.Dimension();
  const int nf = space.DofsPerEntity();
  const QuadratureRule rule = TensorGauss(dim, space.Degree() + 1);
  const BasisTable t = Tabulate(space.Basis(), rule.points);
  Vector b(space.TotalDofs(), 0.0);
  for (Index k = 0; k < mesh.NumElements(); k++)
  {
    const BoundingBox eb = mesh.ElementBoundingBox(k);
    bool touched = false;
    for (const auto &r : stimulus.regions)
    {
      BoundingBox rb = r.box;
      if (r.shape == StimulusRegion::Shape::Sphere)
      {
        rb = BoundingBox::Empty(dim);
        for (int d = 0; d < dim; d++)
        {
          rb.lo[d] = r.center[d] - r.radius;
          rb.hi[d] = r.center[d] + r.radius;
        }
      }
      bool overlap = true;
      for (int d = 0; d < dim; d++)
      {
        overlap = overlap && eb.lo[d] <= rb.hi[d] && rb.lo[d] <= eb.hi[d];
      }
      touched = touched || overlap;
    }
    if (!touched)
    {
      continue;
    }
    const CellQuadrature cq = ComputeCellQuadrature(mesh, k, rule);
    for (int q = 0; q < t.nq; q++)
    {
      bool inside = false;
      for (const auto &r : stimulus.regions)
      {
        inside = inside || r.Contains(dim, cq.x[q]);
      }
      if (!inside)
      {
        continue;
      }
      for (int i = 0; i < nf; i++)
      {
        b[static_cast<std::size_t>(k) * nf + i] += cq.JxW[q] * t.phi[q * nf + i];
      }
    }
  }
  return b;
}

void AssembleRhs(const MassOperator &M, const ModelConstants &constants, const RhsInputs &in,
                 std::span<double> rhs)
{
  const std::size_t n = rhs.size();
  if (in.U_n.size() != n || in.U_nm1.size() != n || in.I_ion_nodal.size() != n ||
      static_cast<std::size_t>(M.Size()) != n)
  {
    throw std::invalid_argument("Right-hand side inputs have mismatched sizes");
  }
  const double c = constants.chi_m * constants.C_m / (2.0 * constants.dt);
  Vector tmp(n);
  for (std::size_t i = 0; i < n; i++)
  {
    tmp[i] = c * (4.0 * in.U_n[i] - in.U_nm1[i]) - constants.chi_m * in.I_ion_nodal[i];
  }
  M.Mult(tmp, rhs);
  if (in.stimulus_factor != 0.0 && !in.stimulus_load.empty())
  {
    Axpy(in.stimulus_factor, in.stimulus_load, rhs);
  }
}

}  // namespace polymg
