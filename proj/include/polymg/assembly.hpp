// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POLYMG_ASSEMBLY_HPP
#define POLYMG_ASSEMBLY_HPP

#include <functional>
#include <span>
#include <vector>
#include "polymg/dg_space.hpp"
#include "polymg/sparse_matrix.hpp"

namespace polymg
{

// Orthonormal local frame (fiber, sheet, normal) at a point.
using FiberFrame = std::array<Point, 3>;

//
// Conductivity tensor D(x): either Sigma * I or sum_q sigma_q v_q (x) v_q over an
// orthonormal fiber frame (in 2D only the first two directions contribute).
//
class ConductivityField
{
public:
  static ConductivityField Isotropic(double sigma);
  static ConductivityField Orthotropic(double sigma_l, double sigma_t, double sigma_n,
                                       std::function<FiberFrame(const Point &)> frame,
                                       bool constant_frame = false);

  // Throws if the frame at x is not orthonormal to 1e-12.
  Tensor Evaluate(int dim, const Point &x) const;

  // True if D does not depend on x.
  bool IsConstant() const { return isotropic || constant_frame; }
  bool IsIsotropic() const { return isotropic; }
  double IsotropicValue() const { return sigma_iso; }

private:
  bool isotropic = true;
  bool constant_frame = true;
  double sigma_iso = 0.0;
  std::array<double, 3> sigma{0.0, 0.0, 0.0};
  std::function<FiberFrame(const Point &)> frame;
};

// Physical constants and time discretization.
struct ModelConstants
{
  double chi_m = 1.0;
  double C_m = 1.0;
  double dt = 1e-4;
  double T_final = 0.4;

  // Mass shift 3 chi_m C_m / (2 dt) of the BDF2 system matrix.
  double Shift() const { return 3.0 * chi_m * C_m / (2.0 * dt); }

  void Validate() const;
};

// p (p + 1) |F| max(1/|K+|, 1/|K-|)
double PenaltyAlpha(int degree, double face_measure, double measure_plus, double measure_minus);

// Entity adjacency of the DG pattern on the fine mesh: each element couples to itself and
// its face neighbors (sorted).
std::vector<std::vector<Index>> ElementAdjacency(const Mesh &mesh);

// SIPG stiffness a_h (interior faces only; boundary faces carry no terms).
SparseMatrix AssembleStiffness(const DGSpace &space, const ConductivityField &D);

// Local face matrices of the SIPG face terms, blocks (plus,plus), (plus,minus),
// (minus,plus), (minus,minus), each nf x nf row-major (rows: test functions).
void FaceMatrices(const DGSpace &space, const ConductivityField &D, const InteriorFace &face,
                  std::vector<double> &blocks);

// Block-diagonal mass matrix m_h.
SparseMatrix AssembleMass(const DGSpace &space);

// A_0 = shift M + A on the union pattern.
SparseMatrix AssembleSystem(const SparseMatrix &M, const SparseMatrix &A,
                            const ModelConstants &constants);

// Penalty sigma_F = alpha_F * (face mean of n^T D n) for interior face f.
double FacePenalty(const DGSpace &space, const ConductivityField &D, Index f);

//
// Block-diagonal mass operator applied entity by entity. Box meshes share one scaled
// reference block.
//
class MassOperator
{
public:
  explicit MassOperator(const DGSpace &space);

  // y = M x, y += a M x.
  void Mult(std::span<const double> x, std::span<double> y) const;
  void AddMult(double a, std::span<const double> x, std::span<double> y) const;

  Index Size() const { return num_entities * block; }

private:
  const double *Block(Index k) const;

  Index num_entities;
  int block;
  bool shared;
  std::vector<double> scale;
  std::vector<double> blocks;
};

//
// Spatial region where the applied current is active.
//
struct StimulusRegion
{
  enum class Shape
  {
    Box,
    Sphere
  };
  Shape shape = Shape::Box;
  BoundingBox box;
  Point center{0.0, 0.0, 0.0};
  double radius = 0.0;

  bool Contains(int dim, const Point &x) const;
};

// I_app(x, t) = amplitude * 1[x in any region] * 1[t_start <= t <= t_end].
struct Stimulus
{
  double amplitude = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<StimulusRegion> regions;

  bool Active(double t) const;
  double Evaluate(int dim, const Point &x, double t) const;
};

// Load vector b_i = int 1[x in regions] phi_i, integrated with (p+1)^d Gauss points and
// pointwise evaluation of the indicator.
Vector AssembleStimulusLoad(const DGSpace &space, const Stimulus &stimulus);

// Inputs of the BDF2 right-hand side.
struct RhsInputs
{
  std::span<const double> U_n;
  std::span<const double> U_nm1;
  // Nodal ionic current at the DoFs (ICI).
  std::span<const double> I_ion_nodal;
  // Precomputed stimulus load and its time factor.
  std::span<const double> stimulus_load;
  double stimulus_factor = 0.0;
};

// rhs = I_app + M (chi C / (2 dt) (4 U_n - U_{n-1}) - chi I_ion).
void AssembleRhs(const MassOperator &M, const ModelConstants &constants, const RhsInputs &in,
                 std::span<double> rhs);

}  // namespace polymg

#endif  // POLYMG_ASSEMBLY_HPP
