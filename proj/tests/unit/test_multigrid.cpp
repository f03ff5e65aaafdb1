// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#include <Eigen/Dense>
#include <numeric>
#include <random>
#include "catch2/catch_amalgamated.hpp"
#include "polymg/assembly.hpp"
#include "polymg/chebyshev.hpp"
#include "polymg/matrixfree.hpp"
#include "polymg/multigrid.hpp"
#include "polymg/parallel.hpp"

using namespace polymg;
using Catch::Approx;

namespace
{

Vector Random(std::size_t n, std::mt19937_64 &rng)
{
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Vector v(n);
  for (auto &x : v)
  {
    x = d(rng);
  }
  return v;
}

SparseMatrix FromDense(const Eigen::MatrixXd &A)
{
  std::vector<Offset> ptr{0};
  std::vector<Index> col;
  std::vector<double> val;
  for (Eigen::Index i = 0; i < A.rows(); i++)
  {
    for (Eigen::Index j = 0; j < A.cols(); j++)
    {
      if (A(i, j) != 0.0)
      {
        col.push_back(static_cast<Index>(j));
        val.push_back(A(i, j));
      }
    }
    ptr.push_back(static_cast<Offset>(col.size()));
  }
  return SparseMatrix(A.rows(), A.cols(), ptr, col, val);
}

Eigen::MatrixXd Dense(const SparseMatrix &A)
{
  return Eigen::MatrixXd(A.ToEigen());
}

SparseMatrix System(const DGSpace &V, double sigma = 1.0)
{
  return AssembleSystem(AssembleMass(V), AssembleStiffness(V, ConductivityField::Isotropic(sigma)),
                        {1.0, 1.0, 0.01, 1.0});
}

}  // namespace

TEST_CASE("prolongation reproduces coarse polynomials", "[multigrid]")
{
  const Mesh m = Mesh::Structured(2, {0, 0, 0}, {1, 1, 1}, {8, 8, 1});
  const AgglomerationHierarchy h(m, {2, 4}, 3);
  for (int p : {1, 2, 3})
  {
    for (int l = 1; l < h.NumLevels(); l++)
    {
      const DGSpace fine(m, h, l - 1, p), coarse(m, h, l, p);
      const SparseMatrix P = BuildProlongation(fine, coarse, h);
      REQUIRE(P.Rows() == fine.TotalDofs());
      REQUIRE(P.Cols() == coarse.TotalDofs());
      Vector y(fine.TotalDofs());
      P.Mult(Vector(coarse.TotalDofs(), 1.0), y);
      for (double v : y)
      {
        CHECK(v == Approx(1.0).epsilon(1e-13));
      }
      if (p >= 2)
      {
        auto f = [](const Point &x) { return x[0] * x[1]; };
        P.Mult(coarse.Interpolate(f), y);
        const Vector ref = fine.Interpolate(f);
        for (std::size_t i = 0; i < y.size(); i++)
        {
          CHECK(y[i] == Approx(ref[i]).margin(1e-13));
        }
      }
    }
  }
}

TEST_CASE("prolongation onto a coincident agglomerate is the identity", "[multigrid]")
{
  const Mesh m = Mesh::Structured(2, {0, 0, 0}, {1, 1, 1}, {1, 1, 1});
  const AgglomerationHierarchy h(m, {2, 4}, 2);
  REQUIRE(h.NumLevels() == 2);
  const DGSpace fine(m, h, 0, 2), coarse(m, h, 1, 2);
  const Eigen::MatrixXd P = Dense(BuildProlongation(fine, coarse, h));
  CHECK((P - Eigen::MatrixXd::Identity(9, 9)).norm() < 1e-14);
}

TEST_CASE("galerkin product", "[multigrid]")
{
  std::mt19937_64 rng(9);
  const Mesh mesh_V = Mesh::Structured(2, {0, 0, 0}, {1, 1, 1}, {3, 3, 1});
  const DGSpace V(mesh_V, 1);
  const SparseMatrix A = System(V);
  const SparseMatrix I = SparseMatrix::Identity(A.Rows());
  CHECK((Dense(GalerkinProduct(A, I)) - Dense(A)).norm() < 1e-12 * Dense(A).norm());

  // Two elements merged into one agglomerate: compare against the dense triple product.
  const Mesh m = Mesh::Structured(2, {0, 0, 0}, {2, 1, 1}, {2, 1, 1});
  const AgglomerationHierarchy h(m, {2, 4}, 2);
  REQUIRE(h.Cardinality(1) == 1);
  for (int p : {1, 2})
  {
    const DGSpace fine(m, h, 0, p), coarse(m, h, 1, p);
    const SparseMatrix A0 = System(fine);
    const SparseMatrix P = BuildProlongation(fine, coarse, h);
    const SparseMatrix A1 = GalerkinProduct(A0, P);
    const Eigen::MatrixXd ref = Dense(P).transpose() * Dense(A0) * Dense(P);
    CHECK((Dense(A1) - ref).norm() <= 1e-12 * ref.norm());
    for (int t = 0; t < 10; t++)
    {
      const Vector x = Random(A1.Rows(), rng);
      Vector Px(P.Rows()), APx(P.Rows()), A1x(A1.Rows());
      P.Mult(x, Px);
      A0.Mult(Px, APx);
      A1.Mult(x, A1x);
      CHECK(Dot(x, A1x) == Approx(Dot(Px, APx)).epsilon(1e-12));
    }
  }
}

TEST_CASE("lanczos spectrum estimates", "[chebyshev]")
{
  const Vector d{1.0, 2.0, 5.0, 7.0, 0.5};
  const SparseMatrix D = SparseMatrix::Diagonal(d);
  Vector dinv(d.size());
  for (std::size_t i = 0; i < d.size(); i++)
  {
    dinv[i] = 1.0 / d[i];
  }
  CHECK(EstimateEigMax(MatrixOperator(D), dinv) == Approx(1.2).epsilon(1e-12));

  Eigen::Matrix2d a;
  a << 2, 1, 1, 3;
  const double lmax = (5.0 + std::sqrt(5.0)) / 2.0;
  const SparseMatrix A = FromDense(a);
  const Vector ones(2, 1.0);
  const SpectrumEstimate e = EstimateSpectrum(MatrixOperator(A), ones);
  CHECK(std::abs(e.ritz_max - lmax) <= 0.01 * lmax);

  // Symmetric permutation leaves the spectrum unchanged.
  std::mt19937_64 rng(4);
  Eigen::MatrixXd B = Eigen::MatrixXd::Random(8, 8);
  B = B * B.transpose() + 8.0 * Eigen::MatrixXd::Identity(8, 8);
  std::vector<int> perm(8);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXd Bp(8, 8);
  for (int i = 0; i < 8; i++)
  {
    for (int j = 0; j < 8; j++)
    {
      Bp(i, j) = B(perm[i], perm[j]);
    }
  }
  Vector di(8), dip(8);
  for (int i = 0; i < 8; i++)
  {
    di[i] = 1.0 / B(i, i);
    dip[i] = 1.0 / Bp(i, i);
  }
  const double e1 = EstimateSpectrum(MatrixOperator(FromDense(B)), di).ritz_max;
  const double e2 = EstimateSpectrum(MatrixOperator(FromDense(Bp)), dip).ritz_max;
  CHECK(e1 == Approx(e2).epsilon(1e-10));
}

TEST_CASE("chebyshev smoother", "[chebyshev]")
{
  std::mt19937_64 rng(6);
  const SparseMatrix I = SparseMatrix::Identity(20);
  const ChebyshevSmoother si(MatrixOperator(I), Vector(20, 1.0));
  const Vector b = Random(20, rng);
  Vector x(20, 0.0);
  si.Apply(b, x, true);
  Vector r(20);
  for (int i = 0; i < 20; i++)
  {
    r[i] = b[i] - x[i];
  }
  CHECK(Norm2(r) <= 1e-12 * Norm2(b));

  Vector z(20, 0.0);
  si.Apply(Vector(20, 0.0), z, true);
  CHECK(Norm2(z) == 0.0);

  // Error in the energy norm never grows under repeated application.
  Eigen::MatrixXd A = Eigen::MatrixXd::Random(8, 8);
  A = A * A.transpose() + 0.5 * Eigen::MatrixXd::Identity(8, 8);
  const SparseMatrix As = FromDense(A);
  const ChebyshevSmoother s(MatrixOperator(As), As.DiagonalEntries());
  const Eigen::VectorXd xs = Eigen::VectorXd::Random(8);
  const Eigen::VectorXd bs = A * xs;
  Vector bb(bs.data(), bs.data() + 8), xx(8, 0.0);
  double prev = xs.dot(A * xs);
  for (int k = 0; k < 10; k++)
  {
    s.Apply(bb, xx);
    const Eigen::VectorXd e = Eigen::Map<Eigen::VectorXd>(xx.data(), 8) - xs;
    const double energy = e.dot(A * e);
    CHECK(energy <= prev * (1.0 + 1e-12));
    prev = energy;
  }
  CHECK(s.EigMax() > s.EigMin());
  CHECK(s.Degree() == 3);
}

TEST_CASE("one-level cycle is the coarse direct solve", "[multigrid]")
{
  const Mesh m = Mesh::Structured(2, {0, 0, 0}, {1, 1, 1}, {4, 4, 1});
  const AgglomerationHierarchy h(m, {2, 4}, 1);
  const DGSpace V(m, 1);
  const SparseMatrix A = System(V);
  const MultigridPreconditioner mg(m, h, 1, A);
  CHECK(mg.NumLevels() == 1);
  CHECK(mg.OperatorComplexity() == Approx(1.0));
  std::mt19937_64 rng(8);
  const Vector b = Random(A.Rows(), rng);
  Vector x(b.size(), 0.0);
  const SolveReport r = Pcg(MatrixOperator(A), mg.AsOperator(), b, x, {0.0, 1e-12, 10});
  CHECK(r.converged);
  CHECK(r.iterations == 1);
}

TEST_CASE("v-cycle is linear and symmetric", "[multigrid]")
{
  const Mesh m = Mesh::Structured(2, {0, 0, 0}, {1, 1, 1}, {4, 4, 1});
  const AgglomerationHierarchy h(m, {2, 4}, 3);
  std::mt19937_64 rng(10);
  for (CoarseSolverKind kind : {CoarseSolverKind::Direct, CoarseSolverKind::Pcg})
  {
    MultigridOptions o;
    o.coarse_solver = kind;
    const DGSpace V(m, 2);
    const SparseMatrix A = System(V, 0.3);
    const MultigridPreconditioner mg(m, h, 2, A, o);
    CHECK(mg.NumLevels() == 3);
    CHECK(mg.OperatorComplexity() > 1.0);
    const Index n = A.Rows();
    const Vector b1 = Random(n, rng), b2 = Random(n, rng);
    Vector x1(n), x2(n), xc(n), comb(n);
    mg.Apply(b1, x1);
    mg.Apply(b2, x2);
    for (Index i = 0; i < n; i++)
    {
      comb[i] = 1.5 * b1[i] - 0.25 * b2[i];
    }
    mg.Apply(comb, xc);
    const double tol = kind == CoarseSolverKind::Direct ? 1e-12 : 1e-9;
    for (Index i = 0; i < n; i++)
    {
      CHECK(xc[i] == Approx(1.5 * x1[i] - 0.25 * x2[i]).margin(tol * Norm2(x1)));
    }
    CHECK(Dot(x1, b2) == Approx(Dot(b1, x2)).epsilon(kind == CoarseSolverKind::Direct ? 1e-11 : 1e-8));
  }
}

TEST_CASE("agglomerated multigrid preconditioned CG", "[multigrid]")
{
  const Mesh m = Mesh::Structured(2, {0, 0, 0}, {1, 1, 1}, {16, 16, 1});
  const AgglomerationHierarchy h(m, {2, 4}, 3);
  const DGSpace V(m, 2);
  // Diffusion-dominated shift, where block-Jacobi cannot compete with the hierarchy.
  const ModelConstants c{1.0, 1.0, 1e-2, 1.0};
  const ConductivityField D = ConductivityField::Isotropic(1.0);
  const SparseMatrix A = AssembleSystem(AssembleMass(V), AssembleStiffness(V, D), c);
  const MatrixFreeOperator mf(V, D, c);
  auto mf_apply = [&mf](std::span<const double> x, std::span<double> y) { mf.Mult(x, y); };
  MultigridPreconditioner mg(m, h, 2, A, {}, mf_apply);
  CHECK(mg.CoarseSolverName() == "sparse-cholesky");
  std::mt19937_64 rng(12);
  const Vector b = Random(A.Rows(), rng);
  Vector x(b.size(), 0.0), x_ref(b.size(), 0.0);
  const SolveReport r = Pcg(MatrixOperator(A), mg.AsOperator(), b, x, {0.0, 1e-10, 100});
  CHECK(r.converged);
  CHECK(r.iterations <= 15);
  const SolveReport rj = Pcg(MatrixOperator(A), BlockJacobi(A, 9).AsOperator(), b, x_ref,
                             {0.0, 1e-10, 1000});
  CHECK(rj.iterations > 2 * r.iterations);

  // The cycle keeps working on the matrix-free fine operator once A_0 is dropped.
  const Offset before = mg.LevelNnz(0);
  CHECK(mg.ReleaseFineMatrix() > 0);
  CHECK(mg.FineMatrixReleased());
  CHECK(mg.LevelNnz(0) == before);
  Vector y(b.size(), 0.0);
  const SolveReport r2 = Pcg(mf_apply, mg.AsOperator(), b, y, {0.0, 1e-10, 100});
  CHECK(r2.iterations == r.iterations);
}
