// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#include "polymg/verification.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include "polymg/assembly.hpp"
#include "polymg/ionic.hpp"
#include "polymg/matrixfree.hpp"
#include "polymg/multigrid.hpp"
#include "polymg/parallel.hpp"

namespace polymg
{

namespace
{

Vector RandomVector(std::size_t n, std::mt19937_64 &rng)
{
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector v(n);
  for (auto &x : v)
  {
    x = dist(rng);
  }
  return v;
}

Mesh SmallMesh(int dim, int n)
{
  return Mesh::Structured(dim, {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, {n, n, dim == 3 ? n : 1});
}

}  // namespace

std::vector<CheckResult> RunVerification(unsigned long long seed)
{
  std::vector<CheckResult> results;
  std::mt19937_64 rng(seed);
  auto check = [&](const std::string &name, const std::function<std::string()> &body)
  {
    CheckResult r{name, false, ""};
    try
    {
      r.detail = body();
      r.passed = r.detail.empty();
    }
    catch (const std::exception &e)
    {
      r.detail = std::string("exception: ") + e.what();
    }
    results.push_back(r);
  };

  check("mesh volume and face counts",
        []() -> std::string
        {
          for (int dim : {2, 3})
          {
            const Mesh m = SmallMesh(dim, 4);
            double vol = 0.0;
            for (Index k = 0; k < m.NumElements(); k++)
            {
              vol += m.ElementMeasure(k);
            }
            if (std::abs(vol - 1.0) > 1e-13)
            {
              return "element volumes do not sum to the domain volume";
            }
            if (2 * m.NumInteriorFaces() + m.NumBoundaryFaces() != 2 * dim * m.NumElements())
            {
              return "face records do not account for 2d faces per element";
            }
          }
          return "";
        });

  check("r-tree structure",
        []() -> std::string
        {
          const Mesh m = SmallMesh(2, 8);
          std::vector<BoundingBox> boxes;
          for (Index k = 0; k < m.NumElements(); k++)
          {
            boxes.push_back(m.ElementBoundingBox(k));
          }
          for (auto c : {RTree::Construction::Packed, RTree::Construction::RStarInsertion})
          {
            const RTree t(boxes, {2, 4}, c);
            if (auto err = t.Validate(); !err.empty())
            {
              return err;
            }
          }
          return "";
        });

  check("agglomeration hierarchy",
        []() -> std::string
        {
          for (int dim : {2, 3})
          {
            const Mesh m = SmallMesh(dim, 8);
            const AgglomerationHierarchy h(m, DefaultRTreeOrder(dim), 3);
            if (auto err = h.Validate(m); !err.empty())
            {
              return err;
            }
            const double target = dim == 2 ? 4.0 : 8.0;
            for (double r : h.CoarseningRatios())
            {
              if (std::abs(r - target) > 0.5)
              {
                return "coarsening ratio off target";
              }
            }
          }
          return "";
        });

  check("assembled operators",
        []() -> std::string
        {
          const Mesh m = SmallMesh(2, 4);
          const DGSpace V(m, 2);
          const auto D = ConductivityField::Isotropic(0.5);
          const SparseMatrix A = AssembleStiffness(V, D);
          const SparseMatrix M = AssembleMass(V);
          if (A.AsymmetryMax() > 1e-12 * A.MaxAbs() || M.AsymmetryMax() > 1e-12 * M.MaxAbs())
          {
            return "operator not symmetric";
          }
          const Vector one(A.Rows(), 1.0);
          Vector y(A.Rows());
          A.Mult(one, y);
          double inf = 0.0;
          for (double v : y)
          {
            inf = std::max(inf, std::abs(v));
          }
          if (inf > 1e-10 * A.MaxAbs())
          {
            return "constants are not in the stiffness kernel";
          }
          M.Mult(one, y);
          if (std::abs(Sum(y) - 1.0) > 1e-12)
          {
            return "mass does not integrate the volume";
          }
          return "";
        });

  check("matrix-free equivalence",
        [&]() -> std::string
        {
          for (int dim : {2, 3})
          {
            const Mesh m = SmallMesh(dim, dim == 2 ? 4 : 3);
            for (int p = 1; p <= 3; p++)
            {
              const DGSpace V(m, p);
              const auto D = ConductivityField::Isotropic(0.3);
              const ModelConstants c{2.0, 1.5, 0.01, 1.0};
              const SparseMatrix A0 =
                  AssembleSystem(AssembleMass(V), AssembleStiffness(V, D), c);
              const MatrixFreeOperator mf(V, D, c);
              const Vector v = RandomVector(A0.Rows(), rng);
              Vector ya(v.size()), ym(v.size());
              A0.Mult(v, ya);
              mf.Mult(v, ym);
              for (std::size_t i = 0; i < v.size(); i++)
              {
                ym[i] -= ya[i];
              }
              if (Norm2(ym) > 1e-12 * Norm2(ya))
              {
                return "mismatch at dim " + std::to_string(dim) + " p " + std::to_string(p);
              }
            }
          }
          return "";
        });

  check("galerkin chain and v-cycle",
        [&]() -> std::string
        {
          const Mesh m = SmallMesh(2, 8);
          const AgglomerationHierarchy h(m, DefaultRTreeOrder(2), 3);
          const DGSpace V(m, 1);
          const auto D = ConductivityField::Isotropic(1.0);
          const ModelConstants c{1.0, 1.0, 0.01, 1.0};
          const SparseMatrix A0 = AssembleSystem(AssembleMass(V), AssembleStiffness(V, D), c);
          const MultigridPreconditioner mg(m, h, 1, A0);
          for (int l = 0; l < mg.NumLevels(); l++)
          {
            const SparseMatrix &A = mg.LevelMatrix(l);
            if (A.AsymmetryMax() > 1e-12 * A.MaxAbs())
            {
              return "level " + std::to_string(l) + " not symmetric";
            }
          }
          const Vector b1 = RandomVector(A0.Rows(), rng), b2 = RandomVector(A0.Rows(), rng);
          Vector x1(b1.size()), x2(b2.size());
          mg.Apply(b1, x1);
          mg.Apply(b2, x2);
          const double lhs = Dot(x1, b2), rhs = Dot(b1, x2);
          if (std::abs(lhs - rhs) > 1e-11 * std::abs(lhs))
          {
            return "v-cycle is not symmetric";
          }
          if (mg.OperatorComplexity() <= 1.0)
          {
            return "operator complexity not above one";
          }
          return "";
        });

  check("pcg sanity",
        [&]() -> std::string
        {
          const SparseMatrix I = SparseMatrix::Identity(10);
          const Vector b = RandomVector(10, rng);
          Vector x(10, 0.0);
          const auto rep = Pcg(MatrixOperator(I), IdentityOperator(), b, x, {});
          if (!rep.converged || rep.iterations != 1)
          {
            return "identity system did not converge in one iteration";
          }
          return "";
        });

  check("ionic fixed points",
        []() -> std::string
        {
          const FhnParameters f;
          if (FhnIion(0.0, 0.0, f) != 0.0 || FhnGatingRhs(0.0, 0.0, f) != 0.0)
          {
            return "FitzHugh-Nagumo origin is not stationary";
          }
          if (ToMillivolts(0.0) != -84.0)
          {
            return "millivolt conversion";
          }
          IonicModel bo(IonicModel::Kind::BuenoOrovio);
          bo.Validate();
          return "";
        });

  return results;
}

}  // namespace polymg
