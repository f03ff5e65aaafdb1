// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#include <random>
#include "catch2/catch_amalgamated.hpp"
#include "polymg/matrixfree.hpp"
#include "polymg/parallel.hpp"
#include "polymg/timeloop.hpp"

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

double RelDiff(const Vector &a, const Vector &b)
{
  Vector d(a.size());
  for (std::size_t i = 0; i < a.size(); i++)
  {
    d[i] = a[i] - b[i];
  }
  return Norm2(d) / Norm2(b);
}

void CheckEquivalence(const Mesh &m, int p, const ConductivityField &D, std::mt19937_64 &rng)
{
  const DGSpace V(m, p);
  const ModelConstants c{1e5, 1e-2, 1e-4, 0.4};
  const SparseMatrix A0 = AssembleSystem(AssembleMass(V), AssembleStiffness(V, D), c);
  const MatrixFreeOperator mf(V, D, c);
  for (int t = 0; t < 10; t++)
  {
    const Vector v = Random(V.TotalDofs(), rng);
    Vector ya(v.size()), ym(v.size());
    A0.Mult(v, ya);
    mf.Mult(v, ym);
    CHECK(RelDiff(ym, ya) <= 1e-12);
  }
}

}  // namespace

TEST_CASE("matrix-free operator matches the assembled operator", "[matrixfree]")
{
  std::mt19937_64 rng(1);
  const Mesh m2 = Mesh::Structured(2, {0, 0, 0}, {1, 1, 1}, {4, 4, 1});
  const Mesh m3 = Mesh::Structured(3, {0, 0, 0}, {1, 1, 1}, {3, 3, 3});
  ConductivitySpec helix;
  helix.kind = ConductivitySpec::Kind::Orthotropic;
  helix.fiber = "helix";
  for (int p = 1; p <= 3; p++)
  {
    CheckEquivalence(m2, p, ConductivityField::Isotropic(0.12), rng);
    CheckEquivalence(m3, p, ConductivityField::Isotropic(0.12), rng);
    CheckEquivalence(m3, p, BuildConductivity(helix, m3.DomainBoundingBox()), rng);
  }
}

TEST_CASE("matrix-free generic path on distorted cells", "[matrixfree]")
{
  // Two parallelograms sharing a slanted edge: not axis aligned, so every element and face
  // goes through the generic path.
  const std::vector<Point> v{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {0.3, 1, 0}, {1.3, 1, 0}, {2.3, 1, 0}};
  const Mesh m(2, v, {0, 1, 3, 4, 1, 2, 4, 5});
  REQUIRE_FALSE(m.AllBoxes());
  std::mt19937_64 rng(2);
  for (int p = 1; p <= 3; p++)
  {
    CheckEquivalence(m, p, ConductivityField::Isotropic(0.7), rng);
  }
}

TEST_CASE("matrix-free linearity, symmetry and constants", "[matrixfree]")
{
  const Mesh m = Mesh::Structured(2, {0, 0, 0}, {1, 1, 1}, {4, 4, 1});
  const DGSpace V(m, 2);
  const ModelConstants c{1.0, 1.0, 0.01, 1.0};
  const MatrixFreeOperator mf(V, ConductivityField::Isotropic(0.5), c);
  const Index n = V.TotalDofs();
  std::mt19937_64 rng(5);
  const Vector u = Random(n, rng), w = Random(n, rng);

  Vector y(n);
  mf.Mult(Vector(n, 0.0), y);
  CHECK(Norm2(y) == 0.0);

  Vector mu(n), mw(n), mc(n), comb(n);
  mf.Mult(u, mu);
  mf.Mult(w, mw);
  for (Index i = 0; i < n; i++)
  {
    comb[i] = 2.0 * u[i] - 3.0 * w[i];
  }
  mf.Mult(comb, mc);
  for (Index i = 0; i < n; i++)
  {
    CHECK(mc[i] == Approx(2.0 * mu[i] - 3.0 * mw[i]).margin(1e-11));
  }
  CHECK(Dot(mu, w) == Approx(Dot(u, mw)).epsilon(1e-12));

  const Vector one(n, 1.0);
  Vector M1(n);
  MassOperator(V).Mult(one, M1);
  mf.Mult(one, y);
  for (Index i = 0; i < n; i++)
  {
    CHECK(y[i] == Approx(c.Shift() * M1[i]).epsilon(1e-11));
  }
  CHECK_THROWS(mf.Mult(Vector(n + 1, 0.0), y));
}

TEST_CASE("operation count estimate", "[matrixfree]")
{
  const auto a = OperationCountEstimate(3, 3);
  CHECK(a.naive == 4096);
  CHECK(a.factorized == 768);
  const auto b = OperationCountEstimate(1, 2);
  CHECK(b.naive == 16);
  CHECK(b.factorized == 16);
  for (int p = 1; p <= 5; p++)
  {
    const auto e = OperationCountEstimate(p, 3);
    CHECK(double(e.naive) / e.factorized == Approx(std::pow(p + 1, 2) / 3.0));
  }
}
