// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#include <Eigen/Dense>
#include <cmath>
#include "catch2/catch_amalgamated.hpp"
#include "polymg/parallel.hpp"
#include "polymg/timeloop.hpp"

using namespace polymg;
using Catch::Approx;

namespace
{

SimulationConfig SmallFhn(int n = 8, int p = 1)
{
  SimulationConfig c = SimulationConfig::Fhn2D(n, p);
  c.levels = 2;
  return c;
}

}  // namespace

TEST_CASE("preset configurations", "[timeloop]")
{
  const SimulationConfig f = SimulationConfig::Fhn2D();
  CHECK(f.NumSteps() == 4000);
  CHECK(f.mesh.subdivisions[0] == 128);
  CHECK(f.constants.chi_m == 1e5);
  CHECK(f.stimulus.amplitude == 2e6);
  f.Validate();
  const SimulationConfig b = SimulationConfig::BoBox3D();
  CHECK(b.model == "bo");
  CHECK(b.mesh.dim == 3);
  b.Validate();

  SimulationConfig bad = f;
  bad.degree = 0;
  CHECK_THROWS(bad.Validate());
  bad = f;
  bad.ionic_parameters["tau_fi"] = -1.0;
  CHECK_THROWS(bad.Validate());
}

TEST_CASE("initial state is the rest state", "[timeloop]")
{
  const Simulation f(SmallFhn());
  for (Index i = 0; i < f.Space().TotalDofs(); i++)
  {
    CHECK(f.U()[i] == 0.0);
    CHECK(f.W(0)[i] == 0.0);
  }
  SimulationConfig bc = SimulationConfig::BoBox3D(2, 1);
  bc.levels = 1;
  const Simulation b(bc);
  for (Index i = 0; i < b.Space().TotalDofs(); i++)
  {
    CHECK(b.U()[i] == 0.0);
    CHECK(b.W(0)[i] == 1.0);
    CHECK(b.W(1)[i] == 1.0);
    CHECK(b.W(2)[i] == 0.0);
  }
}

TEST_CASE("unstimulated FitzHugh-Nagumo rest is a fixed point", "[timeloop]")
{
  SimulationConfig c = SmallFhn();
  c.stimulus.amplitude = 0.0;
  c.num_steps = 5;
  Simulation sim(c);
  for (const auto &r : sim.Run())
  {
    CHECK(r.iterations == 0);
  }
  for (double u : sim.U())
  {
    CHECK(u == 0.0);
  }
}

TEST_CASE("matrix-free mode releases the assembled fine matrix", "[timeloop]")
{
  SimulationConfig c = SmallFhn();
  c.op = OperatorKind::MatrixFree;
  c.num_steps = 3;
  Simulation mf(c);
  CHECK(mf.ReleasedFineMatrixBytes() > 0);
  CHECK(mf.Multigrid()->FineMatrixReleased());
  c.op = OperatorKind::MatrixBased;
  Simulation mb(c);
  CHECK(mb.ReleasedFineMatrixBytes() == 0);
  mf.Run();
  mb.Run();
  for (Index i = 0; i < mf.Space().TotalDofs(); i++)
  {
    CHECK(mf.U()[i] == Approx(mb.U()[i]).margin(1e-12));
  }
}

TEST_CASE("first step is backward Euler", "[timeloop]")
{
  SimulationConfig c = SmallFhn(4, 1);
  c.constants = {1.0, 1.0, 1e-2, 1.0};
  c.diffusion_only = true;
  c.solver.abs_tol = 0.0;
  c.solver.rel_tol = 1e-14;
  Simulation sim(c);
  const Vector U0 = sim.Space().Interpolate([](const Point &x) { return std::sin(3 * x[0]) + x[1]; });
  sim.SetInitialPotential(U0);
  sim.Step();

  const SparseMatrix M = AssembleMass(sim.Space());
  const SparseMatrix A = AssembleStiffness(sim.Space(), ConductivityField::Isotropic(c.conductivity.sigma));
  const Eigen::MatrixXd Md = Eigen::MatrixXd(M.ToEigen()), Ad = Eigen::MatrixXd(A.ToEigen());
  const Eigen::Map<const Eigen::VectorXd> u0(U0.data(), U0.size());
  const Eigen::VectorXd u1 = (Md / c.constants.dt + Ad).ldlt().solve(Md * u0 / c.constants.dt);
  for (Index i = 0; i < sim.Space().TotalDofs(); i++)
  {
    CHECK(sim.U()[i] == Approx(u1[i]).margin(1e-12));
  }
  CHECK(sim.Time() == Approx(1e-2));
}

TEST_CASE("diffusion-only runs conserve the total potential", "[timeloop]")
{
  SimulationConfig c = SmallFhn(8, 2);
  c.constants = {1.0, 1.0, 1e-3, 1.0};
  c.conductivity.sigma = 0.01;
  c.diffusion_only = true;
  c.num_steps = 100;
  Simulation sim(c);
  sim.SetInitialPotential(sim.Space().Interpolate([](const Point &x) { return 1.0 + x[0] * x[1]; }));
  const double m0 = sim.TotalMass();
  sim.Run();
  CHECK(std::abs(sim.TotalMass() - m0) <= 1e-10 * std::abs(m0));
}

TEST_CASE("stimulated FitzHugh-Nagumo front stays bounded", "[timeloop]")
{
  SimulationConfig c = SmallFhn(32, 1);
  c.num_steps = 60;
  c.probes = {{0.5, 0.5, 0.0}, {0.9, 0.9, 0.0}};
  Simulation sim(c);
  // While the stimulus is on, the applied current balances the cubic near u = 1.45; the
  // tighter audit applies once it has been off for a few steps.
  double lo = 0.0, hi = 0.0, lo_after = 0.0, hi_after = 0.0;
  const auto records = sim.Run(
      [&](const Simulation &s, const StepRecord &r)
      {
        for (double u : s.U())
        {
          lo = std::min(lo, u);
          hi = std::max(hi, u);
          if (r.time > c.stimulus.t_end + 1e-3)
          {
            lo_after = std::min(lo_after, u);
            hi_after = std::max(hi_after, u);
          }
        }
      });
  CHECK(lo >= -0.3);
  CHECK(hi <= 1.5);
  CHECK(lo_after >= -0.3);
  CHECK(hi_after <= 1.3);
  CHECK(hi_after > 0.5);
  const auto probes = sim.ProbeValues();
  REQUIRE(probes.size() == 2);
  CHECK(probes[0] > probes[1]);

  REQUIRE(records.size() == 60);
  CHECK(records.back().time == Approx(60 * c.constants.dt));
  const SummaryStats s = Summarize(records);
  int mn = 1 << 30, mx = 0;
  for (const auto &r : records)
  {
    mn = std::min(mn, r.iterations);
    mx = std::max(mx, r.iterations);
  }
  CHECK(s.min == mn);
  CHECK(s.max == mx);
  CHECK(s.count == 60);
}

TEST_CASE("summary statistics", "[timeloop]")
{
  std::vector<StepRecord> r(4);
  const int its[] = {3, 5, 7, 5};
  for (int i = 0; i < 4; i++)
  {
    r[i].iterations = its[i];
  }
  const SummaryStats s = Summarize(r);
  CHECK(s.mean == Approx(5.0));
  CHECK(s.stddev == Approx(std::sqrt(2.0)));
  CHECK(s.min == 3);
  CHECK(s.max == 7);
}

TEST_CASE("non-convergence raises a solver failure naming the step", "[timeloop]")
{
  SimulationConfig c = SmallFhn();
  c.precond = PreconditionerKind::None;
  c.solver.max_iter = 1;
  c.num_steps = 2;
  Simulation sim(c);
  try
  {
    sim.Run();
    FAIL("expected a solver failure");
  }
  catch (const SolverFailure &e)
  {
    CHECK(e.Step() == 0);
  }
}
