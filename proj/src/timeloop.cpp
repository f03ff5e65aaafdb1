// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#include "polymg/timeloop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include "polymg/parallel.hpp"

namespace polymg
{

namespace
{

double Seconds(std::chrono::steady_clock::time_point since)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

ConductivityField BuildConductivity(const ConductivitySpec &spec, const BoundingBox &domain)
{
  if (spec.kind == ConductivitySpec::Kind::Isotropic)
  {
    return ConductivityField::Isotropic(spec.sigma);
  }
  if (spec.fiber == "axis")
  {
    const FiberFrame frame{Point{1.0, 0.0, 0.0}, Point{0.0, 1.0, 0.0}, Point{0.0, 0.0, 1.0}};
    return ConductivityField::Orthotropic(
        spec.sigma_l, spec.sigma_t, spec.sigma_n, [frame](const Point &) { return frame; },
        true);
  }
  if (spec.fiber == "helix")
  {
    const double deg = std::numbers::pi / 180.0;
    const double a0 = spec.helix_min_deg * deg, a1 = spec.helix_max_deg * deg;
    const double z0 = domain.lo[2], dz = domain.hi[2] - domain.lo[2];
    auto frame = [a0, a1, z0, dz](const Point &x)
    {
      const double s = dz > 0.0 ? std::clamp((x[2] - z0) / dz, 0.0, 1.0) : 0.0;
      const double theta = a0 + (a1 - a0) * s;
      const double c = std::cos(theta), si = std::sin(theta);
      return FiberFrame{Point{c, si, 0.0}, Point{-si, c, 0.0}, Point{0.0, 0.0, 1.0}};
    };
    return ConductivityField::Orthotropic(spec.sigma_l, spec.sigma_t, spec.sigma_n, frame,
                                          dz <= 0.0);
  }
  throw std::invalid_argument("Unknown fiber field \"" + spec.fiber + "\"");
}

OperatorKind ParseOperatorKind(const std::string &s)
{
  if (s == "matrix-free")
  {
    return OperatorKind::MatrixFree;
  }
  if (s == "matrix-based")
  {
    return OperatorKind::MatrixBased;
  }
  throw std::invalid_argument("Unknown operator kind \"" + s + "\"");
}

PreconditionerKind ParsePreconditionerKind(const std::string &s)
{
  if (s == "agglomg")
  {
    return PreconditionerKind::AgglomeratedMG;
  }
  if (s == "bjacobi")
  {
    return PreconditionerKind::BlockJacobi;
  }
  if (s == "none")
  {
    return PreconditionerKind::None;
  }
  throw std::invalid_argument("Unknown preconditioner \"" + s + "\"");
}

std::string ToString(OperatorKind k)
{
  return k == OperatorKind::MatrixFree ? "matrix-free" : "matrix-based";
}

std::string ToString(PreconditionerKind k)
{
  switch (k)
  {
    case PreconditionerKind::AgglomeratedMG:
      return "agglomg";
    case PreconditionerKind::BlockJacobi:
      return "bjacobi";
    default:
      return "none";
  }
}

long SimulationConfig::NumSteps() const
{
  return num_steps >= 0 ? num_steps : std::lround(constants.T_final / constants.dt);
}

void SimulationConfig::Validate() const
{
  auto require = [](bool ok, const std::string &what)
  {
    if (!ok)
    {
      throw std::invalid_argument("Invalid configuration: " + what);
    }
  };
  constants.Validate();
  require(mesh.dim == 2 || mesh.dim == 3, "mesh.dim must be 2 or 3");
  if (mesh.file.empty())
  {
    for (int d = 0; d < mesh.dim; d++)
    {
      require(mesh.subdivisions[d] >= 1, "mesh subdivisions must be positive");
      require(mesh.hi[d] > mesh.lo[d], "mesh.hi must exceed mesh.lo");
    }
  }
  require(degree >= 1 && degree <= 7, "degree must lie in [1, 7]");
  require(levels >= 1, "mg.levels must be at least 1");
  require(mg.smoother_degree >= 1, "mg.smoother_degree must be at least 1");
  require(mg.smoother_sweeps >= 0, "mg.smoother_sweeps must be nonnegative");
  require(mg.cheby_range_divisor >= 1.0, "mg.cheby_range_divisor must be at least 1");
  require(solver.max_iter >= 1, "solver.max_iter must be positive");
  require(solver.abs_tol >= 0.0 && solver.rel_tol >= 0.0, "tolerances must be nonnegative");
  require(stimulus.t_end >= stimulus.t_start, "stimulus end precedes its start");
  require(stimulus.t_end - stimulus.t_start <= constants.T_final,
          "stimulus duration exceeds T_final");
  require(snapshot_every >= 0, "output.snapshot_every must be nonnegative");
  require(order.min_entries == 0 ||
              (order.min_entries >= 1 && order.max_entries >= 2 &&
               order.min_entries <= (order.max_entries + 1) / 2),
          "invalid R-tree order");
  IonicModel m = IonicModel::FromName(model);
  for (const auto &[key, value] : ionic_parameters)
  {
    m.SetParameter(key, value);
  }
  m.Validate();
}

SimulationConfig SimulationConfig::Fhn2D(Index n, int degree)
{
  SimulationConfig c;
  c.mesh.dim = 2;
  c.mesh.lo = {0.0, 0.0, 0.0};
  c.mesh.hi = {1.0, 1.0, 0.0};
  c.mesh.subdivisions = {static_cast<int>(n), static_cast<int>(n), 1};
  c.degree = degree;
  c.constants = {1e5, 1e-2, 1e-4, 0.4};
  c.model = "fhn";
  c.conductivity.kind = ConductivitySpec::Kind::Isotropic;
  c.conductivity.sigma = 0.12;
  c.stimulus.amplitude = 2e6;
  c.stimulus.t_start = 0.0;
  c.stimulus.t_end = 1e-3;
  StimulusRegion r;
  r.shape = StimulusRegion::Shape::Box;
  r.box = BoundingBox::Empty(2);
  r.box.lo = {0.4, 0.4, 0.0};
  r.box.hi = {0.6, 0.6, 0.0};
  c.stimulus.regions = {r};
  c.probes = {Point{0.5, 0.5, 0.0}, Point{0.9, 0.9, 0.0}};
  return c;
}

SimulationConfig SimulationConfig::BoBox3D(Index n, int degree)
{
  SimulationConfig c;
  const double L = 0.016;
  c.mesh.dim = 3;
  c.mesh.lo = {0.0, 0.0, 0.0};
  c.mesh.hi = {L, L, L};
  c.mesh.subdivisions = {static_cast<int>(n), static_cast<int>(n), static_cast<int>(n)};
  c.degree = degree;
  c.constants = {1.0, 1.0, 1e-4, 0.4};
  c.model = "bo";
  c.conductivity.kind = ConductivitySpec::Kind::Orthotropic;
  c.conductivity.sigma_l = 1e-4;
  c.conductivity.sigma_t = 0.5e-4;
  c.conductivity.sigma_n = 0.1e-4;
  c.conductivity.fiber = "helix";
  c.stimulus.amplitude = 300.0;
  c.stimulus.t_start = 0.0;
  c.stimulus.t_end = 3e-3;
  for (const Point &x : {Point{0.25 * L, 0.25 * L, 0.25 * L}, Point{0.75 * L, 0.5 * L, 0.5 * L},
                         Point{0.375 * L, 0.75 * L, 0.75 * L}})
  {
    StimulusRegion r;
    r.shape = StimulusRegion::Shape::Sphere;
    r.center = x;
    r.radius = 2e-3;
    c.stimulus.regions.push_back(r);
  }
  c.probes = {Point{0.25 * L, 0.25 * L, 0.25 * L}, Point{0.5 * L, 0.5 * L, 0.5 * L}};
  return c;
}

SummaryStats Summarize(const std::vector<StepRecord> &records)
{
  SummaryStats s;
  s.count = static_cast<long>(records.size());
  if (records.empty())
  {
    return s;
  }
  s.min = records.front().iterations;
  s.max = records.front().iterations;
  double sum = 0.0;
  for (const auto &r : records)
  {
    sum += r.iterations;
    s.min = std::min(s.min, r.iterations);
    s.max = std::max(s.max, r.iterations);
  }
  s.mean = sum / s.count;
  double var = 0.0;
  for (const auto &r : records)
  {
    var += (r.iterations - s.mean) * (r.iterations - s.mean);
  }
  s.stddev = std::sqrt(var / s.count);
  return s;
}

Simulation::Simulation(const SimulationConfig &cfg)
  : config(cfg), model(IonicModel::FromName(cfg.model))
{
  const auto t0 = std::chrono::steady_clock::now();
  config.Validate();
  for (const auto &[key, value] : config.ionic_parameters)
  {
    model.SetParameter(key, value);
  }
  model.Validate();

  if (!config.mesh.file.empty())
  {
    std::ifstream in(config.mesh.file);
    if (!in)
    {
      throw std::invalid_argument("Cannot open mesh file " + config.mesh.file);
    }
    mesh = std::make_unique<Mesh>(Mesh::Read(in));
  }
  else
  {
    mesh = std::make_unique<Mesh>(Mesh::Structured(config.mesh.dim, config.mesh.lo,
                                                   config.mesh.hi, config.mesh.subdivisions));
  }
  const int dim = mesh->Dimension();
  D = BuildConductivity(config.conductivity, mesh->DomainBoundingBox());
  space = std::make_unique<DGSpace>(*mesh, config.degree);
  mass = std::make_unique<MassOperator>(*space);
  {
    const SparseMatrix A = AssembleStiffness(*space, D);
    const SparseMatrix M = AssembleMass(*space);
    A0 = AssembleSystem(M, A, config.constants);
  }
  const bool matrix_free_mode = config.op == OperatorKind::MatrixFree;
  if (matrix_free_mode)
  {
    matrix_free = std::make_unique<MatrixFreeOperator>(*space, D, config.constants);
  }

  switch (config.precond)
  {
    case PreconditionerKind::AgglomeratedMG:
    {
      const RTreeOrder order =
          config.order.min_entries == 0 ? DefaultRTreeOrder(dim) : config.order;
      hierarchy = std::make_unique<AgglomerationHierarchy>(*mesh, order, config.levels);
      LinearOperator fine_apply;
      if (matrix_free_mode)
      {
        const MatrixFreeOperator *mf = matrix_free.get();
        fine_apply = [mf](std::span<const double> x, std::span<double> y) { mf->Mult(x, y); };
      }
      mg = std::make_unique<MultigridPreconditioner>(*mesh, *hierarchy, config.degree,
                                                     std::move(A0), config.mg, fine_apply);
      A0 = SparseMatrix();
      if (matrix_free_mode && mg->NumLevels() > 1)
      {
        released_bytes = mg->ReleaseFineMatrix();
      }
      precond = mg->AsOperator();
      break;
    }
    case PreconditionerKind::BlockJacobi:
      bj = std::make_unique<BlockJacobi>(A0, space->DofsPerEntity());
      precond = bj->AsOperator();
      break;
    case PreconditionerKind::None:
      precond = IdentityOperator();
      break;
  }
  if (matrix_free_mode && !mg)
  {
    released_bytes = A0.MemoryBytes();
    A0.Release();
  }

  if (!config.stimulus.regions.empty())
  {
    stimulus_load = AssembleStimulusLoad(*space, config.stimulus);
  }

  const Index n = space->TotalDofs();
  U_n.assign(n, model.RestPotential());
  U_nm1 = U_n;
  for (double w : model.RestGating())
  {
    W_n.emplace_back(n, w);
  }
  W_nm1 = W_n;

  for (const Point &x : config.probes)
  {
    const Index k = mesh->FindElement(x);
    if (k < 0)
    {
      throw std::invalid_argument("Probe point lies outside the domain");
    }
    probes.push_back({k, x});
  }
  setup_seconds = Seconds(t0);
}

Simulation::~Simulation() = default;

void Simulation::SetInitialPotential(const Vector &U0)
{
  if (steps_taken != 0)
  {
    throw std::logic_error("SetInitialPotential must precede the first step");
  }
  if (static_cast<Index>(U0.size()) != space->TotalDofs())
  {
    throw std::invalid_argument("SetInitialPotential: size mismatch");
  }
  U_n = U0;
  U_nm1 = U0;
}

void Simulation::SetExtraRhs(std::function<void(double, std::span<double>)> f)
{
  extra_rhs = std::move(f);
}

void Simulation::ApplySystem(std::span<const double> x, std::span<double> y) const
{
  if (matrix_free)
  {
    matrix_free->Mult(x, y);
  }
  else if (mg)
  {
    mg->LevelMatrix(0).Mult(x, y);
  }
  else
  {
    A0.Mult(x, y);
  }
}

StepRecord Simulation::Step()
{
  const auto t0 = std::chrono::steady_clock::now();
  const double dt = config.constants.dt;
  const long step = steps_taken;
  const double t_next = (step + 1) * dt;
  const bool bootstrap = step == 0;
  const Index n = space->TotalDofs();
  const int S = model.NumGating();

  Vector I_ion(n, 0.0);
  std::vector<Vector> W_next = W_n;
  if (!config.diffusion_only)
  {
    ParallelFor(0, n,
                [&](Index first, Index last)
                {
                  LinearRate rates[3];
                  double w[3];
                  for (Index i = first; i < last; i++)
                  {
                    const double u_star = bootstrap ? U_n[i] : 2.0 * U_n[i] - U_nm1[i];
                    model.Rates(u_star, rates);
                    for (int k = 0; k < S; k++)
                    {
                      w[k] = bootstrap ? GatingStepBackwardEuler(rates[k], W_n[k][i], dt)
                                       : GatingStepBdf2(rates[k], W_n[k][i], W_nm1[k][i], dt);
                      W_next[k][i] = w[k];
                    }
                    I_ion[i] = model.Iion(u_star, w);
                  }
                },
                1024);
  }

  // The backward-Euler bootstrap reuses the BDF2 form with U_{n-1} := 2 U_n, which turns
  // chi C / (2 dt) (4 U_n - U_{n-1}) into chi C / dt U_n.
  Vector U_hist;
  if (bootstrap)
  {
    U_hist.resize(n);
    for (Index i = 0; i < n; i++)
    {
      U_hist[i] = 2.0 * U_n[i];
    }
  }
  RhsInputs in;
  in.U_n = U_n;
  in.U_nm1 = bootstrap ? std::span<const double>(U_hist) : std::span<const double>(U_nm1);
  in.I_ion_nodal = I_ion;
  in.stimulus_load = stimulus_load;
  in.stimulus_factor = !config.diffusion_only && config.stimulus.Active(t_next)
                           ? config.stimulus.amplitude
                           : 0.0;
  Vector rhs(n);
  AssembleRhs(*mass, config.constants, in, rhs);
  if (extra_rhs)
  {
    extra_rhs(t_next, rhs);
  }

  LinearOperator op;
  if (bootstrap)
  {
    // chi C / dt M + A = A_0 - chi C / (2 dt) M
    const double c = config.constants.chi_m * config.constants.C_m / (2.0 * dt);
    op = [this, c](std::span<const double> x, std::span<double> y)
    {
      ApplySystem(x, y);
      mass->AddMult(-c, x, y);
    };
  }
  else
  {
    op = [this](std::span<const double> x, std::span<double> y) { ApplySystem(x, y); };
  }

  Vector x = U_n;
  const SolveReport report = Pcg(op, precond, rhs, x, config.solver);
  if (!report.converged)
  {
    throw SolverFailure("PCG did not converge at step " + std::to_string(step) + " (residual " +
                            std::to_string(report.final_residual_norm) + " after " +
                            std::to_string(report.iterations) + " iterations)",
                        step);
  }
  U_nm1 = std::move(U_n);
  U_n = std::move(x);
  if (!config.diffusion_only)
  {
    W_nm1 = std::move(W_n);
    W_n = std::move(W_next);
  }
  steps_taken++;

  StepRecord rec;
  rec.step = step;
  rec.time = t_next;
  rec.iterations = report.iterations;
  rec.res_start = report.initial_residual_norm;
  rec.res_end = report.final_residual_norm;
  rec.wall_s = Seconds(t0);
  return rec;
}

std::vector<StepRecord> Simulation::Run(
    const std::function<void(const Simulation &, const StepRecord &)> &observer)
{
  std::vector<StepRecord> records;
  const long steps = config.NumSteps();
  records.reserve(steps);
  while (steps_taken < steps)
  {
    records.push_back(Step());
    if (observer)
    {
      observer(*this, records.back());
    }
  }
  return records;
}

double Simulation::TotalMass() const
{
  Vector mu(U_n.size());
  mass->Mult(U_n, mu);
  return Sum(mu);
}

std::vector<double> Simulation::ProbeValues() const
{
  std::vector<double> v;
  for (const auto &p : probes)
  {
    v.push_back(space->Evaluate(U_n, p.element, p.x));
  }
  return v;
}

}  // namespace polymg
