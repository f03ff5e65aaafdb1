// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POLYMG_TIMELOOP_HPP
#define POLYMG_TIMELOOP_HPP

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>
#include "polymg/assembly.hpp"
#include "polymg/ionic.hpp"
#include "polymg/matrixfree.hpp"
#include "polymg/multigrid.hpp"
#include "polymg/solver.hpp"

namespace polymg
{

struct MeshSpec
{
  int dim = 2;
  Point lo{0.0, 0.0, 0.0};
  Point hi{1.0, 1.0, 1.0};
  std::array<int, 3> subdivisions{128, 128, 1};
  // Plain-text mesh file; overrides the structured box when set.
  std::string file;
};

struct ConductivitySpec
{
  enum class Kind
  {
    Isotropic,
    Orthotropic
  };
  Kind kind = Kind::Isotropic;
  double sigma = 0.12;
  double sigma_l = 1e-4, sigma_t = 0.5e-4, sigma_n = 0.1e-4;
  // "axis": f0 = e1, s0 = e2, n0 = e3. "helix": f0 rotates about e3 with an angle varying
  // linearly in z across the domain from helix_min_deg to helix_max_deg.
  std::string fiber = "axis";
  double helix_min_deg = -60.0;
  double helix_max_deg = 60.0;
};

ConductivityField BuildConductivity(const ConductivitySpec &spec, const BoundingBox &domain);

enum class OperatorKind
{
  MatrixBased,
  MatrixFree
};

enum class PreconditionerKind
{
  AgglomeratedMG,
  BlockJacobi,
  None
};

OperatorKind ParseOperatorKind(const std::string &s);
PreconditionerKind ParsePreconditionerKind(const std::string &s);
std::string ToString(OperatorKind k);
std::string ToString(PreconditionerKind k);

struct SimulationConfig
{
  MeshSpec mesh;
  int degree = 1;
  ModelConstants constants{1e5, 1e-2, 1e-4, 0.4};
  std::string model = "fhn";
  std::map<std::string, double> ionic_parameters;
  ConductivitySpec conductivity;
  Stimulus stimulus;

  OperatorKind op = OperatorKind::MatrixBased;
  PreconditionerKind precond = PreconditionerKind::AgglomeratedMG;
  int levels = 3;
  // Zero selects the default (2, 4) in 2D and (4, 8) in 3D.
  RTreeOrder order{0, 0};
  MultigridOptions mg;
  SolveOptions solver;

  // Number of steps to run; negative means round(T_final / dt).
  long num_steps = -1;
  // Force I_ion = 0 and I_app = 0 and skip the gating update.
  bool diffusion_only = false;

  std::vector<Point> probes;
  // Full-field snapshot every k steps (0 disables).
  int snapshot_every = 0;
  std::string out_dir = "out";
  std::uint64_t seed = 42;

  long NumSteps() const;
  // Throws invalid_argument on inconsistent settings.
  void Validate() const;

  // Unit-square FitzHugh-Nagumo test with a box stimulus.
  static SimulationConfig Fhn2D(Index n = 128, int degree = 1);
  // Box substitute of the idealized ventricle: Bueno-Orovio with helical fibers and three
  // spherical stimuli.
  static SimulationConfig BoBox3D(Index n = 16, int degree = 1);
};

struct StepRecord
{
  long step = 0;
  double time = 0.0;
  int iterations = 0;
  double res_start = 0.0;
  double res_end = 0.0;
  double wall_s = 0.0;
};

struct SummaryStats
{
  double mean = 0.0;
  double stddev = 0.0;
  int min = 0;
  int max = 0;
  long count = 0;
};

SummaryStats Summarize(const std::vector<StepRecord> &records);

// Error raised when PCG fails to converge; names the step.
class SolverFailure : public std::runtime_error
{
public:
  SolverFailure(const std::string &what, long step) : std::runtime_error(what), step(step) {}
  long Step() const { return step; }

private:
  long step;
};

//
// BDF2 monodomain driver. Each step: extrapolate U* = 2 U_n - U_{n-1}, advance the gating
// variables at every DoF, assemble the ICI right-hand side and solve A_0 U_{n+1} = rhs with
// warm-started PCG. The first step is a backward-Euler bootstrap.
//
class Simulation
{
public:
  explicit Simulation(const SimulationConfig &config);
  ~Simulation();

  // Replace the initial potential (both history levels). Only before the first step.
  void SetInitialPotential(const Vector &U0);
  // Extra term added to the right-hand side at t_{n+1}, scaled as a BDF2 load; used by
  // manufactured-solution tests.
  void SetExtraRhs(std::function<void(double t_next, std::span<double> rhs)> f);

  StepRecord Step();
  // Runs the configured number of steps; observer is called after each step.
  std::vector<StepRecord> Run(
      const std::function<void(const Simulation &, const StepRecord &)> &observer = {});

  const SimulationConfig &Config() const { return config; }
  const Mesh &GetMesh() const { return *mesh; }
  const DGSpace &Space() const { return *space; }
  const IonicModel &Model() const { return model; }
  const MassOperator &Mass() const { return *mass; }
  const MultigridPreconditioner *Multigrid() const { return mg.get(); }
  const AgglomerationHierarchy *Hierarchy() const { return hierarchy.get(); }
  const MatrixFreeOperator *MatrixFree() const { return matrix_free.get(); }

  const Vector &U() const { return U_n; }
  const Vector &UPrevious() const { return U_nm1; }
  const Vector &W(int k) const { return W_n.at(k); }
  long StepsTaken() const { return steps_taken; }
  double Time() const { return steps_taken * config.constants.dt; }

  // 1^T M U_n
  double TotalMass() const;
  std::vector<double> ProbeValues() const;

  // Bytes of assembled A_0 values released after setup (matrix-free mode), else 0.
  std::size_t ReleasedFineMatrixBytes() const { return released_bytes; }
  double SetupSeconds() const { return setup_seconds; }

private:
  void ApplySystem(std::span<const double> x, std::span<double> y) const;

  SimulationConfig config;
  std::unique_ptr<Mesh> mesh;
  std::unique_ptr<AgglomerationHierarchy> hierarchy;
  std::unique_ptr<DGSpace> space;
  ConductivityField D;
  IonicModel model;
  std::unique_ptr<MassOperator> mass;
  SparseMatrix A0;
  std::unique_ptr<MatrixFreeOperator> matrix_free;
  std::unique_ptr<MultigridPreconditioner> mg;
  std::unique_ptr<BlockJacobi> bj;
  LinearOperator precond;
  Vector stimulus_load;
  std::function<void(double, std::span<double>)> extra_rhs;

  Vector U_n, U_nm1;
  std::vector<Vector> W_n, W_nm1;
  long steps_taken = 0;
  std::size_t released_bytes = 0;
  double setup_seconds = 0.0;

  struct Probe
  {
    Index element;
    Point x;
  };
  std::vector<Probe> probes;
};

}  // namespace polymg

#endif  // POLYMG_TIMELOOP_HPP
