// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

// Command-line driver: run, hierarchy, bench-op and verify subcommands.
//
// Exit codes: 0 success, 1 solver failure (or failed verification), 2 configuration error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include "CLI11.hpp"
#include "polymg/config.hpp"
#include "polymg/output.hpp"
#include "polymg/parallel.hpp"
#include "polymg/verification.hpp"

namespace fs = std::filesystem;
using namespace polymg;

namespace
{

constexpr const char *kVersion = "polymg 1.0.0";

// "128x128" or "16x16x16"
std::vector<int> ParseMeshSize(const std::string &s)
{
  std::vector<int> n;
  std::stringstream in(s);
  std::string part;
  while (std::getline(in, part, 'x'))
  {
    std::size_t used = 0;
    int v = 0;
    try
    {
      v = std::stoi(part, &used);
    }
    catch (const std::exception &)
    {
      used = 0;
    }
    if (used != part.size() || v < 1)
    {
      throw ConfigError("Malformed mesh size \"" + s + "\" (expected e.g. 8x8 or 4x4x4)");
    }
    n.push_back(v);
  }
  if (n.size() != 2 && n.size() != 3)
  {
    throw ConfigError("Malformed mesh size \"" + s + "\" (expected 2 or 3 extents)");
  }
  return n;
}

Mesh UnitMesh(const std::vector<int> &n)
{
  const int dim = static_cast<int>(n.size());
  return Mesh::Structured(dim, {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0},
                          {n[0], n[1], dim == 3 ? n[2] : 1});
}

struct RunArgs
{
  std::string config, preset = "fhn2d", op, precond, out, mesh;
  int levels = 0, degree = 0;
  long steps = -1;
  long long seed = -1;
};

int Run(const RunArgs &a)
{
  SimulationConfig cfg;
  try
  {
    std::map<std::string, std::string> settings;
    if (!a.config.empty())
    {
      std::ifstream in(a.config);
      if (!in)
      {
        throw ConfigError("Cannot open configuration file " + a.config);
      }
      settings = ParseIni(in);
    }
    if (!settings.count("run.preset"))
    {
      settings["run.preset"] = a.preset;
    }
    if (!a.op.empty())
    {
      settings["solver.operator"] = a.op;
    }
    if (!a.precond.empty())
    {
      settings["solver.precond"] = a.precond;
    }
    if (a.levels > 0)
    {
      settings["mg.levels"] = std::to_string(a.levels);
    }
    if (a.degree > 0)
    {
      settings["discretization.degree"] = std::to_string(a.degree);
    }
    if (a.steps >= 0)
    {
      settings["time.num_steps"] = std::to_string(a.steps);
    }
    if (a.seed >= 0)
    {
      settings["run.seed"] = std::to_string(a.seed);
    }
    if (!a.out.empty())
    {
      settings["output.dir"] = a.out;
    }
    if (!a.mesh.empty())
    {
      const auto n = ParseMeshSize(a.mesh);
      std::string s;
      for (int v : n)
      {
        s += (s.empty() ? "" : " ") + std::to_string(v);
      }
      settings["mesh.dim"] = std::to_string(n.size());
      settings["mesh.subdivisions"] = s;
    }
    cfg = ConfigFromSettings(settings);
  }
  catch (const std::invalid_argument &e)
  {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  }

  std::unique_ptr<Simulation> sim;
  try
  {
    fs::create_directories(cfg.out_dir);
    sim = std::make_unique<Simulation>(cfg);
  }
  catch (const std::invalid_argument &e)
  {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  }
  catch (const std::exception &e)
  {
    std::cerr << "setup failed: " << e.what() << "\n";
    return 1;
  }

  const fs::path dir(cfg.out_dir);
  RunManifest manifest;
  manifest.version = kVersion;
  manifest.seed = cfg.seed;
  manifest.config_echo = EchoConfig(cfg);
  manifest.iterations_csv = (dir / "iterations.csv").string();
  manifest.probes_csv = (dir / "probes.csv").string();
  manifest.summary = (dir / "summary.txt").string();
  {
    std::ofstream echo(dir / "config.ini");
    echo << manifest.config_echo;
  }
  std::cout << "dofs " << sim->Space().TotalDofs() << ", steps " << cfg.NumSteps() << ", operator "
            << ToString(cfg.op) << ", preconditioner " << ToString(cfg.precond) << "\n";
  if (const auto *h = sim->Hierarchy(); h && h->Truncated())
  {
    std::cout << "warning: " << h->Warning() << "\n";
  }
  if (const auto *mg = sim->Multigrid())
  {
    std::cout << "levels " << mg->NumLevels() << ", operator complexity "
              << mg->OperatorComplexity() << ", coarse solver " << mg->CoarseSolverName() << "\n";
  }

  IterationLog log(manifest.iterations_csv);
  ProbeLog probe_log(manifest.probes_csv, cfg.probes.size());
  auto snapshot = [&](const Simulation &s)
  {
    char name[64];
    std::snprintf(name, sizeof(name), "snapshot_%06ld.vtk", s.StepsTaken());
    const std::string path = (dir / name).string();
    WriteSnapshot(path, s.Space(), s.U(), s.Time());
    manifest.snapshots.push_back(path);
  };
  std::vector<StepRecord> records;
  int status = 0;
  try
  {
    if (cfg.snapshot_every > 0)
    {
      snapshot(*sim);
    }
    records = sim->Run(
        [&](const Simulation &s, const StepRecord &r)
        {
          log.Append(r);
          probe_log.Append(r, s.ProbeValues());
          if (cfg.snapshot_every > 0 && s.StepsTaken() % cfg.snapshot_every == 0)
          {
            snapshot(s);
          }
        });
  }
  catch (const SolverFailure &e)
  {
    std::cerr << "solver failure: " << e.what() << "\n";
    status = 1;
  }
  const SummaryStats stats = Summarize(records);
  WriteSummary(manifest.summary, stats, *sim);
  WriteManifest((dir / "manifest.txt").string(), manifest);
  std::printf("iterations mean %.3f std %.3f min %d max %d over %ld steps\n", stats.mean,
              stats.stddev, stats.min, stats.max, stats.count);
  return status;
}

int Hierarchy(const std::string &mesh_size, int levels, int m, int M,
              const std::string &construction, const std::string &out)
{
  Mesh mesh = UnitMesh(ParseMeshSize(mesh_size));
  RTreeOrder order = DefaultRTreeOrder(mesh.Dimension());
  if (m > 0)
  {
    order.min_entries = m;
  }
  if (M > 0)
  {
    order.max_entries = M;
  }
  RTree::Construction c = RTree::Construction::Packed;
  if (construction == "rstar")
  {
    c = RTree::Construction::RStarInsertion;
  }
  else if (construction != "packed")
  {
    throw ConfigError("Unknown construction \"" + construction + "\" (packed|rstar)");
  }
  const AgglomerationHierarchy h(mesh, order, levels, c);
  if (h.Truncated())
  {
    std::cerr << "warning: " << h.Warning() << "\n";
  }
  for (int l = 0; l < h.NumLevels(); l++)
  {
    std::cerr << "level " << l << ": " << h.Cardinality(l) << " agglomerates";
    if (l > 0)
    {
      std::cerr << ", ratio " << h.CoarseningRatios()[l - 1];
    }
    std::cerr << "\n";
  }
  if (const std::string err = h.Validate(mesh); !err.empty())
  {
    std::cerr << "invalid hierarchy: " << err << "\n";
    return 1;
  }
  if (out.empty() || out == "-")
  {
    h.Write(std::cout);
  }
  else
  {
    WriteHierarchy(out, h);
  }
  return 0;
}

int BenchOp(const std::string &mesh_size, int degree, int repeats)
{
  const Mesh mesh = UnitMesh(ParseMeshSize(mesh_size));
  const DGSpace V(mesh, degree);
  const auto D = ConductivityField::Isotropic(1.0);
  const ModelConstants c{1.0, 1.0, 1e-4, 1.0};
  const SparseMatrix A0 = AssembleSystem(AssembleMass(V), AssembleStiffness(V, D), c);
  const MatrixFreeOperator mf(V, D, c);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector x(V.TotalDofs()), y(V.TotalDofs());
  for (auto &v : x)
  {
    v = dist(rng);
  }
  auto time = [&](auto &&apply)
  {
    apply();
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < repeats; r++)
    {
      apply();
    }
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() /
           repeats;
  };
  const double tb = time([&]() { A0.Mult(x, y); });
  const double tf = time([&]() { mf.Mult(x, y); });
  const OperationCount oc = OperationCountEstimate(degree, mesh.Dimension());
  std::printf("mesh %s p %d dofs %d threads %d\n", mesh_size.c_str(), degree, V.TotalDofs(),
              WorkerThreads());
  std::printf("matrix-based  %.6e s/apply  %zu bytes\n", tb, A0.MemoryBytes());
  std::printf("matrix-free   %.6e s/apply  %zu bytes\n", tf, mf.MemoryBytes());
  std::printf("speedup %.3f  per-element ops naive %lld factorized %lld\n", tb / tf, oc.naive,
              oc.factorized);
  return 0;
}

int Verify(unsigned long long seed)
{
  const auto results = RunVerification(seed);
  int failed = 0;
  for (const auto &r : results)
  {
    std::printf("%s %s%s%s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.empty() ? "" : ": ", r.detail.c_str());
    failed += r.passed ? 0 : 1;
  }
  std::printf("%zu checks, %d failed\n", results.size(), failed);
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Agglomeration-based multigrid for DG monodomain simulations"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  RunArgs run_args;
  auto *run = app.add_subcommand("run", "Run a monodomain simulation");
  run->add_option("--config", run_args.config, "Settings file (section.key = value)");
  run->add_option("--preset", run_args.preset, "Starting defaults: fhn2d or bo3d")
      ->check(CLI::IsMember({"fhn2d", "bo3d"}));
  run->add_option("--operator", run_args.op, "Fine-level operator")
      ->check(CLI::IsMember({"matrix-free", "matrix-based"}));
  run->add_option("--precond", run_args.precond, "Preconditioner")
      ->check(CLI::IsMember({"agglomg", "bjacobi", "none"}));
  run->add_option("--levels", run_args.levels, "Multigrid levels");
  run->add_option("--degree", run_args.degree, "Polynomial degree");
  run->add_option("--out", run_args.out, "Output directory");
  run->add_option("--seed", run_args.seed, "Seed for the eigenvalue estimator");
  run->add_option("--steps", run_args.steps, "Number of time steps");
  run->add_option("--mesh", run_args.mesh, "Unit-box mesh size, e.g. 128x128");

  std::string h_mesh = "8x8", h_out, h_construction = "packed";
  int h_levels = 2, h_min = 0, h_max = 0;
  auto *hier = app.add_subcommand("hierarchy", "Build and dump an agglomeration hierarchy");
  hier->add_option("--mesh", h_mesh, "Unit-box mesh size, e.g. 8x8");
  hier->add_option("--levels", h_levels, "Number of levels including the fine mesh");
  hier->add_option("--rtree-min", h_min, "R-tree minimum fill");
  hier->add_option("--rtree-max", h_max, "R-tree maximum fill");
  hier->add_option("--construction", h_construction, "packed or rstar");
  hier->add_option("--out", h_out, "Dump file (default: stdout)");

  std::string b_mesh = "16x16x16";
  int b_degree = 2, b_repeats = 10;
  auto *bench = app.add_subcommand("bench-op", "Time matrix-free against matrix-based apply");
  bench->add_option("--mesh", b_mesh, "Unit-box mesh size");
  bench->add_option("--degree", b_degree, "Polynomial degree");
  bench->add_option("--repeats", b_repeats, "Timed applications");

  unsigned long long v_seed = 42;
  auto *verify = app.add_subcommand("verify", "Run the invariant suite");
  verify->add_option("--seed", v_seed, "Seed for random test vectors");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try
  {
    if (run->parsed())
    {
      return Run(run_args);
    }
    if (hier->parsed())
    {
      return Hierarchy(h_mesh, h_levels, h_min, h_max, h_construction, h_out);
    }
    if (bench->parsed())
    {
      return BenchOp(b_mesh, b_degree, b_repeats);
    }
    if (verify->parsed())
    {
      return Verify(v_seed);
    }
  }
  catch (const std::invalid_argument &e)
  {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  }
  catch (const std::exception &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
