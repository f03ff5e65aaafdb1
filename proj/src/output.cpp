// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#include "polymg/output.hpp"

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <sstream>
#include <stdexcept>
#include "polymg/ionic.hpp"

namespace polymg
{

namespace
{

struct FileCloser
{
  void operator()(std::FILE *f) const { std::fclose(f); }
};

std::unique_ptr<std::FILE, FileCloser> OpenForWrite(const std::string &path)
{
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.c_str(), "w"));
  if (!f)
  {
    throw std::runtime_error("Cannot open " + path + " for writing");
  }
  return f;
}

std::ofstream OpenStream(const std::string &path)
{
  std::ofstream out(path);
  if (!out)
  {
    throw std::runtime_error("Cannot open " + path + " for writing");
  }
  return out;
}

std::string Fmt(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

void WriteSnapshot(const std::string &path, const DGSpace &space, std::span<const double> u,
                   double time)
{
  const Index n = space.TotalDofs();
  if (static_cast<Index>(u.size()) != n)
  {
    throw std::invalid_argument("WriteSnapshot: field size does not match the space");
  }
  auto f = OpenForWrite(path);
  std::FILE *fp = f.get();
  std::fprintf(fp, "# vtk DataFile Version 3.0\n");
  std::fprintf(fp, "polymg snapshot time=%.17g\n", time);
  std::fprintf(fp, "ASCII\nDATASET POLYDATA\nPOINTS %d double\n", n);
  for (Index i = 0; i < n; i++)
  {
    const Point x = space.SupportPoint(i);
    std::fprintf(fp, "%.17g %.17g %.17g\n", x[0], x[1], x[2]);
  }
  std::fprintf(fp, "VERTICES %d %lld\n", n, 2LL * n);
  for (Index i = 0; i < n; i++)
  {
    std::fprintf(fp, "1 %d\n", i);
  }
  std::fprintf(fp, "POINT_DATA %d\nSCALARS u double 1\nLOOKUP_TABLE default\n", n);
  for (Index i = 0; i < n; i++)
  {
    std::fprintf(fp, "%.17g\n", u[i]);
  }
  std::fprintf(fp, "SCALARS mV double 1\nLOOKUP_TABLE default\n");
  for (Index i = 0; i < n; i++)
  {
    std::fprintf(fp, "%.17g\n", ToMillivolts(u[i]));
  }
  if (std::ferror(fp))
  {
    throw std::runtime_error("Write error on " + path);
  }
}

Snapshot ReadSnapshot(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw std::runtime_error("Cannot open " + path);
  }
  Snapshot s;
  std::string line, word;
  std::getline(in, line);
  std::getline(in, line);
  if (const auto pos = line.find("time="); pos != std::string::npos)
  {
    s.time = std::strtod(line.c_str() + pos + 5, nullptr);
  }
  auto expect = [&](const std::string &token)
  {
    if (!(in >> word) || word != token)
    {
      throw std::runtime_error("Malformed snapshot " + path + ": expected " + token);
    }
  };
  // Tokens are parsed with strtod so that the 17-digit values round-trip exactly.
  auto number = [&]()
  {
    if (!(in >> word))
    {
      throw std::runtime_error("Malformed snapshot " + path + ": truncated data");
    }
    return std::strtod(word.c_str(), nullptr);
  };
  expect("ASCII");
  expect("DATASET");
  expect("POLYDATA");
  expect("POINTS");
  long n = 0;
  in >> n >> word;
  s.points.resize(n);
  for (auto &p : s.points)
  {
    for (int d = 0; d < 3; d++)
    {
      p[d] = number();
    }
  }
  expect("VERTICES");
  in >> word >> word;
  for (long i = 0; i < 2 * n; i++)
  {
    in >> word;
  }
  expect("POINT_DATA");
  in >> word;
  for (Vector *field : {&s.u, &s.mV})
  {
    expect("SCALARS");
    in >> word >> word >> word;
    expect("LOOKUP_TABLE");
    in >> word;
    field->resize(n);
    for (auto &v : *field)
    {
      v = number();
    }
  }
  return s;
}

IterationLog::IterationLog(const std::string &path) : out(OpenStream(path))
{
  out << Header() << "\n";
  out.flush();
}

void IterationLog::Append(const StepRecord &r)
{
  out << r.step << ',' << Fmt(r.time) << ',' << r.iterations << ',' << Fmt(r.res_start) << ','
      << Fmt(r.res_end) << ',' << Fmt(r.wall_s) << "\n";
  out.flush();
}

ProbeLog::ProbeLog(const std::string &path, std::size_t num_probes) : out(OpenStream(path))
{
  out << "step,time";
  for (std::size_t i = 0; i < num_probes; i++)
  {
    out << ",probe" << i;
  }
  out << "\n";
}

void ProbeLog::Append(const StepRecord &r, const std::vector<double> &values)
{
  out << r.step << ',' << Fmt(r.time);
  for (double v : values)
  {
    out << ',' << Fmt(v);
  }
  out << "\n";
  out.flush();
}

void WriteHierarchy(const std::string &path, const AgglomerationHierarchy &hierarchy)
{
  std::ofstream out = OpenStream(path);
  hierarchy.Write(out);
}

void WriteSummary(const std::string &path, const SummaryStats &stats, const Simulation &sim)
{
  std::ofstream out = OpenStream(path);
  out << "steps = " << stats.count << "\n";
  out << "iterations_mean = " << Fmt(stats.mean) << "\n";
  out << "iterations_std = " << Fmt(stats.stddev) << "\n";
  out << "iterations_min = " << stats.min << "\n";
  out << "iterations_max = " << stats.max << "\n";
  out << "dofs = " << sim.Space().TotalDofs() << "\n";
  out << "setup_s = " << Fmt(sim.SetupSeconds()) << "\n";
  out << "released_fine_matrix_bytes = " << sim.ReleasedFineMatrixBytes() << "\n";
  if (const auto *mg = sim.Multigrid())
  {
    out << "mg_levels = " << mg->NumLevels() << "\n";
    out << "operator_complexity = " << Fmt(mg->OperatorComplexity()) << "\n";
    out << "coarse_solver = " << mg->CoarseSolverName() << "\n";
    for (int l = 0; l < mg->NumLevels(); l++)
    {
      out << "level" << l << "_dofs = " << mg->Space(l).TotalDofs() << "\n";
      out << "level" << l << "_nnz = " << mg->LevelNnz(l) << "\n";
    }
  }
  if (const auto *h = sim.Hierarchy(); h && h->Truncated())
  {
    out << "warning = " << h->Warning() << "\n";
  }
}

void WriteManifest(const std::string &path, const RunManifest &m)
{
  std::ofstream out = OpenStream(path);
  out << "# run manifest\n";
  out << "version = " << m.version << "\n";
  out << "seed = " << m.seed << "\n";
  out << "iterations_csv = " << m.iterations_csv << "\n";
  out << "probes_csv = " << m.probes_csv << "\n";
  out << "summary = " << m.summary << "\n";
  for (const auto &s : m.snapshots)
  {
    out << "snapshot = " << s << "\n";
  }
  out << "\n# configuration\n" << m.config_echo;
}

}  // namespace polymg
