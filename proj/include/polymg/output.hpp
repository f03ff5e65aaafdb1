// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POLYMG_OUTPUT_HPP
#define POLYMG_OUTPUT_HPP

#include <fstream>
#include <string>
#include <vector>
#include "polymg/timeloop.hpp"

namespace polymg
{

// Legacy VTK polydata: one vertex per DoF at its support point, with the point fields
// "u" and "mV" (85.7 u - 84). Values are written with 17 significant digits, so reading
// the file back reproduces u bitwise.
void WriteSnapshot(const std::string &path, const DGSpace &space, std::span<const double> u,
                   double time);

struct Snapshot
{
  double time = 0.0;
  std::vector<Point> points;
  Vector u;
  Vector mV;
};

Snapshot ReadSnapshot(const std::string &path);

// Per-step CSV series with header "step,time,iterations,res_start,res_end,wall_s". Every
// row is flushed so a failing run keeps its partial log.
class IterationLog
{
public:
  explicit IterationLog(const std::string &path);
  void Append(const StepRecord &r);

  static const char *Header() { return "step,time,iterations,res_start,res_end,wall_s"; }

private:
  std::ofstream out;
};

// Probe series: "step,time,probe0,probe1,...".
class ProbeLog
{
public:
  ProbeLog(const std::string &path, std::size_t num_probes);
  void Append(const StepRecord &r, const std::vector<double> &values);

private:
  std::ofstream out;
};

void WriteHierarchy(const std::string &path, const AgglomerationHierarchy &hierarchy);

// Plain-text "key = value" summary of a run.
void WriteSummary(const std::string &path, const SummaryStats &stats, const Simulation &sim);

struct RunManifest
{
  std::string config_echo;
  std::string iterations_csv;
  std::string probes_csv;
  std::string summary;
  std::vector<std::string> snapshots;
  std::string version;
  std::uint64_t seed = 0;
};

void WriteManifest(const std::string &path, const RunManifest &manifest);

}  // namespace polymg

#endif  // POLYMG_OUTPUT_HPP
