// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#include "polymg/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace polymg
{

namespace
{

std::string Trim(const std::string &s)
{
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
  {
    return "";
  }
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double ToDouble(const std::string &key, const std::string &v)
{
  const std::string t = Trim(v);
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
  {
    throw ConfigError("Key " + key + ": \"" + v + "\" is not a number");
  }
  return x;
}

long ToLong(const std::string &key, const std::string &v)
{
  const std::string t = Trim(v);
  long x = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
  {
    throw ConfigError("Key " + key + ": \"" + v + "\" is not an integer");
  }
  return x;
}

bool ToBool(const std::string &key, const std::string &v)
{
  const std::string t = Trim(v);
  if (t == "on" || t == "true" || t == "1" || t == "yes")
  {
    return true;
  }
  if (t == "off" || t == "false" || t == "0" || t == "no")
  {
    return false;
  }
  throw ConfigError("Key " + key + ": \"" + v + "\" is not a boolean (on|off)");
}

std::vector<double> ToNumbers(const std::string &key, const std::string &v)
{
  std::istringstream in(v);
  std::vector<double> out;
  std::string tok;
  while (in >> tok)
  {
    out.push_back(ToDouble(key, tok));
  }
  return out;
}

// "a b c; d e f" -> groups of numbers
std::vector<std::vector<double>> ToGroups(const std::string &key, const std::string &v)
{
  std::vector<std::vector<double>> groups;
  std::stringstream in(v);
  std::string part;
  while (std::getline(in, part, ';'))
  {
    if (!Trim(part).empty())
    {
      groups.push_back(ToNumbers(key, part));
    }
  }
  return groups;
}

Point ToPoint(const std::string &key, const std::vector<double> &x, std::size_t offset,
              std::size_t count)
{
  if (x.size() < offset + count || count > 3)
  {
    throw ConfigError("Key " + key + ": expected " + std::to_string(count) + " coordinates");
  }
  Point p{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < count; i++)
  {
    p[i] = x[offset + i];
  }
  return p;
}

std::string Num(double x)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string Coords(const Point &p, int dim)
{
  std::string s;
  for (int d = 0; d < dim; d++)
  {
    s += (d ? " " : "") + Num(p[d]);
  }
  return s;
}

CoarseSolverKind ToCoarseSolver(const std::string &key, const std::string &v)
{
  const std::string t = Trim(v);
  if (t == "auto")
  {
    return CoarseSolverKind::Auto;
  }
  if (t == "direct")
  {
    return CoarseSolverKind::Direct;
  }
  if (t == "pcg")
  {
    return CoarseSolverKind::Pcg;
  }
  throw ConfigError("Key " + key + ": expected auto, direct or pcg");
}

std::string CoarseSolverString(CoarseSolverKind k)
{
  switch (k)
  {
    case CoarseSolverKind::Direct:
      return "direct";
    case CoarseSolverKind::Pcg:
      return "pcg";
    default:
      return "auto";
  }
}

}  // namespace

std::map<std::string, std::string> ParseIni(std::istream &in)
{
  std::map<std::string, std::string> settings;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line))
  {
    lineno++;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
    {
      line.resize(hash);
    }
    line = Trim(line);
    if (line.empty())
    {
      continue;
    }
    if (line.front() == '[')
    {
      if (line.back() != ']')
      {
        throw ConfigError("Line " + std::to_string(lineno) + ": malformed section header");
      }
      section = Trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
    {
      throw ConfigError("Line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = Trim(line.substr(0, eq));
    if (key.empty())
    {
      throw ConfigError("Line " + std::to_string(lineno) + ": empty key");
    }
    if (!section.empty())
    {
      key = section + "." + key;
    }
    settings[key] = Trim(line.substr(eq + 1));
  }
  return settings;
}

SimulationConfig ConfigFromSettings(const std::map<std::string, std::string> &settings)
{
  SimulationConfig c;
  if (auto it = settings.find("run.preset"); it != settings.end())
  {
    if (it->second == "fhn2d")
    {
      c = SimulationConfig::Fhn2D();
    }
    else if (it->second == "bo3d")
    {
      c = SimulationConfig::BoBox3D();
    }
    else
    {
      throw ConfigError("Key run.preset: expected fhn2d or bo3d");
    }
  }

  using Setter = std::function<void(const std::string &, const std::string &)>;
  const std::map<std::string, Setter> setters = {
      {"run.preset", [](const std::string &, const std::string &) {}},
      {"mesh.dim", [&](auto &k, auto &v) { c.mesh.dim = static_cast<int>(ToLong(k, v)); }},
      {"mesh.lo",
       [&](auto &k, auto &v)
       {
         const auto x = ToNumbers(k, v);
         c.mesh.lo = ToPoint(k, x, 0, x.size());
       }},
      {"mesh.hi",
       [&](auto &k, auto &v)
       {
         const auto x = ToNumbers(k, v);
         c.mesh.hi = ToPoint(k, x, 0, x.size());
       }},
      {"mesh.subdivisions",
       [&](auto &k, auto &v)
       {
         const auto x = ToNumbers(k, v);
         if (x.empty() || x.size() > 3)
         {
           throw ConfigError("Key " + k + ": expected 1 to 3 integers");
         }
         c.mesh.subdivisions = {1, 1, 1};
         for (std::size_t i = 0; i < x.size(); i++)
         {
           c.mesh.subdivisions[i] = static_cast<int>(x[i]);
         }
       }},
      {"mesh.file", [&](auto &, auto &v) { c.mesh.file = v; }},
      {"discretization.degree",
       [&](auto &k, auto &v) { c.degree = static_cast<int>(ToLong(k, v)); }},
      {"time.dt", [&](auto &k, auto &v) { c.constants.dt = ToDouble(k, v); }},
      {"time.T_final", [&](auto &k, auto &v) { c.constants.T_final = ToDouble(k, v); }},
      {"time.num_steps", [&](auto &k, auto &v) { c.num_steps = ToLong(k, v); }},
      {"model.name", [&](auto &, auto &v) { c.model = v; }},
      {"model.chi_m", [&](auto &k, auto &v) { c.constants.chi_m = ToDouble(k, v); }},
      {"model.C_m", [&](auto &k, auto &v) { c.constants.C_m = ToDouble(k, v); }},
      {"conductivity.kind",
       [&](auto &k, auto &v)
       {
         if (v == "isotropic")
         {
           c.conductivity.kind = ConductivitySpec::Kind::Isotropic;
         }
         else if (v == "orthotropic")
         {
           c.conductivity.kind = ConductivitySpec::Kind::Orthotropic;
         }
         else
         {
           throw ConfigError("Key " + k + ": expected isotropic or orthotropic");
         }
       }},
      {"conductivity.sigma", [&](auto &k, auto &v) { c.conductivity.sigma = ToDouble(k, v); }},
      {"conductivity.sigma_l",
       [&](auto &k, auto &v) { c.conductivity.sigma_l = ToDouble(k, v); }},
      {"conductivity.sigma_t",
       [&](auto &k, auto &v) { c.conductivity.sigma_t = ToDouble(k, v); }},
      {"conductivity.sigma_n",
       [&](auto &k, auto &v) { c.conductivity.sigma_n = ToDouble(k, v); }},
      {"conductivity.fiber", [&](auto &, auto &v) { c.conductivity.fiber = v; }},
      {"conductivity.helix_min_deg",
       [&](auto &k, auto &v) { c.conductivity.helix_min_deg = ToDouble(k, v); }},
      {"conductivity.helix_max_deg",
       [&](auto &k, auto &v) { c.conductivity.helix_max_deg = ToDouble(k, v); }},
      {"stimulus.amplitude", [&](auto &k, auto &v) { c.stimulus.amplitude = ToDouble(k, v); }},
      {"stimulus.t_start", [&](auto &k, auto &v) { c.stimulus.t_start = ToDouble(k, v); }},
      {"stimulus.t_end", [&](auto &k, auto &v) { c.stimulus.t_end = ToDouble(k, v); }},
      {"stimulus.boxes",
       [&](auto &k, auto &v)
       {
         std::erase_if(c.stimulus.regions, [](const StimulusRegion &r)
                       { return r.shape == StimulusRegion::Shape::Box; });
         for (const auto &g : ToGroups(k, v))
         {
           if (g.size() != 4 && g.size() != 6)
           {
             throw ConfigError("Key " + k + ": each box needs 4 (2D) or 6 (3D) numbers");
           }
           const std::size_t d = g.size() / 2;
           StimulusRegion r;
           r.shape = StimulusRegion::Shape::Box;
           r.box = BoundingBox::Empty(static_cast<int>(d));
           r.box.lo = ToPoint(k, g, 0, d);
           r.box.hi = ToPoint(k, g, d, d);
           c.stimulus.regions.push_back(r);
         }
       }},
      {"stimulus.spheres",
       [&](auto &k, auto &v)
       {
         std::erase_if(c.stimulus.regions, [](const StimulusRegion &r)
                       { return r.shape == StimulusRegion::Shape::Sphere; });
         for (const auto &g : ToGroups(k, v))
         {
           if (g.size() != 3 && g.size() != 4)
           {
             throw ConfigError("Key " + k + ": each sphere needs center and radius");
           }
           StimulusRegion r;
           r.shape = StimulusRegion::Shape::Sphere;
           r.center = ToPoint(k, g, 0, g.size() - 1);
           r.radius = g.back();
           c.stimulus.regions.push_back(r);
         }
       }},
      {"solver.abs_tol", [&](auto &k, auto &v) { c.solver.abs_tol = ToDouble(k, v); }},
      {"solver.rel_tol", [&](auto &k, auto &v) { c.solver.rel_tol = ToDouble(k, v); }},
      {"solver.max_iter",
       [&](auto &k, auto &v) { c.solver.max_iter = static_cast<int>(ToLong(k, v)); }},
      {"solver.flexible", [&](auto &k, auto &v) { c.solver.flexible = ToBool(k, v); }},
      {"solver.precond", [&](auto &, auto &v) { c.precond = ParsePreconditionerKind(v); }},
      {"solver.operator", [&](auto &, auto &v) { c.op = ParseOperatorKind(v); }},
      {"mg.levels", [&](auto &k, auto &v) { c.levels = static_cast<int>(ToLong(k, v)); }},
      {"mg.smoother_degree",
       [&](auto &k, auto &v) { c.mg.smoother_degree = static_cast<int>(ToLong(k, v)); }},
      {"mg.smoother_sweeps",
       [&](auto &k, auto &v) { c.mg.smoother_sweeps = static_cast<int>(ToLong(k, v)); }},
      {"mg.cheby_range_divisor",
       [&](auto &k, auto &v) { c.mg.cheby_range_divisor = ToDouble(k, v); }},
      {"mg.cheby_safety", [&](auto &k, auto &v) { c.mg.cheby_safety = ToDouble(k, v); }},
      {"mg.lanczos_iterations",
       [&](auto &k, auto &v) { c.mg.lanczos_iterations = static_cast<int>(ToLong(k, v)); }},
      {"mg.coarse_solver", [&](auto &k, auto &v) { c.mg.coarse_solver = ToCoarseSolver(k, v); }},
      {"mg.coarse_direct_max",
       [&](auto &k, auto &v) { c.mg.coarse_direct_max = static_cast<Index>(ToLong(k, v)); }},
      {"mg.coarse_tol", [&](auto &k, auto &v) { c.mg.coarse_tol = ToDouble(k, v); }},
      {"mg.rtree_min",
       [&](auto &k, auto &v) { c.order.min_entries = static_cast<int>(ToLong(k, v)); }},
      {"mg.rtree_max",
       [&](auto &k, auto &v) { c.order.max_entries = static_cast<int>(ToLong(k, v)); }},
      {"output.probes",
       [&](auto &k, auto &v)
       {
         c.probes.clear();
         for (const auto &g : ToGroups(k, v))
         {
           c.probes.push_back(ToPoint(k, g, 0, g.size()));
         }
       }},
      {"output.snapshot_every",
       [&](auto &k, auto &v) { c.snapshot_every = static_cast<int>(ToLong(k, v)); }},
      {"output.dir", [&](auto &, auto &v) { c.out_dir = v; }},
      {"run.diffusion_only", [&](auto &k, auto &v) { c.diffusion_only = ToBool(k, v); }},
      {"run.seed",
       [&](auto &k, auto &v)
       {
         c.seed = static_cast<std::uint64_t>(ToLong(k, v));
         c.mg.seed = c.seed;
       }},
  };

  for (const auto &[key, value] : settings)
  {
    if (key.rfind("ionic.", 0) == 0)
    {
      c.ionic_parameters[key.substr(6)] = ToDouble(key, value);
      continue;
    }
    const auto it = setters.find(key);
    if (it == setters.end())
    {
      throw ConfigError("Unknown configuration key \"" + key + "\"");
    }
    try
    {
      it->second(key, value);
    }
    catch (const ConfigError &)
    {
      throw;
    }
    catch (const std::invalid_argument &e)
    {
      throw ConfigError("Key " + key + ": " + e.what());
    }
  }
  try
  {
    c.Validate();
  }
  catch (const std::invalid_argument &e)
  {
    throw ConfigError(e.what());
  }
  return c;
}

SimulationConfig LoadConfig(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw ConfigError("Cannot open configuration file " + path);
  }
  return ConfigFromSettings(ParseIni(in));
}

std::string EchoConfig(const SimulationConfig &c)
{
  std::ostringstream out;
  const int dim = c.mesh.dim;
  out << "mesh.dim = " << dim << "\n";
  out << "mesh.lo = " << Coords(c.mesh.lo, dim) << "\n";
  out << "mesh.hi = " << Coords(c.mesh.hi, dim) << "\n";
  out << "mesh.subdivisions =";
  for (int d = 0; d < dim; d++)
  {
    out << ' ' << c.mesh.subdivisions[d];
  }
  out << "\n";
  if (!c.mesh.file.empty())
  {
    out << "mesh.file = " << c.mesh.file << "\n";
  }
  out << "discretization.degree = " << c.degree << "\n";
  out << "time.dt = " << Num(c.constants.dt) << "\n";
  out << "time.T_final = " << Num(c.constants.T_final) << "\n";
  out << "time.num_steps = " << c.num_steps << "\n";
  out << "model.name = " << c.model << "\n";
  out << "model.chi_m = " << Num(c.constants.chi_m) << "\n";
  out << "model.C_m = " << Num(c.constants.C_m) << "\n";
  IonicModel m = IonicModel::FromName(c.model);
  for (const auto &[key, value] : c.ionic_parameters)
  {
    m.SetParameter(key, value);
  }
  for (const auto &name : m.ParameterNames())
  {
    out << "ionic." << name << " = " << Num(m.GetParameter(name)) << "\n";
  }
  const auto &s = c.conductivity;
  out << "conductivity.kind = "
      << (s.kind == ConductivitySpec::Kind::Isotropic ? "isotropic" : "orthotropic") << "\n";
  out << "conductivity.sigma = " << Num(s.sigma) << "\n";
  out << "conductivity.sigma_l = " << Num(s.sigma_l) << "\n";
  out << "conductivity.sigma_t = " << Num(s.sigma_t) << "\n";
  out << "conductivity.sigma_n = " << Num(s.sigma_n) << "\n";
  out << "conductivity.fiber = " << s.fiber << "\n";
  out << "conductivity.helix_min_deg = " << Num(s.helix_min_deg) << "\n";
  out << "conductivity.helix_max_deg = " << Num(s.helix_max_deg) << "\n";
  out << "stimulus.amplitude = " << Num(c.stimulus.amplitude) << "\n";
  out << "stimulus.t_start = " << Num(c.stimulus.t_start) << "\n";
  out << "stimulus.t_end = " << Num(c.stimulus.t_end) << "\n";
  std::string boxes, spheres;
  for (const auto &r : c.stimulus.regions)
  {
    if (r.shape == StimulusRegion::Shape::Box)
    {
      boxes += (boxes.empty() ? "" : "; ") + Coords(r.box.lo, dim) + " " + Coords(r.box.hi, dim);
    }
    else
    {
      spheres += (spheres.empty() ? "" : "; ") + Coords(r.center, dim) + " " + Num(r.radius);
    }
  }
  out << "stimulus.boxes = " << boxes << "\n";
  out << "stimulus.spheres = " << spheres << "\n";
  out << "solver.operator = " << ToString(c.op) << "\n";
  out << "solver.precond = " << ToString(c.precond) << "\n";
  out << "solver.abs_tol = " << Num(c.solver.abs_tol) << "\n";
  out << "solver.rel_tol = " << Num(c.solver.rel_tol) << "\n";
  out << "solver.max_iter = " << c.solver.max_iter << "\n";
  out << "solver.flexible = " << (c.solver.flexible ? "on" : "off") << "\n";
  out << "mg.levels = " << c.levels << "\n";
  out << "mg.smoother_degree = " << c.mg.smoother_degree << "\n";
  out << "mg.smoother_sweeps = " << c.mg.smoother_sweeps << "\n";
  out << "mg.cheby_range_divisor = " << Num(c.mg.cheby_range_divisor) << "\n";
  out << "mg.cheby_safety = " << Num(c.mg.cheby_safety) << "\n";
  out << "mg.lanczos_iterations = " << c.mg.lanczos_iterations << "\n";
  out << "mg.coarse_solver = " << CoarseSolverString(c.mg.coarse_solver) << "\n";
  out << "mg.coarse_direct_max = " << c.mg.coarse_direct_max << "\n";
  out << "mg.coarse_tol = " << Num(c.mg.coarse_tol) << "\n";
  out << "mg.rtree_min = " << c.order.min_entries << "\n";
  out << "mg.rtree_max = " << c.order.max_entries << "\n";
  std::string probes;
  for (const auto &p : c.probes)
  {
    probes += (probes.empty() ? "" : "; ") + Coords(p, dim);
  }
  out << "output.probes = " << probes << "\n";
  out << "output.snapshot_every = " << c.snapshot_every << "\n";
  out << "output.dir = " << c.out_dir << "\n";
  out << "run.diffusion_only = " << (c.diffusion_only ? "on" : "off") << "\n";
  out << "run.seed = " << c.seed << "\n";
  return out.str();
}

}  // namespace polymg
