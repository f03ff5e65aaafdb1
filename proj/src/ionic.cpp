// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#include "polymg/ionic.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace polymg
{

namespace
{

using FhnField = double FhnParameters::*;
using BoField = double BoParameters::*;

const std::vector<std::pair<std::string, FhnField>> &FhnTable()
{
  static const std::vector<std::pair<std::string, FhnField>> table = {
      {"kappa", &FhnParameters::kappa},
      {"a", &FhnParameters::a},
      {"epsilon", &FhnParameters::epsilon},
      {"gamma", &FhnParameters::gamma},
  };
  return table;
}

const std::vector<std::pair<std::string, BoField>> &BoTable()
{
  static const std::vector<std::pair<std::string, BoField>> table = {
      {"tau_o1", &BoParameters::tau_o1},
      {"tau_o2", &BoParameters::tau_o2},
      {"tau_so1", &BoParameters::tau_so1},
      {"tau_so2", &BoParameters::tau_so2},
      {"tau_si", &BoParameters::tau_si},
      {"tau_fi", &BoParameters::tau_fi},
      {"tau_1plus", &BoParameters::tau_1plus},
      {"tau_1p", &BoParameters::tau_1p},
      {"tau_1pp", &BoParameters::tau_1pp},
      {"tau_2p", &BoParameters::tau_2p},
      {"tau_2pp", &BoParameters::tau_2pp},
      {"tau_3p", &BoParameters::tau_3p},
      {"tau_3pp", &BoParameters::tau_3pp},
      {"tau_2plus", &BoParameters::tau_2plus},
      {"tau_2inf", &BoParameters::tau_2inf},
      {"k2", &BoParameters::k2},
      {"k3", &BoParameters::k3},
      {"kso", &BoParameters::kso},
      {"w_inf_star", &BoParameters::w_inf_star},
      {"V1", &BoParameters::V1},
      {"V1m", &BoParameters::V1m},
      {"V2", &BoParameters::V2},
      {"V2m", &BoParameters::V2m},
      {"V3", &BoParameters::V3},
      {"V_hat", &BoParameters::V_hat},
      {"Vo", &BoParameters::Vo},
      {"Vso", &BoParameters::Vso},
  };
  return table;
}

// Gate values shared by the currents and the gating rates.
struct BoGates
{
  double h_v1, h_v1m, h_v2, h_v2m_smooth, h_vo, h_vso_smooth, h_v3_smooth;
};

BoGates EvaluateGates(double u, const BoParameters &p)
{
  BoGates g;
  g.h_v1 = SharpHeaviside(u, p.V1);
  g.h_v1m = SharpHeaviside(u, p.V1m);
  g.h_v2 = SharpHeaviside(u, p.V2);
  g.h_v2m_smooth = SmoothHeaviside(u, p.V2m, p.k2);
  g.h_vo = SharpHeaviside(u, p.Vo);
  g.h_vso_smooth = SmoothHeaviside(u, p.Vso, p.kso);
  g.h_v3_smooth = SmoothHeaviside(u, p.V3, p.k3);
  return g;
}

void BoRates(double u, const BoParameters &p, LinearRate *r)
{
  const BoGates g = EvaluateGates(u, p);
  const double a0 = (1.0 - g.h_v1) / (g.h_v1m * (p.tau_1pp - p.tau_1p) + p.tau_1p);
  const double a1 = (1.0 - g.h_v2) / (g.h_v2m_smooth * (p.tau_2pp - p.tau_2p) + p.tau_2p);
  const double a2 = 1.0 / (g.h_v2 * (p.tau_3pp - p.tau_3p) + p.tau_3p);
  const double b0 = -g.h_v1 / p.tau_1plus;
  const double b1 = -g.h_v2 / p.tau_2plus;
  const double w0_inf = 1.0 - g.h_v1m;
  const double w1_inf =
      g.h_vo * (p.w_inf_star - 1.0 + u / p.tau_2inf) + 1.0 - u / p.tau_2inf;
  const double w2_inf = g.h_v3_smooth;
  r[0] = {b0 - a0, a0 * w0_inf};
  r[1] = {b1 - a1, a1 * w1_inf};
  r[2] = {-a2, a2 * w2_inf};
}

}  // namespace

double SmoothHeaviside(double z, double z0, double eps)
{
  return 0.5 * (1.0 + std::tanh(eps * (z - z0)));
}

double SharpHeaviside(double z, double z0)
{
  if (z > z0)
  {
    return 1.0;
  }
  return z < z0 ? 0.0 : 0.5;
}

double FhnIion(double u, double w, const FhnParameters &p)
{
  return p.kappa * u * (u - p.a) * (u - 1.0) + w;
}

double FhnGatingRhs(double u, double w, const FhnParameters &p)
{
  return p.epsilon * (u - p.gamma * w);
}

double BoIion(double u, double w0, double w1, double w2, const BoParameters &p)
{
  const BoGates g = EvaluateGates(u, p);
  const double i_fi = -g.h_v1 * (u - p.V1) * (p.V_hat - u) * w0 / p.tau_fi;
  const double i_si = -g.h_v2 * w1 * w2 / p.tau_si;
  const double i_so = (1.0 - g.h_v2) * (u - p.Vo) / (g.h_vo * (p.tau_o2 - p.tau_o1) + p.tau_o1) +
                      g.h_v2 / (g.h_vso_smooth * (p.tau_so2 - p.tau_so1) + p.tau_so1);
  return i_fi + i_si + i_so;
}

std::array<double, 3> BoGatingRhs(double u, double w0, double w1, double w2,
                                  const BoParameters &p)
{
  LinearRate r[3];
  BoRates(u, p, r);
  return {r[0].c * w0 + r[0].s, r[1].c * w1 + r[1].s, r[2].c * w2 + r[2].s};
}

double GatingStepBdf2(const LinearRate &r, double w_n, double w_nm1, double dt)
{
  // (3 w - 4 w_n + w_nm1) / (2 dt) = c w + s
  return (4.0 * w_n - w_nm1 + 2.0 * dt * r.s) / (3.0 - 2.0 * dt * r.c);
}

double GatingStepBackwardEuler(const LinearRate &r, double w_n, double dt)
{
  return (w_n + dt * r.s) / (1.0 - dt * r.c);
}

double ToMillivolts(double u)
{
  return 85.7 * u - 84.0;
}

IonicModel::IonicModel(Kind kind) : kind(kind) {}

IonicModel IonicModel::FromName(const std::string &name)
{
  if (name == "fhn" || name == "fitzhugh-nagumo" || name == "FHN")
  {
    return IonicModel(Kind::FitzHughNagumo);
  }
  if (name == "bo" || name == "bueno-orovio" || name == "BO")
  {
    return IonicModel(Kind::BuenoOrovio);
  }
  throw std::invalid_argument("Unknown ionic model \"" + name + "\"");
}

std::string IonicModel::Name() const
{
  return kind == Kind::FitzHughNagumo ? "fhn" : "bo";
}

std::vector<double> IonicModel::RestGating() const
{
  if (kind == Kind::FitzHughNagumo)
  {
    return {0.0};
  }
  return {1.0, 1.0, 0.0};
}

void IonicModel::SetParameter(const std::string &name, double value)
{
  if (kind == Kind::FitzHughNagumo)
  {
    for (const auto &[key, field] : FhnTable())
    {
      if (key == name)
      {
        fhn.*field = value;
        return;
      }
    }
  }
  else
  {
    for (const auto &[key, field] : BoTable())
    {
      if (key == name)
      {
        bo.*field = value;
        return;
      }
    }
  }
  throw std::invalid_argument("Unknown " + Name() + " parameter \"" + name + "\"");
}

double IonicModel::GetParameter(const std::string &name) const
{
  if (kind == Kind::FitzHughNagumo)
  {
    for (const auto &[key, field] : FhnTable())
    {
      if (key == name)
      {
        return fhn.*field;
      }
    }
  }
  else
  {
    for (const auto &[key, field] : BoTable())
    {
      if (key == name)
      {
        return bo.*field;
      }
    }
  }
  throw std::invalid_argument("Unknown " + Name() + " parameter \"" + name + "\"");
}

std::vector<std::string> IonicModel::ParameterNames() const
{
  std::vector<std::string> names;
  if (kind == Kind::FitzHughNagumo)
  {
    for (const auto &entry : FhnTable())
    {
      names.push_back(entry.first);
    }
  }
  else
  {
    for (const auto &entry : BoTable())
    {
      names.push_back(entry.first);
    }
  }
  return names;
}

void IonicModel::Validate() const
{
  auto require = [](bool ok, const char *what)
  {
    if (!ok)
    {
      throw std::invalid_argument(std::string("Invalid ionic parameters: ") + what);
    }
  };
  if (kind == Kind::FitzHughNagumo)
  {
    require(fhn.epsilon > 0.0, "epsilon must be positive");
    require(fhn.gamma >= 0.0, "gamma must be nonnegative");
    return;
  }
  const BoParameters &p = bo;
  for (const auto &[key, field] : BoTable())
  {
    if (key.rfind("tau_", 0) == 0)
    {
      require(p.*field > 0.0, "time constants must be positive");
    }
  }
  require(p.k2 > 0.0 && p.k3 > 0.0 && p.kso > 0.0, "smoothing slopes must be positive");
  // Each denominator is a convex combination of two positive time constants, so it stays
  // above the smaller one for any potential.
}

double IonicModel::Iion(double u, const double *w) const
{
  if (kind == Kind::FitzHughNagumo)
  {
    return FhnIion(u, w[0], fhn);
  }
  return BoIion(u, w[0], w[1], w[2], bo);
}

void IonicModel::Rates(double u, LinearRate *rates) const
{
  if (kind == Kind::FitzHughNagumo)
  {
    rates[0] = {-fhn.epsilon * fhn.gamma, fhn.epsilon * u};
    return;
  }
  BoRates(u, bo, rates);
}

SingleCellTrace SimulateSingleCell(const IonicModel &model, double C_m, double amplitude,
                                   double stim_duration, double dt, double T_final)
{
  const int S = model.NumGating();
  const long steps = std::lround(T_final / dt);
  SingleCellTrace trace;
  trace.time.reserve(steps + 1);
  trace.u.reserve(steps + 1);
  trace.w.reserve(steps + 1);

  std::vector<double> w_prev = model.RestGating(), w = w_prev, w_next(S);
  double u_prev = model.RestPotential(), u = u_prev;
  LinearRate rates[3];
  trace.time.push_back(0.0);
  trace.u.push_back(u);
  trace.w.push_back(w);
  for (long n = 0; n < steps; n++)
  {
    const double t_next = (n + 1) * dt;
    const double i_app = t_next <= stim_duration ? amplitude : 0.0;
    const double u_star = n == 0 ? u : 2.0 * u - u_prev;
    model.Rates(u_star, rates);
    for (int k = 0; k < S; k++)
    {
      w_next[k] = n == 0 ? GatingStepBackwardEuler(rates[k], w[k], dt)
                         : GatingStepBdf2(rates[k], w[k], w_prev[k], dt);
    }
    const double forcing = (i_app - model.Iion(u_star, w_next.data())) / C_m;
    const double u_next =
        n == 0 ? u + dt * forcing : (4.0 * u - u_prev + 2.0 * dt * forcing) / 3.0;
    u_prev = u;
    u = u_next;
    w_prev = w;
    w = w_next;
    trace.time.push_back(t_next);
    trace.u.push_back(u);
    trace.w.push_back(w);
  }
  return trace;
}

}  // namespace polymg
