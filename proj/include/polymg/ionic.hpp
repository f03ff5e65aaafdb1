// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POLYMG_IONIC_HPP
#define POLYMG_IONIC_HPP

#include <array>
#include <string>
#include <vector>

namespace polymg
{

// (1 + tanh(eps (z - z0))) / 2
double SmoothHeaviside(double z, double z0, double eps);

// Classical Heaviside with H(z0) = 1/2.
double SharpHeaviside(double z, double z0);

struct FhnParameters
{
  double kappa = 19.5;
  double a = 0.013;
  double epsilon = 40.0;
  double gamma = 0.1;
};

// Time constants in seconds, thresholds dimensionless.
struct BoParameters
{
  double tau_o1 = 6e-3;
  double tau_o2 = 6e-3;
  double tau_so1 = 4.3e-2;
  double tau_so2 = 2e-4;
  double tau_si = 2.8723e-3;
  double tau_fi = 1.1e-4;
  double tau_1plus = 1.4506e-3;
  double tau_1p = 6e-2;
  double tau_1pp = 1.15;
  double tau_2p = 7e-2;
  double tau_2pp = 2e-2;
  double tau_3p = 2.7342e-3;
  double tau_3pp = 3e-3;
  double tau_2plus = 0.28;
  double tau_2inf = 7e-2;
  double k2 = 65.0;
  double k3 = 2.0994;
  double kso = 2.0;
  double w_inf_star = 0.94;
  double V1 = 0.3;
  double V1m = 0.015;
  double V2 = 0.015;
  double V2m = 0.03;
  double V3 = 0.9087;
  double V_hat = 1.58;
  double Vo = 6e-3;
  double Vso = 0.65;
};

double FhnIion(double u, double w, const FhnParameters &p);
double FhnGatingRhs(double u, double w, const FhnParameters &p);

double BoIion(double u, double w0, double w1, double w2, const BoParameters &p);
std::array<double, 3> BoGatingRhs(double u, double w0, double w1, double w2,
                                  const BoParameters &p);

// Gating right-hand side dw/dt = c w + s, linear in w for a frozen potential.
struct LinearRate
{
  double c = 0.0;
  double s = 0.0;
};

// Closed-form BDF2 and backward-Euler solves of dw/dt = c w + s.
double GatingStepBdf2(const LinearRate &r, double w_n, double w_nm1, double dt);
double GatingStepBackwardEuler(const LinearRate &r, double w_n, double dt);

// 85.7 u - 84
double ToMillivolts(double u);

//
// Phenomenological membrane model with S gating variables.
//
class IonicModel
{
public:
  enum class Kind
  {
    FitzHughNagumo,
    BuenoOrovio
  };

  explicit IonicModel(Kind kind);

  // "fhn" or "bo" (also the long names); throws invalid_argument otherwise.
  static IonicModel FromName(const std::string &name);

  Kind GetKind() const { return kind; }
  std::string Name() const;
  int NumGating() const { return kind == Kind::FitzHughNagumo ? 1 : 3; }

  // Rest potential and gating state.
  double RestPotential() const { return 0.0; }
  std::vector<double> RestGating() const;

  // Throws invalid_argument for an unknown name.
  void SetParameter(const std::string &name, double value);
  double GetParameter(const std::string &name) const;
  std::vector<std::string> ParameterNames() const;

  // Throws if a time constant or a rate denominator is not positive.
  void Validate() const;

  const FhnParameters &Fhn() const { return fhn; }
  const BoParameters &Bo() const { return bo; }

  // w points to NumGating() values.
  double Iion(double u, const double *w) const;
  // Writes NumGating() rates of the linear gating dynamics at potential u.
  void Rates(double u, LinearRate *rates) const;

private:
  Kind kind;
  FhnParameters fhn;
  BoParameters bo;
};

//
// Space-clamped single cell: C du/dt = -I_ion(u, w) + I_app(t), integrated with the same
// extrapolated BDF2 scheme as the tissue solver (backward-Euler bootstrap).
//
struct SingleCellTrace
{
  std::vector<double> time;
  std::vector<double> u;
  std::vector<std::vector<double>> w;
};

SingleCellTrace SimulateSingleCell(const IonicModel &model, double C_m, double amplitude,
                                   double stim_duration, double dt, double T_final);

}  // namespace polymg

#endif  // POLYMG_IONIC_HPP
