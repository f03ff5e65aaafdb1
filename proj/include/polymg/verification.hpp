// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POLYMG_VERIFICATION_HPP
#define POLYMG_VERIFICATION_HPP

#include <string>
#include <vector>

namespace polymg
{

struct CheckResult
{
  std::string name;
  bool passed = false;
  std::string detail;
};

// Fast invariant suite over small meshes: mesh measures, R-tree and hierarchy structure,
// operator symmetry and kernels, matrix-free equivalence, Galerkin chain, V-cycle
// symmetry, solver sanity and ionic model fixed points.
std::vector<CheckResult> RunVerification(unsigned long long seed = 42);

}  // namespace polymg

#endif  // POLYMG_VERIFICATION_HPP
