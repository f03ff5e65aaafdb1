// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POLYMG_COMMON_HPP
#define POLYMG_COMMON_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace polymg
{

// Entity and degree-of-freedom indices.
using Index = std::int32_t;

// Offsets into nonzero arrays (may exceed 2^31 for large 3D problems).
using Offset = std::int64_t;

// Points and tensors always carry three components; unused trailing components are zero
// in two dimensions.
using Point = std::array<double, 3>;
using Tensor = std::array<std::array<double, 3>, 3>;

using Vector = std::vector<double>;

inline Tensor IdentityTensor(int dim, double scale = 1.0)
{
  Tensor t{};
  for (int i = 0; i < dim; i++)
  {
    t[i][i] = scale;
  }
  return t;
}

}  // namespace polymg

#endif  // POLYMG_COMMON_HPP
