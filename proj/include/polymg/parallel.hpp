// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POLYMG_PARALLEL_HPP
#define POLYMG_PARALLEL_HPP

#include <algorithm>
#include <span>
#include <thread>
#include <vector>
#include "polymg/common.hpp"

namespace polymg
{

// Number of worker threads used by data-parallel kernels. Defaults to the hardware
// concurrency and is capped by the POLYMG_THREADS environment variable.
int WorkerThreads();

// Override the worker count (mainly for tests); a value < 1 restores the default.
void SetWorkerThreads(int n);

// Run body(begin, end) over disjoint chunks of [first, last). Each index is visited by
// exactly one invocation, so kernels with per-index output ownership stay race-free.
template <typename Body>
void ParallelFor(Index first, Index last, Body &&body, Index min_chunk = 4096)
{
  const Index n = last - first;
  const int threads = WorkerThreads();
  if (n <= 0)
  {
    return;
  }
  if (threads <= 1 || n < 2 * min_chunk)
  {
    body(first, last);
    return;
  }
  const Index chunks = std::min<Index>(threads, n / min_chunk);
  std::vector<std::thread> pool;
  pool.reserve(chunks - 1);
  for (Index c = 1; c < chunks; c++)
  {
    const Index b = first + (n * c) / chunks, e = first + (n * (c + 1)) / chunks;
    pool.emplace_back([&body, b, e]() { body(b, e); });
  }
  body(first, first + n / chunks);
  for (auto &t : pool)
  {
    t.join();
  }
}

// Deterministic reductions: blocked pairwise summation whose association order depends
// only on the vector length.
double Dot(std::span<const double> x, std::span<const double> y);
double Norm2(std::span<const double> x);
double Sum(std::span<const double> x);

// y += a * x
void Axpy(double a, std::span<const double> x, std::span<double> y);

// y = x + b * y
void Xpby(std::span<const double> x, double b, std::span<double> y);

}  // namespace polymg

#endif  // POLYMG_PARALLEL_HPP
