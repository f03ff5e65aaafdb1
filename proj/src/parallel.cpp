// Copyright (c) 2026 The polymg authors
// SPDX-License-Identifier: Apache-2.0

#include "polymg/parallel.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>

namespace polymg
{

namespace
{

std::atomic<int> thread_override{0};

int DefaultThreads()
{
  int n = static_cast<int>(std::thread::hardware_concurrency());
  n = std::max(n, 1);
  if (const char *env = std::getenv("POLYMG_THREADS"))
  {
    try
    {
      const int cap = std::stoi(env);
      if (cap >= 1)
      {
        n = std::min(n, cap);
      }
    }
    catch (...)
    {
      // Ignore malformed values.
    }
  }
  return n;
}

constexpr std::size_t kBlock = 128;

template <typename F>
double PairwiseSum(std::size_t begin, std::size_t end, const F &term)
{
  const std::size_t n = end - begin;
  if (n <= kBlock)
  {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = begin;
    for (; i + 4 <= end; i += 4)
    {
      s0 += term(i);
      s1 += term(i + 1);
      s2 += term(i + 2);
      s3 += term(i + 3);
    }
    for (; i < end; i++)
    {
      s0 += term(i);
    }
    return (s0 + s1) + (s2 + s3);
  }
  // Split on a block boundary so the tree shape depends only on n.
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  const std::size_t mid = begin + (blocks / 2) * kBlock;
  return PairwiseSum(begin, mid, term) + PairwiseSum(mid, end, term);
}

}  // namespace

int WorkerThreads()
{
  static const int default_threads = DefaultThreads();
  const int o = thread_override.load();
  return o > 0 ? o : default_threads;
}

void SetWorkerThreads(int n)
{
  thread_override.store(n);
}

double Dot(std::span<const double> x, std::span<const double> y)
{
  return PairwiseSum(0, x.size(), [&](std::size_t i) { return x[i] * y[i]; });
}

double Norm2(std::span<const double> x)
{
  return std::sqrt(Dot(x, x));
}

double Sum(std::span<const double> x)
{
  return PairwiseSum(0, x.size(), [&](std::size_t i) { return x[i]; });
}

void Axpy(double a, std::span<const double> x, std::span<double> y)
{
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; i++)
  {
    y[i] += a * x[i];
  }
}

void Xpby(std::span<const double> x, double b, std::span<double> y)
{
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; i++)
  {
    y[i] = x[i] + b * y[i];
  }
}

}  // namespace polymg
