#pragma once

#include <exception>
#include <mutex>
#include <vector>

#include "dhrad/transfer.hpp"

namespace dhrad::kernels
{

enum class Exec
{
  serial,
  parallel
};

// Reference loop; the parallel variant must produce identical values.
template <class T, class F>
std::vector<T> map_serial(Index count, F &&f)
{
  std::vector<T> out(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i)
    out[static_cast<std::size_t>(i)] = f(i);
  return out;
}

// OpenMP loop. The first exception thrown by any iteration is rethrown after the region.
template <class T, class F>
std::vector<T> map_parallel(Index count, F &&f)
{
  std::vector<T> out(static_cast<std::size_t>(count));
  std::exception_ptr err;
  std::mutex mu;
#pragma omp parallel for schedule(dynamic)
  for (Index i = 0; i < count; ++i)
  {
    try
    {
      out[static_cast<std::size_t>(i)] = f(i);
    }
    catch (...)
    {
      std::lock_guard<std::mutex> lock(mu);
      if (!err)
        err = std::current_exception();
    }
  }
  if (err)
    std::rethrow_exception(err);
  return out;
}

template <class T, class F>
std::vector<T> map(Index count, F &&f, Exec exec = Exec::parallel)
{
  if (exec == Exec::serial || count < 2)
    return map_serial<T>(count, std::forward<F>(f));
  return map_parallel<T>(count, std::forward<F>(f));
}

int max_threads();

std::vector<double> linspace(double a, double b, Index count);

// sigma_max(G(iω)) over a set of frequencies.
std::vector<double> sigma_sweep(const StateSpace &ss, const std::vector<double> &omegas,
                                Exec exec = Exec::parallel);
std::vector<double> sigma_sweep(const FullTransfer &tf, const std::vector<double> &omegas,
                                Exec exec = Exec::parallel);

}  // namespace dhrad::kernels
