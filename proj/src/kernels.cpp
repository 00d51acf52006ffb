#include "dhrad/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dhrad::kernels
{

int max_threads()
{
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::vector<double> linspace(double a, double b, Index count)
{
  std::vector<double> xs(static_cast<std::size_t>(count));
  if (count == 1)
    xs[0] = a;
  for (Index i = 0; i < count && count > 1; ++i)
    xs[static_cast<std::size_t>(i)] = a + (b - a) * double(i) / double(count - 1);
  return xs;
}

std::vector<double> sigma_sweep(const StateSpace &ss, const std::vector<double> &omegas, Exec exec)
{
  return map<double>(
    Index(omegas.size()),
    [&](Index i) { return ss.sigma(omegas[std::size_t(i)], false).sigma; }, exec);
}

std::vector<double> sigma_sweep(const FullTransfer &tf, const std::vector<double> &omegas,
                                Exec exec)
{
  return map<double>(
    Index(omegas.size()),
    [&](Index i) { return tf.sigma(omegas[std::size_t(i)], false).sigma; }, exec);
}

}  // namespace dhrad::kernels
