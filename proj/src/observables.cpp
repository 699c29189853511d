#include "softsqueeze/observables.hpp"

#include <cmath>

namespace softsqueeze {

double Moments::bloch_length() const {
  return std::sqrt(first[0] * first[0] + first[1] * first[1] + first[2] * first[2]);
}

void ObservableSeries::push(double t, const Moments& m, const std::array<double, 3>& err) {
  times.push_back(t);
  moments.push_back(m);
  first_err.push_back(err);
}

}  // namespace softsqueeze

namespace softsqueeze {

Moments moments_from_sums(const TrajectoryBlocks::Sums& sums, double count, std::size_t n_sites,
                          SecondMomentEstimator estimator) {
  Moments m;
  const double inv = 1.0 / count;
  for (int a = 0; a < 3; ++a) m.first[a] = sums[a] * inv;
  for (int p = 0; p < 6; ++p) m.second[p] = sums[3 + p] * inv;
  if (estimator == SecondMomentEstimator::diagonal_corrected)
    for (int a = 0; a < 3; ++a) m.second[a] += 0.25 * static_cast<double>(n_sites) - sums[9 + a] * inv;
  return m;
}

}  // namespace softsqueeze
