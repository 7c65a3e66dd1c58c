#pragma once

#include <cmath>
#include <random>

#include "choosiow/choosiow.hpp"

namespace bench {

// Square market with gains uniform on [0, 5] and log-uniform populations on [1, 1e6].
inline choosiow::ValidatedMarket square_market(Eigen::Index n, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> gain(0.0, 5.0);
  std::uniform_real_distribution<double> log_nu(0.0, std::log(1e6));
  choosiow::Matrix pi(n, n);
  for (Eigen::Index k = 0; k < pi.size(); ++k) pi.data()[k] = gain(rng);
  choosiow::Vector nu(2 * n);
  for (Eigen::Index k = 0; k < nu.size(); ++k) nu(k) = std::exp(log_nu(rng));
  return choosiow::validate_market(choosiow::GainsMatrix(pi), choosiow::PopulationVector(nu));
}

}  // namespace bench
