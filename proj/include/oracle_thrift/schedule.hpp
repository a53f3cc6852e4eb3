#pragma once
// Doubly-logarithmic epoch grid for the scheduled (batched) algorithms.

#include <cmath>
#include <cstdint>
#include <vector>

#include "oracle_thrift/core.hpp"

namespace oracle_thrift {

/// Epoch tau (1-based) covers rounds [boundaries[tau-1], boundaries[tau]).
struct EpochGrid {
  std::uint64_t horizon = 0;
  std::size_t requested_epochs = 0;
  double eta = 0.0;
  std::vector<std::uint64_t> boundaries;

  std::size_t epochs() const noexcept { return boundaries.empty() ? 0 : boundaries.size() - 1; }
  std::uint64_t start(std::size_t tau) const { return boundaries.at(tau - 1); }
  std::uint64_t end(std::size_t tau) const { return boundaries.at(tau); }
  std::uint64_t length(std::size_t tau) const { return end(tau) - start(tau); }
};

/// eta = T^(1 / (2 - 2^(1-M))).
inline double grid_eta(std::uint64_t horizon, std::size_t epochs) {
  const double exponent = 1.0 / (2.0 - std::pow(2.0, 1.0 - static_cast<double>(epochs)));
  return std::pow(static_cast<double>(horizon), exponent);
}

inline std::size_t default_epochs(std::uint64_t horizon) {
  if (horizon < 4) throw InvalidArgument("horizon must be at least 4");
  const double ll = std::log2(std::log2(static_cast<double>(horizon)));
  const auto m = static_cast<std::size_t>(std::ceil(ll - 1e-12)) + 1;
  return std::max<std::size_t>(2, m);
}

/// b_0 = 1, b_1 = ceil(eta), b_tau = ceil(eta * sqrt(b_{tau-1})), clamped to
/// T + 1; the last boundary is forced to T + 1 and repeated boundaries are
/// collapsed.
inline EpochGrid build_grid(std::uint64_t horizon, std::size_t epochs) {
  if (horizon < 4) throw InvalidArgument("horizon must be at least 4");
  if (epochs < 2 || static_cast<double>(epochs) > std::log2(static_cast<double>(horizon)) + 1e-12) {
    throw InvalidArgument("epoch count must be in [2, log2(T)]");
  }
  EpochGrid g;
  g.horizon = horizon;
  g.requested_epochs = epochs;
  g.eta = grid_eta(horizon, epochs);
  const std::uint64_t last = horizon + 1;
  // Relative slack so that values which are integers in exact arithmetic
  // are not pushed up by one through rounding noise.
  auto ceil_tight = [](double x) { return static_cast<std::uint64_t>(std::ceil(x - 1e-9 * x)); };

  g.boundaries.push_back(1);
  std::uint64_t prev = 1;
  for (std::size_t tau = 1; tau < epochs; ++tau) {
    const double target = tau == 1 ? g.eta : g.eta * std::sqrt(static_cast<double>(prev));
    std::uint64_t b = std::min(ceil_tight(target), last);
    if (b <= g.boundaries.back()) continue;
    if (b == last) break;
    g.boundaries.push_back(b);
    prev = b;
  }
  g.boundaries.push_back(last);
  return g;
}

}  // namespace oracle_thrift
