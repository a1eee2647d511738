#pragma once

// Reproducible random parameters standing in for trained weights.

#include <cstdint>
#include <span>
#include <vector>

#include "tbn/network.hpp"
#include "tbn/sparse_tensor.hpp"

namespace tbn::fixtures {

/// Activation density used when nothing else is specified.
inline constexpr double kDefaultDensity = 0.462;

std::vector<TernaryTensor> synthetic_inputs(Shape shape, int count, double density, std::uint64_t seed);

/// Random +-1 weights, unit BN factors and, layer by layer, one threshold pair per
/// quantize layer chosen so the probe batch lands near `target_density`.
void generate_params(NetworkConfig& net, std::span<const TernaryTensor> probe, std::uint64_t seed,
                     double target_density = kDefaultDensity);

/// Mean output density of each quantize layer over the probe batch, in layer order.
std::vector<double> quantize_densities(const NetworkConfig& net, std::span<const TernaryTensor> probe);

/// Integer pair (pos >= 1, neg <= -1), symmetric or one step off, whose
/// v > pos || v < neg fraction is closest to `target_density`.
QuantThreshold fit_threshold(std::span<const std::int16_t> values, double target_density);

} // namespace tbn::fixtures
