#include "tbn/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tbn/error.hpp"
#include "tbn/golden.hpp"

namespace tbn::fixtures {

std::vector<TernaryTensor> synthetic_inputs(Shape shape, int count, double density, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<TernaryTensor> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out.push_back(TernaryTensor::random(shape, density, rng));
    return out;
}

QuantThreshold fit_threshold(std::span<const std::int16_t> values, double target_density) {
    require(!values.empty(), ErrorKind::Calibration, "threshold calibration needs probe values");
    std::vector<int> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    auto above = [&](int t) { return sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t); };
    auto below = [&](int t) { return std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin(); };
    const int top = std::max({1, std::abs(sorted.front()), std::abs(sorted.back())});
    QuantThreshold best{1, -1};
    double best_err = 2.0;
    // Symmetric pairs first, then pairs one step off symmetric; ties keep the earlier candidate.
    for (int skew = 0; skew <= 1; ++skew)
        for (int t = 1; t <= top; ++t)
            for (auto [pos, neg] : {std::pair{t, -t - skew}, std::pair{t + skew, -t}}) {
                const double err = std::abs(static_cast<double>(above(pos) + below(neg)) / n - target_density);
                if (err < best_err - 1e-12) {
                    best_err = err;
                    best = {static_cast<std::int16_t>(pos), static_cast<std::int16_t>(neg)};
                }
            }
    return best;
}

void generate_params(NetworkConfig& net, std::span<const TernaryTensor> probe, std::uint64_t seed,
                     double target_density) {
    net.validate(false);
    std::mt19937_64 rng(seed);
    for (LayerSpec& l : net.layers) {
        if (l.kind == LayerKind::Conv3x3)
            l.weights = std::make_shared<BinaryWeightTensor>(
                BinaryWeightTensor::random(3, 3, l.in_shape.channels, l.out_shape.channels, rng));
        else if (l.kind == LayerKind::FullyConnected)
            l.weights = std::make_shared<BinaryWeightTensor>(BinaryWeightTensor::random(
                1, 1, static_cast<int>(l.in_shape.elements()), l.out_shape.channels, rng));
        else if (l.kind == LayerKind::BatchNorm)
            l.bn_factors.assign(static_cast<std::size_t>(l.in_shape.channels), kBnUnity);
        else if (l.kind == LayerKind::Quantize)
            l.thresholds.assign(static_cast<std::size_t>(l.in_shape.channels), QuantThreshold{1, -1});
    }

    // Walk the probe batch through the network, fixing each quantize layer before moving past it.
    std::vector<golden::Activation> acts(probe.begin(), probe.end());
    for (LayerSpec& l : net.layers) {
        if (l.kind == LayerKind::Quantize && !acts.empty()) {
            std::vector<std::int16_t> values;
            for (const auto& a : acts) {
                const auto& p = std::get<golden::PartialSumTensor>(a);
                values.insert(values.end(), p.values.begin(), p.values.end());
            }
            l.thresholds.assign(static_cast<std::size_t>(l.in_shape.channels), fit_threshold(values, target_density));
        }
        for (auto& a : acts) a = golden::apply_layer(l, a);
    }
    net.validate(true);
}

std::vector<double> quantize_densities(const NetworkConfig& net, std::span<const TernaryTensor> probe) {
    std::vector<double> sums;
    for (const auto& x : probe) {
        golden::Activation a = x;
        std::size_t q = 0;
        for (const LayerSpec& l : net.layers) {
            a = golden::apply_layer(l, a);
            if (l.kind == LayerKind::Quantize) {
                if (sums.size() <= q) sums.push_back(0.0);
                sums[q++] += std::get<TernaryTensor>(a).density();
            }
        }
    }
    for (double& s : sums) s /= static_cast<double>(probe.size());
    return sums;
}

} // namespace tbn::fixtures
