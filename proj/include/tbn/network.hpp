#pragma once

// Layer descriptors, the network configuration file and the on-chip memory budget.
//
// Config file format (UTF-8, '#' starts a comment):
//
//   class_count = 10
//
//   [layer]
//   name = cv1
//   kind = conv3x3            # conv3x3 | fully_connected | pool_relu | batch_norm | quantize
//   in = 32 32 2              # H W C
//   out = 32 32 64
//   weights = cv1.tbnw        # conv3x3 / fully_connected
//   bn_factors = bn1.tbnp     # batch_norm, Q8.8 per channel
//   thresholds = q1.tbnp      # quantize, (pos, neg) per channel
//
// Parameter paths are relative to the config file's directory.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tbn/sparse_tensor.hpp"

namespace tbn {

enum class LayerKind { Conv3x3, FullyConnected, PoolRelu, BatchNorm, Quantize };

const char* to_string(LayerKind k);
LayerKind parse_layer_kind(const std::string& s);

struct QuantThreshold {
    std::int16_t pos = 0;
    std::int16_t neg = 0;
    friend bool operator==(const QuantThreshold&, const QuantThreshold&) = default;
};

/// Q8.8 representation of 1.0.
inline constexpr std::int16_t kBnUnity = 256;

struct LayerSpec {
    std::string name;
    LayerKind kind = LayerKind::Conv3x3;
    Shape in_shape;
    Shape out_shape;

    std::string weight_ref;
    std::string bn_ref;
    std::string threshold_ref;

    std::shared_ptr<const BinaryWeightTensor> weights;
    std::vector<std::int16_t> bn_factors;
    std::vector<QuantThreshold> thresholds;

    bool consumes_ternary() const { return kind == LayerKind::Conv3x3 || kind == LayerKind::FullyConnected; }
    bool produces_ternary() const { return kind == LayerKind::Quantize; }
};

struct NetworkConfig {
    std::vector<LayerSpec> layers;
    int class_count = 0;

    Shape input_shape() const { return layers.front().in_shape; }

    /// Shape chaining, ternary/partial-sum alternation, final FC width and (when
    /// `require_params`) presence and sizes of every parameter set.
    void validate(bool require_params = true) const;
};

/// Six 3x3 conv layers, three pool/BN/quantize blocks and two FC layers over a 32x32x2 input.
NetworkConfig default_topology(int class_count = 10);

NetworkConfig parse_network(const std::string& text);
NetworkConfig load_network(const std::filesystem::path& config_path, bool load_params = true);
std::string format_network(const NetworkConfig& net);

/// Loads weights / BN factors / thresholds named by each layer's refs, relative to `base_dir`.
/// A missing or malformed file raises an error naming the layer.
void load_params(NetworkConfig& net, const std::filesystem::path& base_dir);
/// Writes every attached parameter set to its ref path under `base_dir`.
void save_params(const NetworkConfig& net, const std::filesystem::path& base_dir);

struct MemoryBudget {
    std::uint64_t weight_bits = 0;
    std::uint64_t param_bits = 0;      // BN factors and thresholds, 16 bits each
    std::uint64_t activation_bits = 0; // worst-case live map+value bits across one layer boundary
    std::uint64_t tmp_bits = 0;        // partial-sum rows in flight

    std::uint64_t total_bits() const { return weight_bits + param_bits + activation_bits + tmp_bits; }
    double total_kib() const { return static_cast<double>(total_bits()) / 8.0 / 1024.0; }
};

MemoryBudget memory_budget(const NetworkConfig& net);

} // namespace tbn
