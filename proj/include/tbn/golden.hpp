#pragma once

// Bit-exact reference model of ternary-input / binary-weight inference. This is
// the oracle the cycle simulator is checked against.

#include <cstdint>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "tbn/network.hpp"
#include "tbn/sparse_tensor.hpp"

namespace tbn::golden {

/// Signed 16-bit accumulator tensor, indexed like TernaryTensor.
struct PartialSumTensor {
    Shape shape;
    std::vector<std::int16_t> values;

    PartialSumTensor() = default;
    explicit PartialSumTensor(Shape s) : shape(s), values(s.elements(), 0) {}

    std::size_t index(int row, int col, int ch) const noexcept {
        return (static_cast<std::size_t>(row) * shape.width + col) * shape.channels + ch;
    }
    std::int16_t at(int row, int col, int ch) const noexcept { return values[index(row, col, ch)]; }

    friend bool operator==(const PartialSumTensor&, const PartialSumTensor&) = default;
};

/// Product of a non-zero ternary input and a binary weight, both given as sign bits (1 = +1).
constexpr int xor_mac(bool input_sign_bit, bool weight_bit) { return (input_sign_bit ^ weight_bit) ? -1 : 1; }

/// Narrows an accumulator to 16 bits; leaving the range is an overflow error.
std::int16_t checked_psum(std::int64_t v);

/// Zero padding of one, stride one. Throws on partial-sum overflow.
PartialSumTensor ternary_conv3x3(const TernaryTensor& x, const BinaryWeightTensor& w);

/// Input flattened in channel-group-major traversal order; output shape 1x1xC_out.
PartialSumTensor fully_connected(const TernaryTensor& x, const BinaryWeightTensor& w);

/// 2x2 stride-2 max pooling followed by ReLU.
PartialSumTensor pool_relu(const PartialSumTensor& x);

/// Q8.8 product rounded half-to-even, saturated to 16 bits. Saturations are added to `saturations`.
std::int16_t bn_scale(std::int16_t x, std::int16_t factor, std::size_t* saturations = nullptr);
PartialSumTensor batch_norm(const PartialSumTensor& x, std::span<const std::int16_t> factors,
                            std::size_t* saturations = nullptr);

/// +1 above pos, -1 below neg, 0 otherwise (boundaries map to 0).
TernaryTensor quantize_ternary(const PartialSumTensor& x, std::span<const QuantThreshold> thresholds);

using Activation = std::variant<TernaryTensor, PartialSumTensor>;

Activation apply_layer(const LayerSpec& layer, const Activation& in, std::size_t* saturations = nullptr);

struct InferenceResult {
    std::vector<std::int32_t> logits;
    int label = 0;
    std::size_t bn_saturations = 0;
    /// Ternary input of every conv / FC layer, in layer order, when recording was requested.
    std::vector<std::pair<std::size_t, TernaryTensor>> layer_inputs;
};

/// Lowest index wins ties.
int argmax(std::span<const std::int32_t> logits);

InferenceResult infer(const NetworkConfig& net, const TernaryTensor& x, bool record_inputs = false);

} // namespace tbn::golden
