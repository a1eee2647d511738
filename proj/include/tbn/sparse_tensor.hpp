#pragma once

// Ternary activation tensors, their sparsity-map / value-stream encoding and
// the 32-bit channel-first memory images the accelerator reads.

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "tbn/bits.hpp"

namespace tbn {

/// Channels per MAP/WGH word.
inline constexpr int kChannelGroup = 32;

inline constexpr int channel_groups(int channels) { return (channels + kChannelGroup - 1) / kChannelGroup; }

struct Shape {
    int height = 0;
    int width = 0;
    int channels = 0;

    std::size_t positions() const { return static_cast<std::size_t>(height) * width; }
    std::size_t elements() const { return positions() * channels; }
    bool valid() const { return height > 0 && width > 0 && channels > 0; }

    friend bool operator==(const Shape&, const Shape&) = default;
};

/// Dense activations in {-1, 0, +1}, indexed (row, col, channel) with channel fastest.
class TernaryTensor {
public:
    TernaryTensor() = default;
    explicit TernaryTensor(Shape shape);
    TernaryTensor(Shape shape, std::vector<std::int8_t> data);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t index(int row, int col, int ch) const noexcept {
        return (static_cast<std::size_t>(row) * shape_.width + col) * shape_.channels + ch;
    }
    std::int8_t at(int row, int col, int ch) const noexcept { return data_[index(row, col, ch)]; }
    void set(int row, int col, int ch, int v);

    const std::vector<std::int8_t>& data() const noexcept { return data_; }
    std::size_t nonzeros() const;
    double density() const;

    /// Uniform random tensor: each element non-zero with probability `density`, sign fair.
    static TernaryTensor random(Shape shape, double density, std::mt19937_64& rng);

    friend bool operator==(const TernaryTensor&, const TernaryTensor&) = default;

private:
    Shape shape_;
    std::vector<std::int8_t> data_;
};

enum class TraversalOrder {
    /// All positions of channel group 0 (row-major), then group 1, ...; channels ascending within a group.
    ChannelGroupMajor,
    /// Row-major positions, every channel of a position before the next position.
    PositionMajor,
};

/// Maps a traversal index onto (spatial position, channel) and back.
class Traversal {
public:
    Traversal(Shape shape, TraversalOrder order) : shape_(shape), order_(order) {}

    struct Element {
        std::size_t position; // row * width + col
        int channel;
    };

    Element element(std::size_t index) const;
    std::size_t index(std::size_t position, int channel) const;

private:
    Shape shape_;
    TraversalOrder order_;
};

/// 1-bit sparsity map plus one sign bit per non-zero (1 = +1, 0 = -1), both in traversal order.
struct SparseEncoding {
    Shape shape;
    TraversalOrder order = TraversalOrder::ChannelGroupMajor;
    BitVector map_bits;
    BitVector value_bits;

    std::size_t nonzeros() const { return value_bits.size(); }
    double density() const;
    /// Throws a format error when the map and value stream disagree.
    void validate() const;

    friend bool operator==(const SparseEncoding&, const SparseEncoding&) = default;
};

SparseEncoding encode_sparse(const TernaryTensor& t, TraversalOrder order = TraversalOrder::ChannelGroupMajor);
TernaryTensor decode_sparse(const SparseEncoding& s);

/// +-1 weights as bits (1 = +1), traversal (kernel row, kernel col, in-channel, out-channel).
class BinaryWeightTensor {
public:
    BinaryWeightTensor() = default;
    BinaryWeightTensor(int kernel_h, int kernel_w, int in_channels, int out_channels);
    BinaryWeightTensor(int kernel_h, int kernel_w, int in_channels, int out_channels, BitVector bits);

    int kernel_h() const noexcept { return kernel_h_; }
    int kernel_w() const noexcept { return kernel_w_; }
    int in_channels() const noexcept { return in_channels_; }
    int out_channels() const noexcept { return out_channels_; }

    std::size_t index(int kr, int kc, int ic, int oc) const noexcept {
        return ((static_cast<std::size_t>(kr) * kernel_w_ + kc) * in_channels_ + ic) * out_channels_ + oc;
    }
    bool bit(int kr, int kc, int ic, int oc) const noexcept { return bits_[index(kr, kc, ic, oc)]; }
    int sign(int kr, int kc, int ic, int oc) const noexcept { return bit(kr, kc, ic, oc) ? 1 : -1; }
    void set(int kr, int kc, int ic, int oc, bool positive) noexcept { bits_.set(index(kr, kc, ic, oc), positive); }

    /// 32 output-channel weight bits for one (kr, kc, ic), bit i = output channel 32*group + i.
    /// Lanes past out_channels are zero.
    std::uint32_t lane_word(int kr, int kc, int ic, int group) const;

    const BitVector& bits() const noexcept { return bits_; }

    BinaryWeightTensor negated() const;
    static BinaryWeightTensor random(int kernel_h, int kernel_w, int in_channels, int out_channels, std::mt19937_64& rng);

    friend bool operator==(const BinaryWeightTensor&, const BinaryWeightTensor&) = default;

private:
    int kernel_h_ = 0;
    int kernel_w_ = 0;
    int in_channels_ = 0;
    int out_channels_ = 0;
    BitVector bits_;
};

enum class MemoryKind { Map, Weight, Value };

/// 32-bit word image of one on-chip memory.
struct MemoryImage {
    static constexpr int kWordWidth = 32;
    MemoryKind kind = MemoryKind::Map;
    std::vector<std::uint32_t> words;
};

/// MAP layout: word (g * H * W + p) holds channels 32g..32g+31 of spatial position p; bit i = channel 32g + i.
MemoryImage pack_map_memory(const SparseEncoding& s);
/// Inverse of pack_map_memory, yielding map bits in the requested traversal order.
BitVector unpack_map_memory(const MemoryImage& image, Shape shape, TraversalOrder order);

/// WGH layout: word ((r * G_out + g) * kw + c) * C_in + ic holds output channels 32g..32g+31
/// of kernel position (r, c) and input channel ic. Each kernel row is one contiguous segment.
MemoryImage pack_weight_memory(const BinaryWeightTensor& w);
std::size_t weight_word_address(const BinaryWeightTensor& w, int kr, int group, int kc, int ic);

/// VAL layout: value bits packed 32 per word in stream order.
MemoryImage pack_value_memory(const SparseEncoding& s);

struct SizeStats {
    std::uint64_t elements = 0;
    std::uint64_t nonzeros = 0;
    std::uint64_t dense8_bits = 0;  // conventional 8-bit activations
    std::uint64_t dense2_bits = 0;  // ternary packed in 2 bits
    std::uint64_t encoded_bits = 0; // map + value stream

    double reduction_2bit_vs_8bit() const;
    double reduction_encoded_vs_2bit() const;
    double reduction_encoded_vs_8bit() const;

    SizeStats& operator+=(const SizeStats& o);
};

SizeStats size_report(const SparseEncoding& s);

} // namespace tbn
