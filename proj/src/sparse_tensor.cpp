#include "tbn/sparse_tensor.hpp"

#include <algorithm>
#include <string>

#include "tbn/error.hpp"

namespace tbn {

TernaryTensor::TernaryTensor(Shape shape) : shape_(shape), data_(shape.elements(), 0) {
    require(shape.valid(), ErrorKind::Format, "tensor shape must be positive");
}

TernaryTensor::TernaryTensor(Shape shape, std::vector<std::int8_t> data) : shape_(shape), data_(std::move(data)) {
    require(shape.valid(), ErrorKind::Format, "tensor shape must be positive");
    require(data_.size() == shape.elements(), ErrorKind::Format, "tensor data length does not match shape");
    for (std::int8_t v : data_)
        require(v >= -1 && v <= 1, ErrorKind::Format, "tensor element outside {-1, 0, +1}");
}

void TernaryTensor::set(int row, int col, int ch, int v) {
    require(v >= -1 && v <= 1, ErrorKind::Format, "tensor element outside {-1, 0, +1}");
    data_[index(row, col, ch)] = static_cast<std::int8_t>(v);
}

std::size_t TernaryTensor::nonzeros() const {
    return static_cast<std::size_t>(std::count_if(data_.begin(), data_.end(), [](std::int8_t v) { return v != 0; }));
}

double TernaryTensor::density() const {
    return data_.empty() ? 0.0 : static_cast<double>(nonzeros()) / static_cast<double>(data_.size());
}

TernaryTensor TernaryTensor::random(Shape shape, double density, std::mt19937_64& rng) {
    TernaryTensor t(shape);
    std::bernoulli_distribution nz(density);
    std::bernoulli_distribution positive(0.5);
    for (auto& v : t.data_)
        v = nz(rng) ? (positive(rng) ? 1 : -1) : 0;
    return t;
}

Traversal::Element Traversal::element(std::size_t index) const {
    const std::size_t positions = shape_.positions();
    if (order_ == TraversalOrder::PositionMajor)
        return {index / shape_.channels, static_cast<int>(index % shape_.channels)};
    // Channel-group-major: groups are full 32-wide except possibly the last one.
    const std::size_t full_block = positions * kChannelGroup;
    const std::size_t group = index / full_block;
    const int base = static_cast<int>(group) * kChannelGroup;
    const int width = std::min(kChannelGroup, shape_.channels - base);
    const std::size_t rem = index - group * full_block;
    return {rem / width, base + static_cast<int>(rem % width)};
}

std::size_t Traversal::index(std::size_t position, int channel) const {
    if (order_ == TraversalOrder::PositionMajor) return position * shape_.channels + channel;
    const int group = channel / kChannelGroup;
    const int base = group * kChannelGroup;
    const int width = std::min(kChannelGroup, shape_.channels - base);
    return static_cast<std::size_t>(group) * shape_.positions() * kChannelGroup + position * width + (channel - base);
}

double SparseEncoding::density() const {
    return map_bits.empty() ? 0.0 : static_cast<double>(value_bits.size()) / static_cast<double>(map_bits.size());
}

void SparseEncoding::validate() const {
    require(shape.valid(), ErrorKind::Format, "sparse encoding has non-positive shape");
    require(map_bits.size() == shape.elements(), ErrorKind::Format,
            "sparsity map length " + std::to_string(map_bits.size()) + " does not match shape (" +
                std::to_string(shape.elements()) + " elements)");
    const std::size_t nnz = map_bits.popcount();
    require(value_bits.size() == nnz, ErrorKind::Format,
            "value stream length " + std::to_string(value_bits.size()) + " does not match " + std::to_string(nnz) +
                " set map bits");
}

SparseEncoding encode_sparse(const TernaryTensor& t, TraversalOrder order) {
    SparseEncoding s;
    s.shape = t.shape();
    s.order = order;
    const std::size_t n = s.shape.elements();
    s.map_bits = BitVector(n);
    s.value_bits.reserve(n);
    const Traversal trav(s.shape, order);
    const auto& data = t.data();
    for (std::size_t i = 0; i < n; ++i) {
        const auto e = trav.element(i);
        const std::int8_t v = data[e.position * s.shape.channels + e.channel];
        if (v != 0) {
            s.map_bits.set(i, true);
            s.value_bits.push_back(v > 0);
        }
    }
    return s;
}

TernaryTensor decode_sparse(const SparseEncoding& s) {
    s.validate();
    std::vector<std::int8_t> data(s.shape.elements(), 0);
    const Traversal trav(s.shape, s.order);
    std::size_t next = 0;
    for (std::size_t i = 0; i < s.map_bits.size(); ++i) {
        if (!s.map_bits[i]) continue;
        const auto e = trav.element(i);
        data[e.position * s.shape.channels + e.channel] = s.value_bits[next++] ? 1 : -1;
    }
    return TernaryTensor(s.shape, std::move(data));
}

BinaryWeightTensor::BinaryWeightTensor(int kernel_h, int kernel_w, int in_channels, int out_channels)
    : BinaryWeightTensor(kernel_h, kernel_w, in_channels, out_channels,
                         BitVector(static_cast<std::size_t>(kernel_h) * kernel_w * in_channels * out_channels)) {}

BinaryWeightTensor::BinaryWeightTensor(int kernel_h, int kernel_w, int in_channels, int out_channels, BitVector bits)
    : kernel_h_(kernel_h), kernel_w_(kernel_w), in_channels_(in_channels), out_channels_(out_channels),
      bits_(std::move(bits)) {
    require(kernel_h > 0 && kernel_w > 0 && in_channels > 0 && out_channels > 0, ErrorKind::Format,
            "weight tensor dimensions must be positive");
    require(bits_.size() == static_cast<std::size_t>(kernel_h) * kernel_w * in_channels * out_channels,
            ErrorKind::Format, "weight bit count does not match dimensions");
}

std::uint32_t BinaryWeightTensor::lane_word(int kr, int kc, int ic, int group) const {
    std::uint32_t word = 0;
    const int base = group * kChannelGroup;
    const int lanes = std::min(kChannelGroup, out_channels_ - base);
    const std::size_t first = index(kr, kc, ic, base);
    for (int i = 0; i < lanes; ++i)
        if (bits_[first + i]) word |= std::uint32_t{1} << i;
    return word;
}

BinaryWeightTensor BinaryWeightTensor::negated() const {
    BitVector flipped(bits_.size());
    for (std::size_t i = 0; i < bits_.size(); ++i)
        flipped.set(i, !bits_[i]);
    return BinaryWeightTensor(kernel_h_, kernel_w_, in_channels_, out_channels_, std::move(flipped));
}

BinaryWeightTensor BinaryWeightTensor::random(int kernel_h, int kernel_w, int in_channels, int out_channels,
                                              std::mt19937_64& rng) {
    BinaryWeightTensor w(kernel_h, kernel_w, in_channels, out_channels);
    for (std::size_t i = 0; i < w.bits_.size(); ++i)
        w.bits_.set(i, (rng() >> 63) != 0);
    return w;
}

MemoryImage pack_map_memory(const SparseEncoding& s) {
    MemoryImage image;
    image.kind = MemoryKind::Map;
    const std::size_t positions = s.shape.positions();
    image.words.assign(static_cast<std::size_t>(channel_groups(s.shape.channels)) * positions, 0u);
    const Traversal trav(s.shape, s.order);
    for (std::size_t i = 0; i < s.map_bits.size(); ++i) {
        if (!s.map_bits[i]) continue;
        const auto e = trav.element(i);
        const std::size_t addr = static_cast<std::size_t>(e.channel / kChannelGroup) * positions + e.position;
        image.words[addr] |= std::uint32_t{1} << (e.channel % kChannelGroup);
    }
    return image;
}

BitVector unpack_map_memory(const MemoryImage& image, Shape shape, TraversalOrder order) {
    const std::size_t positions = shape.positions();
    require(image.words.size() == static_cast<std::size_t>(channel_groups(shape.channels)) * positions,
            ErrorKind::Format, "MAP image word count does not match shape");
    BitVector bits(shape.elements());
    const Traversal trav(shape, order);
    for (std::size_t p = 0; p < positions; ++p)
        for (int c = 0; c < shape.channels; ++c) {
            const std::uint32_t word = image.words[static_cast<std::size_t>(c / kChannelGroup) * positions + p];
            if ((word >> (c % kChannelGroup)) & 1u) bits.set(trav.index(p, c), true);
        }
    return bits;
}

std::size_t weight_word_address(const BinaryWeightTensor& w, int kr, int group, int kc, int ic) {
    const std::size_t groups = static_cast<std::size_t>(channel_groups(w.out_channels()));
    return ((kr * groups + group) * w.kernel_w() + kc) * w.in_channels() + ic;
}

MemoryImage pack_weight_memory(const BinaryWeightTensor& w) {
    MemoryImage image;
    image.kind = MemoryKind::Weight;
    const int groups = channel_groups(w.out_channels());
    image.words.resize(static_cast<std::size_t>(w.kernel_h()) * groups * w.kernel_w() * w.in_channels());
    for (int r = 0; r < w.kernel_h(); ++r)
        for (int g = 0; g < groups; ++g)
            for (int c = 0; c < w.kernel_w(); ++c)
                for (int ic = 0; ic < w.in_channels(); ++ic)
                    image.words[weight_word_address(w, r, g, c, ic)] = w.lane_word(r, c, ic, g);
    return image;
}

MemoryImage pack_value_memory(const SparseEncoding& s) {
    MemoryImage image;
    image.kind = MemoryKind::Value;
    image.words.assign((s.value_bits.size() + 31) / 32, 0u);
    for (std::size_t i = 0; i < s.value_bits.size(); ++i)
        if (s.value_bits[i]) image.words[i / 32] |= std::uint32_t{1} << (i % 32);
    return image;
}

double SizeStats::reduction_2bit_vs_8bit() const {
    return dense8_bits == 0 ? 0.0 : 1.0 - static_cast<double>(dense2_bits) / static_cast<double>(dense8_bits);
}

double SizeStats::reduction_encoded_vs_2bit() const {
    return dense2_bits == 0 ? 0.0 : 1.0 - static_cast<double>(encoded_bits) / static_cast<double>(dense2_bits);
}

double SizeStats::reduction_encoded_vs_8bit() const {
    return dense8_bits == 0 ? 0.0 : 1.0 - static_cast<double>(encoded_bits) / static_cast<double>(dense8_bits);
}

SizeStats& SizeStats::operator+=(const SizeStats& o) {
    elements += o.elements;
    nonzeros += o.nonzeros;
    dense8_bits += o.dense8_bits;
    dense2_bits += o.dense2_bits;
    encoded_bits += o.encoded_bits;
    return *this;
}

SizeStats size_report(const SparseEncoding& s) {
    SizeStats st;
    st.elements = s.map_bits.size();
    st.nonzeros = s.value_bits.size();
    st.dense8_bits = 8 * st.elements;
    st.dense2_bits = 2 * st.elements;
    st.encoded_bits = st.elements + st.nonzeros;
    return st;
}

} // namespace tbn
