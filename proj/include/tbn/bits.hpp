#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tbn {

/// Growable bit array backed by 64-bit words. Bit i lives in word i/64 at position i%64.
/// Bits past size() are always zero.
class BitVector {
public:
    BitVector() = default;
    explicit BitVector(std::size_t n, bool value = false);

    std::size_t size() const noexcept { return size_; }
    bool empty() const noexcept { return size_ == 0; }

    bool operator[](std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i, bool value) noexcept {
        const std::uint64_t mask = std::uint64_t{1} << (i & 63);
        if (value)
            words_[i >> 6] |= mask;
        else
            words_[i >> 6] &= ~mask;
    }
    void push_back(bool value);
    void reserve(std::size_t n) { words_.reserve((n + 63) / 64); }

    std::size_t popcount() const;

    std::span<const std::uint64_t> words() const noexcept { return words_; }

    /// Little-endian byte image, ceil(size/8) bytes, bit i at byte i/8 bit i%8.
    std::vector<std::uint8_t> to_bytes() const;
    static BitVector from_bytes(std::span<const std::uint8_t> bytes, std::size_t nbits);

    friend bool operator==(const BitVector& a, const BitVector& b) {
        return a.size_ == b.size_ && a.words_ == b.words_;
    }

private:
    std::vector<std::uint64_t> words_;
    std::size_t size_ = 0;
};

} // namespace tbn
