#include "tbn/bits.hpp"

#include "tbn/kernels.hpp"

namespace tbn {

BitVector::BitVector(std::size_t n, bool value) : words_((n + 63) / 64, value ? ~std::uint64_t{0} : 0), size_(n) {
    if (value && (n & 63)) words_.back() = (std::uint64_t{1} << (n & 63)) - 1;
}

void BitVector::push_back(bool value) {
    if ((size_ & 63) == 0) words_.push_back(0);
    if (value) words_.back() |= std::uint64_t{1} << (size_ & 63);
    ++size_;
}

std::size_t BitVector::popcount() const { return kernels::active().popcount(words_.data(), words_.size()); }

std::vector<std::uint8_t> BitVector::to_bytes() const {
    std::vector<std::uint8_t> out((size_ + 7) / 8);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::uint8_t>(words_[i / 8] >> (8 * (i % 8)));
    return out;
}

BitVector BitVector::from_bytes(std::span<const std::uint8_t> bytes, std::size_t nbits) {
    BitVector bv(nbits);
    for (std::size_t i = 0; i < (nbits + 7) / 8 && i < bytes.size(); ++i)
        bv.words_[i / 8] |= std::uint64_t{bytes[i]} << (8 * (i % 8));
    if (nbits & 63) bv.words_.back() &= (std::uint64_t{1} << (nbits & 63)) - 1;
    return bv;
}

} // namespace tbn
