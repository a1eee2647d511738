#pragma once

// Data-parallel inner loops. Every kernel has a portable scalar reference
// and, where the target supports it, an AVX2 variant. The variant is picked
// once at runtime; TBN_SIMD=scalar in the environment forces the reference.

#include <cstddef>
#include <cstdint>

namespace tbn::kernels {

inline constexpr int kLanes = 32;

struct KernelTable {
    const char* name;

    /// psum[i] += (bit i of weight_word == sign_bit) ? +1 : -1 for the 32 lanes.
    /// This is the XOR multiply of one ternary non-zero input against 32 binary weights.
    void (*xor_accumulate32)(std::int32_t* psum, std::uint32_t weight_word, bool sign_bit);

    /// Sum of a[i] * b[i]; a holds ternary values, b holds +-1.
    std::int32_t (*ternary_dot)(const std::int8_t* a, const std::int8_t* b, std::size_t n);

    /// Number of set bits across n words.
    std::size_t (*popcount)(const std::uint64_t* words, std::size_t n);
};

const KernelTable& scalar();

/// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2.
const KernelTable* avx2();

/// The table in use for this process.
const KernelTable& active();

} // namespace tbn::kernels
