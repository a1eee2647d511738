#include "tbn/kernels.hpp"

#include <bit>
#include <cstdlib>
#include <cstring>

namespace tbn::kernels {

namespace {

void xor_accumulate32_scalar(std::int32_t* psum, std::uint32_t weight_word, bool sign_bit) {
    const std::uint32_t sign_mask = sign_bit ? 0xFFFFFFFFu : 0u;
    const std::uint32_t differ = weight_word ^ sign_mask; // 1 where XOR says -1
    for (int i = 0; i < kLanes; ++i)
        psum[i] += ((differ >> i) & 1u) ? -1 : 1;
}

std::int32_t ternary_dot_scalar(const std::int8_t* a, const std::int8_t* b, std::size_t n) {
    std::int32_t acc = 0;
    for (std::size_t i = 0; i < n; ++i)
        acc += std::int32_t{a[i]} * std::int32_t{b[i]};
    return acc;
}

std::size_t popcount_scalar(const std::uint64_t* words, std::size_t n) {
    std::size_t total = 0;
    for (std::size_t i = 0; i < n; ++i)
        total += static_cast<std::size_t>(std::popcount(words[i]));
    return total;
}

const KernelTable kScalar{"scalar", &xor_accumulate32_scalar, &ternary_dot_scalar, &popcount_scalar};

const KernelTable& select() {
    const char* env = std::getenv("TBN_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return kScalar;
    if (const KernelTable* t = avx2()) return *t;
    return kScalar;
}

} // namespace

const KernelTable& scalar() { return kScalar; }

#if !defined(TBN_HAVE_AVX2)
const KernelTable* avx2() { return nullptr; }
#endif

const KernelTable& active() {
    static const KernelTable& table = select();
    return table;
}

} // namespace tbn::kernels
