// Compiled with -mavx2 -mpopcnt; only reached after a runtime CPU check.

#include "tbn/kernels.hpp"

#include <immintrin.h>

namespace tbn::kernels {

namespace {

void xor_accumulate32_avx2(std::int32_t* psum, std::uint32_t weight_word, bool sign_bit) {
    // Bits set where the weight agrees with the input sign -> +1, else -1.
    const std::uint32_t agree = sign_bit ? weight_word : ~weight_word;
    const __m256i word = _mm256_set1_epi32(static_cast<int>(agree));
    const __m256i one = _mm256_set1_epi32(1);
    __m256i mask = _mm256_setr_epi32(1 << 0, 1 << 1, 1 << 2, 1 << 3, 1 << 4, 1 << 5, 1 << 6, 1 << 7);
    for (int block = 0; block < 4; ++block) {
        const __m256i set = _mm256_cmpeq_epi32(_mm256_and_si256(word, mask), mask); // -1 where agree
        // agree: -2*(-1) - 1 = +1; disagree: -2*0 - 1 = -1
        const __m256i delta = _mm256_sub_epi32(_mm256_sub_epi32(_mm256_setzero_si256(), _mm256_add_epi32(set, set)), one);
        __m256i* dst = reinterpret_cast<__m256i*>(psum + 8 * block);
        _mm256_storeu_si256(dst, _mm256_add_epi32(_mm256_loadu_si256(dst), delta));
        mask = _mm256_slli_epi32(mask, 8);
    }
}

std::int32_t ternary_dot_avx2(const std::int8_t* a, const std::int8_t* b, std::size_t n) {
    const __m256i ones16 = _mm256_set1_epi16(1);
    __m256i acc = _mm256_setzero_si256();
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
        const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
        const __m256i prod = _mm256_sign_epi8(vb, va); // b * sign(a), a is ternary
        const __m256i lo = _mm256_cvtepi8_epi16(_mm256_castsi256_si128(prod));
        const __m256i hi = _mm256_cvtepi8_epi16(_mm256_extracti128_si256(prod, 1));
        acc = _mm256_add_epi32(acc, _mm256_madd_epi16(lo, ones16));
        acc = _mm256_add_epi32(acc, _mm256_madd_epi16(hi, ones16));
    }
    __m128i sum = _mm_add_epi32(_mm256_castsi256_si128(acc), _mm256_extracti128_si256(acc, 1));
    sum = _mm_hadd_epi32(sum, sum);
    sum = _mm_hadd_epi32(sum, sum);
    std::int32_t total = _mm_cvtsi128_si32(sum);
    for (; i < n; ++i)
        total += std::int32_t{a[i]} * std::int32_t{b[i]};
    return total;
}

std::size_t popcount_avx2(const std::uint64_t* words, std::size_t n) {
    const __m256i lookup = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4,
                                            0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
    const __m256i low_mask = _mm256_set1_epi8(0x0f);
    __m256i acc = _mm256_setzero_si256();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(words + i));
        const __m256i lo = _mm256_shuffle_epi8(lookup, _mm256_and_si256(v, low_mask));
        const __m256i hi = _mm256_shuffle_epi8(lookup, _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask));
        acc = _mm256_add_epi64(acc, _mm256_sad_epu8(_mm256_add_epi8(lo, hi), _mm256_setzero_si256()));
    }
    std::size_t total = static_cast<std::size_t>(_mm256_extract_epi64(acc, 0) + _mm256_extract_epi64(acc, 1) +
                                                 _mm256_extract_epi64(acc, 2) + _mm256_extract_epi64(acc, 3));
    for (; i < n; ++i)
        total += static_cast<std::size_t>(_mm_popcnt_u64(words[i]));
    return total;
}

const KernelTable kAvx2{"avx2", &xor_accumulate32_avx2, &ternary_dot_avx2, &popcount_avx2};

} // namespace

const KernelTable* avx2() {
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt");
    return supported ? &kAvx2 : nullptr;
}

} // namespace tbn::kernels
