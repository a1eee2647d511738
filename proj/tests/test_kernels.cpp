#include <doctest.h>

#include <bit>
#include <random>
#include <string>
#include <vector>

#include "tbn/bits.hpp"
#include "tbn/kernels.hpp"

using namespace tbn;

namespace {

std::vector<const kernels::KernelTable*> tables() {
    std::vector<const kernels::KernelTable*> t{&kernels::scalar()};
    if (kernels::avx2()) t.push_back(kernels::avx2());
    return t;
}

} // namespace

TEST_SUITE("kernels") {

TEST_CASE("active table is one of the known variants") {
    const auto& a = kernels::active();
    CHECK((&a == &kernels::scalar() || &a == kernels::avx2()));
    MESSAGE("active kernels: " << std::string(a.name));
}

TEST_CASE("xor_accumulate32 matches the per-lane definition") {
    std::mt19937_64 rng(1);
    for (const auto* k : tables()) {
        const std::string kname = k->name;
        CAPTURE(kname);
        for (int trial = 0; trial < 500; ++trial) {
            std::int32_t psum[32], expect[32];
            for (int i = 0; i < 32; ++i) psum[i] = expect[i] = static_cast<std::int32_t>(rng() % 2001) - 1000;
            const auto word = static_cast<std::uint32_t>(rng());
            const bool sign = rng() & 1;
            k->xor_accumulate32(psum, word, sign);
            for (int i = 0; i < 32; ++i) expect[i] += (((word >> i) & 1u) == (sign ? 1u : 0u)) ? 1 : -1;
            for (int i = 0; i < 32; ++i) REQUIRE(psum[i] == expect[i]);
        }
    }
}

TEST_CASE("ternary_dot: scalar and AVX2 agree for every length 0..300") {
    std::mt19937_64 rng(2);
    for (std::size_t n = 0; n <= 300; ++n) {
        std::vector<std::int8_t> a(n), b(n);
        long expect = 0;
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = static_cast<std::int8_t>(static_cast<int>(rng() % 3) - 1);
            b[i] = rng() & 1 ? 1 : -1;
            expect += a[i] * b[i];
        }
        for (const auto* k : tables()) REQUIRE(k->ternary_dot(a.data(), b.data(), n) == expect);
    }
}

TEST_CASE("ternary_dot on long all-agreeing vectors does not wrap") {
    const std::size_t n = 70000;
    std::vector<std::int8_t> a(n, 1), b(n, 1);
    for (const auto* k : tables()) CHECK(k->ternary_dot(a.data(), b.data(), n) == 70000);
    std::vector<std::int8_t> c(n, -1);
    for (const auto* k : tables()) CHECK(k->ternary_dot(c.data(), b.data(), n) == -70000);
}

TEST_CASE("popcount: scalar and AVX2 agree") {
    std::mt19937_64 rng(3);
    for (std::size_t n = 0; n <= 130; ++n) {
        std::vector<std::uint64_t> w(n);
        std::size_t expect = 0;
        for (auto& x : w) {
            x = rng();
            if (rng() % 5 == 0) x = ~0ull;
            expect += static_cast<std::size_t>(std::popcount(x));
        }
        for (const auto* k : tables()) REQUIRE(k->popcount(w.data(), n) == expect);
    }
}

TEST_CASE("bit vector basics") {
    BitVector b;
    for (int i = 0; i < 130; ++i) b.push_back(i % 3 == 0);
    CHECK(b.size() == 130);
    CHECK(b.popcount() == 44);
    CHECK(b[129]);
    b.set(129, false);
    CHECK_FALSE(b[129]);
    CHECK(b.popcount() == 43);
    BitVector filled(70, true);
    CHECK(filled.popcount() == 70);
    CHECK(filled.words()[1] == 0x3Full); // bits past size stay zero
}

TEST_CASE("property: bit vector byte round trip") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = rng() % 300;
        BitVector b;
        for (std::size_t i = 0; i < n; ++i) b.push_back(rng() & 1);
        const auto bytes = b.to_bytes();
        REQUIRE(bytes.size() == (n + 7) / 8);
        REQUIRE(BitVector::from_bytes(bytes, n) == b);
    }
    BitVector x;
    x.push_back(true);
    x.push_back(false);
    x.push_back(true);
    CHECK(x.to_bytes() == std::vector<std::uint8_t>{0x05});
}

} // TEST_SUITE
