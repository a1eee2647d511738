#include <doctest.h>

#include <random>

#include "tbn/error.hpp"
#include "tbn/sparse_tensor.hpp"

using namespace tbn;

namespace {

TernaryTensor row(std::vector<std::int8_t> v) {
    const int n = static_cast<int>(v.size());
    return TernaryTensor(Shape{1, n, 1}, std::move(v));
}

std::string bits(const BitVector& b) {
    std::string s;
    for (std::size_t i = 0; i < b.size(); ++i) s += b[i] ? '1' : '0';
    return s;
}

Shape random_shape(std::mt19937_64& rng, int max_c = 80) {
    std::uniform_int_distribution<int> hw(1, 7), c(1, max_c);
    return {hw(rng), hw(rng), c(rng)};
}

} // namespace

TEST_SUITE("sparse-tensor") {

TEST_CASE("encode: row +1 0 -1 0") {
    const auto s = encode_sparse(row({1, 0, -1, 0}));
    CHECK(bits(s.map_bits) == "1010");
    CHECK(bits(s.value_bits) == "10");
}

TEST_CASE("encode: all-zero tensor has empty value stream") {
    const auto s = encode_sparse(TernaryTensor(Shape{3, 5, 40}));
    CHECK(s.map_bits.size() == 600);
    CHECK(s.map_bits.popcount() == 0);
    CHECK(s.value_bits.empty());
}

TEST_CASE("encode: all +1 2x2x1") {
    const auto s = encode_sparse(TernaryTensor(Shape{2, 2, 1}, {1, 1, 1, 1}));
    CHECK(bits(s.map_bits) == "1111");
    CHECK(bits(s.value_bits) == "1111");
}

TEST_CASE("decode: examples") {
    SparseEncoding s;
    s.shape = {1, 4, 1};
    for (bool b : {true, false, true, false}) s.map_bits.push_back(b);
    s.value_bits.push_back(true);
    s.value_bits.push_back(false);
    CHECK(decode_sparse(s) == row({1, 0, -1, 0}));

    SparseEncoding empty;
    empty.shape = {2, 2, 3};
    empty.map_bits = BitVector(12);
    CHECK(decode_sparse(empty) == TernaryTensor(Shape{2, 2, 3}));

    SparseEncoding one;
    one.shape = {1, 1, 1};
    one.map_bits.push_back(true);
    one.value_bits.push_back(true);
    CHECK(decode_sparse(one) == row({1}));
}

TEST_CASE("decode: inconsistent value stream is a format error") {
    auto s = encode_sparse(row({1, 0, -1, 0}));
    s.value_bits.push_back(true);
    try {
        decode_sparse(s);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Format);
    }
    s = encode_sparse(row({1, 0, -1, 0}));
    s.map_bits.push_back(false);
    CHECK_THROWS_AS(decode_sparse(s), Error);
}

TEST_CASE("channel-group-major traversal puts every position of group 0 first") {
    TernaryTensor t(Shape{1, 2, 33});
    t.set(0, 0, 32, 1);  // group 1, position 0
    t.set(0, 1, 0, -1);  // group 0, position 1
    const auto s = encode_sparse(t);
    // group 0 occupies bits [0, 64), group 1 bits [64, 66)
    CHECK(s.map_bits[32]);
    CHECK(s.map_bits[64]);
    CHECK(s.value_bits.size() == 2);
    CHECK_FALSE(s.value_bits[0]);
    CHECK(s.value_bits[1]);

    const auto p = encode_sparse(t, TraversalOrder::PositionMajor);
    CHECK(p.map_bits[32]);
    CHECK(p.map_bits[33]);
    CHECK(p.value_bits[0]);
}

TEST_CASE("traversal index round trip") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const Shape s = random_shape(rng);
        for (auto order : {TraversalOrder::ChannelGroupMajor, TraversalOrder::PositionMajor}) {
            const Traversal tr(s, order);
            std::vector<char> seen(s.elements(), 0);
            for (std::size_t i = 0; i < s.elements(); ++i) {
                const auto e = tr.element(i);
                REQUIRE(tr.index(e.position, e.channel) == i);
                seen[e.position * s.channels + e.channel] = 1;
            }
            CHECK(std::count(seen.begin(), seen.end(), 1) == static_cast<long>(s.elements()));
        }
    }
}

TEST_CASE("property: decode(encode(t)) == t") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        const Shape s = random_shape(rng);
        const double d = std::uniform_real_distribution<double>(0, 1)(rng);
        const auto t = TernaryTensor::random(s, d, rng);
        for (auto order : {TraversalOrder::ChannelGroupMajor, TraversalOrder::PositionMajor}) {
            const auto e = encode_sparse(t, order);
            REQUIRE(e.order == order);
            REQUIRE(e.value_bits.size() == e.map_bits.popcount());
            REQUIRE(decode_sparse(e) == t);
        }
    }
}

TEST_CASE("map memory: 1x1x32 with channels 0 and 5") {
    TernaryTensor t(Shape{1, 1, 32});
    t.set(0, 0, 0, 1);
    t.set(0, 0, 5, -1);
    const auto m = pack_map_memory(encode_sparse(t));
    REQUIRE(m.words.size() == 1);
    CHECK(m.kind == MemoryKind::Map);
    CHECK(m.words[0] == ((1u << 0) | (1u << 5)));
}

TEST_CASE("map memory: 32x32x64 has 2048 words, group 0 first") {
    TernaryTensor t(Shape{32, 32, 64});
    t.set(0, 1, 3, 1);    // group 0, position 1
    t.set(0, 1, 35, -1);  // group 1, position 1
    const auto m = pack_map_memory(encode_sparse(t));
    REQUIRE(m.words.size() == 2048);
    CHECK(m.words[1] == (1u << 3));
    CHECK(m.words[1024 + 1] == (1u << 3));
    CHECK(std::count(m.words.begin(), m.words.end(), 0u) == 2046);
}

TEST_CASE("map memory: all-zero tensor and padding") {
    const auto m = pack_map_memory(encode_sparse(TernaryTensor(Shape{3, 3, 40})));
    CHECK(m.words.size() == 18);
    CHECK(std::all_of(m.words.begin(), m.words.end(), [](auto w) { return w == 0; }));

    TernaryTensor full(Shape{1, 1, 40}, std::vector<std::int8_t>(40, 1));
    const auto f = pack_map_memory(encode_sparse(full));
    CHECK(f.words[0] == 0xFFFFFFFFu);
    CHECK(f.words[1] == 0xFFu); // lanes 40..63 padded with zeros
}

TEST_CASE("property: map memory round trip and word count") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const Shape s = random_shape(rng, 100);
        const auto t = TernaryTensor::random(s, 0.5, rng);
        for (auto order : {TraversalOrder::ChannelGroupMajor, TraversalOrder::PositionMajor}) {
            const auto e = encode_sparse(t, order);
            const auto m = pack_map_memory(e);
            REQUIRE(m.words.size() == static_cast<std::size_t>(channel_groups(s.channels)) * s.positions());
            REQUIRE(unpack_map_memory(m, s, order) == e.map_bits);
        }
    }
}

TEST_CASE("weight memory: word counts and contents") {
    std::mt19937_64 rng(1);
    CHECK(pack_weight_memory(BinaryWeightTensor::random(3, 3, 1, 32, rng)).words.size() == 9);
    CHECK(pack_weight_memory(BinaryWeightTensor::random(3, 3, 2, 64, rng)).words.size() == 36);

    BinaryWeightTensor ones(1, 1, 1, 32);
    for (int oc = 0; oc < 32; ++oc) ones.set(0, 0, 0, oc, true);
    const auto m = pack_weight_memory(ones);
    REQUIRE(m.words.size() == 1);
    CHECK(m.words[0] == 0xFFFFFFFFu);
    CHECK(m.kind == MemoryKind::Weight);
}

TEST_CASE("property: weight word address layout, bit i = output channel 32g+i") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 30; ++trial) {
        const int cin = 1 + static_cast<int>(rng() % 40), cout = 1 + static_cast<int>(rng() % 70);
        const auto w = BinaryWeightTensor::random(3, 3, cin, cout, rng);
        const auto m = pack_weight_memory(w);
        const int gout = channel_groups(cout);
        REQUIRE(m.words.size() == static_cast<std::size_t>(9 * cin * gout));
        for (int r = 0; r < 3; ++r)
            for (int g = 0; g < gout; ++g)
                for (int c = 0; c < 3; ++c)
                    for (int ic = 0; ic < cin; ++ic) {
                        const std::size_t a = ((static_cast<std::size_t>(r) * gout + g) * 3 + c) * cin + ic;
                        REQUIRE(weight_word_address(w, r, g, c, ic) == a);
                        for (int i = 0; i < 32; ++i) {
                            const int oc = 32 * g + i;
                            const bool expect = oc < cout && w.bit(r, c, ic, oc);
                            REQUIRE(((m.words[a] >> i) & 1u) == (expect ? 1u : 0u));
                        }
                    }
        // each kernel row is one contiguous segment
        CHECK(weight_word_address(w, 1, 0, 0, 0) == static_cast<std::size_t>(gout * 3 * cin));
    }
}

TEST_CASE("value memory packs the stream 32 bits per word") {
    TernaryTensor t(Shape{1, 40, 1});
    for (int i = 0; i < 40; ++i) t.set(0, i, 0, i % 3 == 0 ? 1 : -1);
    const auto s = encode_sparse(t);
    const auto m = pack_value_memory(s);
    REQUIRE(m.words.size() == 2);
    for (int i = 0; i < 40; ++i) CHECK(((m.words[i / 32] >> (i % 32)) & 1u) == (i % 3 == 0 ? 1u : 0u));
}

TEST_CASE("size report: 2-bit vs 8-bit is exactly 75%") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        const auto s = encode_sparse(TernaryTensor::random(random_shape(rng), 0.3, rng));
        const auto r = size_report(s);
        CHECK(r.dense2_bits * 4 == r.dense8_bits);
        CHECK(r.reduction_2bit_vs_8bit() == 0.75);
        CHECK(r.encoded_bits == r.elements + r.nonzeros);
    }
}

TEST_CASE("size report: N = 65536 at density 0.462") {
    TernaryTensor t(Shape{256, 256, 1});
    // exactly 30278 = round(0.462 * 65536) non-zeros
    for (int i = 0; i < 30278; ++i) t.set(i / 256, i % 256, 0, i % 2 ? 1 : -1);
    const auto r = size_report(encode_sparse(t));
    CHECK(r.encoded_bits == 95814);
    CHECK(r.dense2_bits == 131072);
    CHECK(r.reduction_encoded_vs_2bit() == doctest::Approx(0.269).epsilon(0.001));
}

TEST_CASE("size report: all-zero tensor is a 50% reduction vs 2-bit") {
    const auto r = size_report(encode_sparse(TernaryTensor(Shape{4, 4, 8})));
    CHECK(r.encoded_bits == 128);
    CHECK(r.reduction_encoded_vs_2bit() == 0.5);
}

TEST_CASE("property: reduction vs 2-bit is monotone decreasing in density") {
    const Shape s{8, 8, 16};
    double prev = 1.0;
    for (std::size_t nnz = 0; nnz <= s.elements(); nnz += 7) {
        TernaryTensor t(s);
        for (std::size_t i = 0; i < nnz; ++i)
            t.set(static_cast<int>(i / 128), static_cast<int>(i / 16 % 8), static_cast<int>(i % 16), 1);
        const double r = size_report(encode_sparse(t)).reduction_encoded_vs_2bit();
        CHECK(r < prev);
        prev = r;
    }
}

TEST_CASE("size stats accumulate") {
    SizeStats a{10, 4, 80, 20, 14}, b{6, 1, 48, 12, 7};
    a += b;
    CHECK(a.elements == 16);
    CHECK(a.nonzeros == 5);
    CHECK(a.encoded_bits == 21);
}

TEST_CASE("tensor invariants") {
    std::mt19937_64 rng(4);
    const auto t = TernaryTensor::random(Shape{5, 6, 7}, 0.4, rng);
    CHECK(t.data().size() == 210);
    CHECK(std::all_of(t.data().begin(), t.data().end(), [](int v) { return v >= -1 && v <= 1; }));
    CHECK_THROWS_AS(TernaryTensor(Shape{1, 1, 2}, {1, 2}), Error);
    CHECK_THROWS_AS(TernaryTensor(Shape{1, 1, 2}, {1}), Error);
}

TEST_CASE("binary weights: negation flips every bit") {
    std::mt19937_64 rng(8);
    const auto w = BinaryWeightTensor::random(3, 3, 5, 7, rng);
    const auto n = w.negated();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            for (int ic = 0; ic < 5; ++ic)
                for (int oc = 0; oc < 7; ++oc) CHECK(n.sign(r, c, ic, oc) == -w.sign(r, c, ic, oc));
    CHECK(w.bits().size() == 3u * 3 * 5 * 7);
}

} // TEST_SUITE
