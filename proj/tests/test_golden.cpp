#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "tbn/error.hpp"
#include "tbn/fixtures.hpp"
#include "tbn/golden.hpp"
#include "tbn/kernels.hpp"

using namespace tbn;
using golden::PartialSumTensor;

namespace {

PartialSumTensor psum(Shape s, std::vector<std::int16_t> v) {
    PartialSumTensor p(s);
    p.values = std::move(v);
    return p;
}

BinaryWeightTensor all_plus(int kh, int kw, int in, int out) {
    BinaryWeightTensor w(kh, kw, in, out);
    for (int r = 0; r < kh; ++r)
        for (int c = 0; c < kw; ++c)
            for (int i = 0; i < in; ++i)
                for (int o = 0; o < out; ++o) w.set(r, c, i, o, true);
    return w;
}

template <typename T>
bool same_values(const PartialSumTensor& p, const T& dense) {
    if (p.values.size() != dense.v.size()) return false;
    for (std::size_t i = 0; i < p.values.size(); ++i)
        if (p.values[i] != dense.v[i]) return false;
    return true;
}

} // namespace

TEST_SUITE("tbn-golden") {

TEST_CASE("xor_mac matches integer multiplication on all four bit pairs") {
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) CHECK(golden::xor_mac(a, b) == (a ? 1 : -1) * (b ? 1 : -1));
    CHECK(golden::xor_mac(true, true) == 1);
    CHECK(golden::xor_mac(true, false) == -1);
}

TEST_CASE("exhaustive XOR accumulation equals the integer dot product, length <= 4") {
    const auto& k = kernels::active();
    for (int len = 1; len <= 4; ++len) {
        int pow3 = 1;
        for (int i = 0; i < len; ++i) pow3 *= 3;
        for (int xi = 0; xi < pow3; ++xi)
            for (int wi = 0; wi < (1 << len); ++wi) {
                std::int8_t x[4], w[4];
                int dot = 0, acc = 0, code = xi;
                for (int i = 0; i < len; ++i, code /= 3) {
                    x[i] = static_cast<std::int8_t>(code % 3 - 1);
                    w[i] = (wi >> i) & 1 ? 1 : -1;
                    dot += x[i] * w[i];
                    if (x[i] != 0) acc += golden::xor_mac(x[i] > 0, w[i] > 0);
                }
                REQUIRE(acc == dot);
                REQUIRE(k.ternary_dot(x, w, static_cast<std::size_t>(len)) == dot);
            }
    }
}

TEST_CASE("conv: all-zero input gives all-zero output") {
    std::mt19937_64 rng(1);
    const auto out = golden::ternary_conv3x3(TernaryTensor(Shape{4, 5, 3}), BinaryWeightTensor::random(3, 3, 3, 7, rng));
    CHECK(out.shape == Shape{4, 5, 7});
    CHECK(std::all_of(out.values.begin(), out.values.end(), [](auto v) { return v == 0; }));
}

TEST_CASE("conv: 1x1 input, centre tap only") {
    const auto out = golden::ternary_conv3x3(TernaryTensor(Shape{1, 1, 1}, {1}), all_plus(3, 3, 1, 1));
    CHECK(out.values == std::vector<std::int16_t>{1});
}

TEST_CASE("property: conv equals the dense integer oracle") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 60; ++trial) {
        const Shape s{1 + static_cast<int>(rng() % 6), 1 + static_cast<int>(rng() % 6), 1 + static_cast<int>(rng() % 40)};
        const auto x = TernaryTensor::random(s, oracle::uniform01(rng), rng);
        const auto w = BinaryWeightTensor::random(3, 3, s.channels, 1 + static_cast<int>(rng() % 40), rng);
        REQUIRE(same_values(golden::ternary_conv3x3(x, w), oracle::conv3x3(x, w)));
    }
    const auto x = TernaryTensor::random(Shape{4, 4, 2}, 0.5, rng);
    const auto w = BinaryWeightTensor::random(3, 3, 2, 3, rng);
    CHECK(same_values(golden::ternary_conv3x3(x, w), oracle::conv3x3(x, w)));
}

TEST_CASE("property: negating the weights negates the conv output") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const auto x = TernaryTensor::random(Shape{5, 4, 9}, 0.5, rng);
        const auto w = BinaryWeightTensor::random(3, 3, 9, 11, rng);
        const auto a = golden::ternary_conv3x3(x, w), b = golden::ternary_conv3x3(x, w.negated());
        for (std::size_t i = 0; i < a.values.size(); ++i) REQUIRE(a.values[i] == -b.values[i]);
    }
}

TEST_CASE("fully connected examples") {
    const auto zero = golden::fully_connected(TernaryTensor(Shape{1, 1, 5}), all_plus(1, 1, 5, 3));
    CHECK(zero.values == std::vector<std::int16_t>{0, 0, 0});
    const auto cancel = golden::fully_connected(TernaryTensor(Shape{1, 1, 2}, {1, -1}), all_plus(1, 1, 2, 1));
    CHECK(cancel.values == std::vector<std::int16_t>{0});
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 40; ++trial) {
        const auto x = TernaryTensor::random(Shape{1, 1, 16}, 0.5, rng);
        const auto w = BinaryWeightTensor::random(1, 1, 16, 5, rng);
        REQUIRE(same_values(golden::fully_connected(x, w), oracle::fully_connected(x, w)));
    }
    for (int trial = 0; trial < 40; ++trial) {
        const auto x = TernaryTensor::random(Shape{2, 3, 70}, 0.4, rng);
        const auto w = BinaryWeightTensor::random(1, 1, 420, 7, rng);
        REQUIRE(same_values(golden::fully_connected(x, w), oracle::fully_connected(x, w)));
    }
}

TEST_CASE("accumulator overflow is a hard error") {
    const int n = 40000;
    TernaryTensor x(Shape{1, 1, n}, std::vector<std::int8_t>(n, 1));
    try {
        golden::fully_connected(x, all_plus(1, 1, n, 1));
        FAIL("expected overflow");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Overflow);
    }
    CHECK(golden::checked_psum(32767) == 32767);
    CHECK(golden::checked_psum(-32768) == -32768);
    CHECK_THROWS_AS(golden::checked_psum(32768), Error);
}

TEST_CASE("pool_relu examples") {
    CHECK(golden::pool_relu(psum({2, 2, 1}, {-5, -1, -7, -2})).values == std::vector<std::int16_t>{0});
    CHECK(golden::pool_relu(psum({2, 2, 1}, {3, 9, -4, 1})).values == std::vector<std::int16_t>{9});
    CHECK(golden::pool_relu(PartialSumTensor(Shape{4, 4, 3})).values == std::vector<std::int16_t>(12, 0));
    CHECK_THROWS_AS(golden::pool_relu(PartialSumTensor(Shape{3, 4, 1})), Error);
    // channel-interleaved 4x2x2 -> 2x1x2
    const auto p = golden::pool_relu(psum({4, 2, 2}, {1, -1, 2, -2, 3, -3, 4, -4, 5, 6, 7, 8, 0, 0, 0, 0}));
    CHECK(p.values == std::vector<std::int16_t>{4, 0, 7, 8});
}

TEST_CASE("batch norm examples") {
    CHECK(golden::bn_scale(1234, kBnUnity) == 1234);
    CHECK(golden::bn_scale(10, 128) == 5);
    std::size_t sat = 0;
    CHECK(golden::bn_scale(32767, 512, &sat) == 32767);
    CHECK(golden::bn_scale(-32768, 512, &sat) == -32768);
    CHECK(sat == 2);
    // ties go to even
    CHECK(golden::bn_scale(1, 128) == 0);  // 0.5
    CHECK(golden::bn_scale(3, 128) == 2);  // 1.5
    CHECK(golden::bn_scale(-1, 128) == 0); // -0.5
    CHECK(golden::bn_scale(-3, 128) == -2);
    CHECK(golden::bn_scale(5, 77) == 2); // 1.50390625 rounds to nearest
}

TEST_CASE("property: bn_scale equals the rounding oracle") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200000; ++trial) {
        const auto x = static_cast<std::int16_t>(rng());
        const auto f = static_cast<std::int16_t>(rng());
        REQUIRE(golden::bn_scale(x, f) == oracle::bn(x, f));
    }
}

TEST_CASE("batch norm applies per-channel factors") {
    std::size_t sat = 0;
    const auto out = golden::batch_norm(psum({1, 2, 2}, {10, 10, 20, 20}), std::vector<std::int16_t>{256, 128}, &sat);
    CHECK(out.values == std::vector<std::int16_t>{10, 5, 20, 10});
    CHECK(sat == 0);
    CHECK_THROWS_AS(golden::batch_norm(psum({1, 1, 2}, {1, 2}), std::vector<std::int16_t>{256}), Error);
}

TEST_CASE("quantize examples") {
    const std::vector<QuantThreshold> t{{20, -20}};
    auto q = [&](std::int16_t v) { return golden::quantize_ternary(psum({1, 1, 1}, {v}), t).at(0, 0, 0); };
    CHECK(q(30) == 1);
    CHECK(q(20) == 0);
    CHECK(q(-20) == 0);
    CHECK(q(-25) == -1);
    const std::vector<QuantThreshold> bad{{0, 0}};
    CHECK_THROWS_AS(golden::quantize_ternary(psum({1, 1, 1}, {0}), bad), Error);
}

TEST_CASE("argmax takes the lowest index on ties") {
    CHECK(golden::argmax(std::vector<std::int32_t>{0, 0, 0}) == 0);
    CHECK(golden::argmax(std::vector<std::int32_t>{1, 5, 5, 2}) == 1);
    CHECK(golden::argmax(std::vector<std::int32_t>{-3, -1, -2}) == 1);
}

TEST_CASE("infer: all-zero input through a zero-preserving net gives label 0") {
    auto net = default_topology();
    std::mt19937_64 rng(6);
    const auto probe = fixtures::synthetic_inputs(net.input_shape(), 1, 0.462, 1);
    fixtures::generate_params(net, probe, 7);
    const auto r = golden::infer(net, TernaryTensor(net.input_shape()));
    CHECK(std::all_of(r.logits.begin(), r.logits.end(), [](auto v) { return v == 0; }));
    CHECK(r.label == 0);
}

TEST_CASE("infer: two-class FC net by hand") {
    NetworkConfig net;
    net.class_count = 2;
    LayerSpec fc;
    fc.name = "fc";
    fc.kind = LayerKind::FullyConnected;
    fc.in_shape = {1, 1, 3};
    fc.out_shape = {1, 1, 2};
    BinaryWeightTensor w(1, 1, 3, 2);
    // class 0 weights (+1, -1, -1), class 1 weights (+1, +1, +1)
    w.set(0, 0, 0, 0, true);
    for (int i = 0; i < 3; ++i) w.set(0, 0, i, 1, true);
    fc.weights = std::make_shared<BinaryWeightTensor>(w);
    net.layers.push_back(fc);
    // x = (+1, -1, 0): class 0 = 1 + 1 = 2, class 1 = 1 - 1 = 0
    const auto r = golden::infer(net, TernaryTensor(Shape{1, 1, 3}, {1, -1, 0}));
    CHECK(r.logits == std::vector<std::int32_t>{2, 0});
    CHECK(r.label == 0);
    const auto r2 = golden::infer(net, TernaryTensor(Shape{1, 1, 3}, {0, 1, 1}));
    CHECK(r2.logits == std::vector<std::int32_t>{-2, 2});
    CHECK(r2.label == 1);
}

TEST_CASE("property: random networks match the dense oracle") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 150; ++trial) {
        const auto net = oracle::random_network(rng);
        const auto x = TernaryTensor::random(net.input_shape(), oracle::uniform01(rng), rng);
        const auto r = golden::infer(net, x, true);
        const auto expect = oracle::infer(net, x);
        REQUIRE(r.logits.size() == expect.size());
        for (std::size_t i = 0; i < expect.size(); ++i) REQUIRE(r.logits[i] == expect[i]);
        std::size_t consumers = 0;
        for (const auto& l : net.layers) consumers += l.consumes_ternary();
        CHECK(r.layer_inputs.size() == consumers);
    }
}

TEST_CASE("property: zero-skipping neutrality") {
    // Dropping zeros from the input representation and rebuilding it never changes any output.
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        const auto x = TernaryTensor::random(Shape{4, 4, 12}, 0.3, rng);
        const auto w = BinaryWeightTensor::random(3, 3, 12, 8, rng);
        const auto rebuilt = decode_sparse(encode_sparse(x, TraversalOrder::PositionMajor));
        REQUIRE(golden::ternary_conv3x3(rebuilt, w) == golden::ternary_conv3x3(x, w));
        // and zeros contribute nothing: perturbing the weights only under zero inputs is invisible
        BinaryWeightTensor w2 = w;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                for (int ic = 0; ic < 12; ++ic)
                    for (int oc = 0; oc < 8; ++oc) w2.set(r, c, ic, oc, rng() & 1);
        TernaryTensor zero(Shape{4, 4, 12});
        REQUIRE(golden::ternary_conv3x3(zero, w2) == golden::ternary_conv3x3(zero, w));
    }
}

TEST_CASE("property: scaling a BN over the logits by a positive constant keeps the label") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 500; ++trial) {
        const int classes = 1 + static_cast<int>(rng() % 12);
        PartialSumTensor logits(Shape{1, 1, classes});
        for (auto& v : logits.values) v = static_cast<std::int16_t>(static_cast<int>(rng() % 2001) - 1000);
        const int base = golden::argmax(std::vector<std::int32_t>(logits.values.begin(), logits.values.end()));
        for (int k = 1; k <= 16; ++k) {
            const std::vector<std::int16_t> f(static_cast<std::size_t>(classes), static_cast<std::int16_t>(256 * k));
            std::size_t sat = 0;
            const auto out = golden::batch_norm(logits, f, &sat);
            REQUIRE(sat == 0);
            REQUIRE(golden::argmax(std::vector<std::int32_t>(out.values.begin(), out.values.end())) == base);
        }
    }
}

TEST_CASE("shape mismatch is rejected") {
    auto net = default_topology();
    fixtures::generate_params(net, fixtures::synthetic_inputs(net.input_shape(), 1, 0.462, 1), 1);
    CHECK_THROWS_AS(golden::infer(net, TernaryTensor(Shape{8, 8, 2})), Error);
}

} // TEST_SUITE
